//! Quadrature on prisms and their faces.
//!
//! Prism rules are tensor products of a triangle rule with a Gauss–Legendre rule in
//! `x3`. Triangle rules are symmetric point sets for degrees up to 8 and collapsed
//! Gauss products above that. Side faces are rectangles and use Gauss products.

use nalgebra::Point3;

use crate::frame::CellFrame;
use crate::{Error, Result};

pub const MAX_DEGREE: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<Point3<f64>>,
    /// Weights in physical measure; they sum to the volume or area.
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadRule {
    pub fn integrate(&self, mut f: impl FnMut(&Point3<f64>) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Newton on P_m starting from the Chebyshev-like guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1], ascending
        nodes[m - 1 - i] = 0.5 * (x + 1.0);
        weights[m - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Triangle rule in barycentric coordinates with weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

struct Orbits {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl Orbits {
    fn new() -> Self {
        Orbits {
            points: vec![],
            weights: vec![],
        }
    }

    fn centroid(mut self, w: f64) -> Self {
        self.points.push([1.0 / 3.0; 3]);
        self.weights.push(w);
        self
    }

    /// The three permutations of `(a, a, 1 - 2a)`.
    fn s21(mut self, a: f64, w: f64) -> Self {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a, b], [a, b, a], [b, a, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
        self
    }

    /// The six permutations of `(a, b, 1 - a - b)`.
    fn s111(mut self, a: f64, b: f64, w: f64) -> Self {
        let c = 1.0 - a - b;
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
        self
    }

    fn finish(self, degree: usize) -> TriangleRule {
        TriangleRule {
            points: self.points,
            weights: self.weights,
            degree,
        }
    }
}

/// Collapsed Gauss product rule exact for degree `d` on the triangle.
fn collapsed_triangle_rule(d: usize) -> TriangleRule {
    let (u, wu) = gauss_legendre(d / 2 + 1 + 1);
    let (v, wv) = gauss_legendre(d / 2 + 1);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (ui, wi) in u.iter().zip(&wu) {
        for (vj, wj) in v.iter().zip(&wv) {
            // (x, y) = (ui, vj (1 - ui)), Jacobian (1 - ui), reference area 1/2
            let x = *ui;
            let y = vj * (1.0 - ui);
            points.push([1.0 - x - y, x, y]);
            weights.push(2.0 * wi * wj * (1.0 - ui));
        }
    }
    TriangleRule {
        points,
        weights,
        degree: d,
    }
}

/// Triangle rule exact for polynomials of degree `d` (all weights positive).
pub fn triangle_rule(d: usize) -> Result<TriangleRule> {
    let rule = match d {
        1 => Orbits::new().centroid(1.0).finish(1),
        2 => Orbits::new().s21(1.0 / 6.0, 1.0 / 3.0).finish(2),
        3 => Orbits::new()
            .s111(0.659027622374092, 0.231933368553031, 1.0 / 6.0)
            .finish(3),
        4 => Orbits::new()
            .s21(0.445948490915965, 0.223381589678011)
            .s21(0.091576213509771, 0.109951743655322)
            .finish(4),
        5 => Orbits::new()
            .centroid(0.225)
            .s21(0.470142064105115, 0.132394152788506)
            .s21(0.101286507323456, 0.125939180544827)
            .finish(5),
        6 => Orbits::new()
            .s21(0.249286745170910, 0.116786275726379)
            .s21(0.063089014491502, 0.050844906370207)
            .s111(0.053145049844817, 0.310352451033784, 0.082851075618374)
            .finish(6),
        7 | 8 => Orbits::new()
            .centroid(0.144315607677787)
            .s21(0.459292588292723, 0.095091634267285)
            .s21(0.170569307751760, 0.103217370534718)
            .s21(0.050547228317031, 0.032458497623198)
            .s111(0.008394777409958, 0.263112829634638, 0.027230314174435)
            .finish(8),
        9 | 10 => collapsed_triangle_rule(d),
        _ => return Err(Error::UnsupportedDegree(d)),
    };
    Ok(rule)
}

fn gauss_points_for(d: usize) -> usize {
    d.div_ceil(2).max(1)
}

/// Rule on the whole cell, exact for polynomials of total degree `d`.
pub fn prism_rule(frame: &CellFrame, d: usize) -> Result<QuadRule> {
    if d == 0 || d > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(d));
    }
    let tri = triangle_rule(d)?;
    let (zs, wz) = gauss_legendre(gauss_points_for(d + 1));
    let mut points = Vec::with_capacity(tri.points.len() * zs.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (b, wt) in tri.points.iter().zip(&tri.weights) {
        let base = frame.cap_point(*b, false);
        for (z, w) in zs.iter().zip(&wz) {
            points.push(base + nalgebra::Vector3::z() * (z * frame.height));
            weights.push(wt * w * frame.volume);
        }
    }
    Ok(QuadRule {
        points,
        weights,
        exactness_degree: d,
    })
}

/// Rule on local face `face` (0-based: `F1..F5`), exact for degree `d` on the face.
pub fn face_rule(frame: &CellFrame, face: usize, d: usize) -> Result<QuadRule> {
    if d == 0 || d > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(d));
    }
    let area = frame.face_areas[face];
    let (points, weights) = if face < 3 {
        let (s, ws) = gauss_legendre(gauss_points_for(d + 1));
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (si, wi) in s.iter().zip(&ws) {
            for (tj, wj) in s.iter().zip(&ws) {
                points.push(frame.side_point(face, *si, *tj));
                weights.push(wi * wj * area);
            }
        }
        (points, weights)
    } else {
        let tri = triangle_rule(d)?;
        let top = face == 4;
        let points = tri.points.iter().map(|b| frame.cap_point(*b, top)).collect();
        let weights = tri.weights.iter().map(|w| w * area).collect();
        (points, weights)
    };
    Ok(QuadRule {
        points,
        weights,
        exactness_degree: d,
    })
}
