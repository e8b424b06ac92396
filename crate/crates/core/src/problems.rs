//! Manufactured solutions on the unit cube.
//!
//! Both exact solutions are products of one-dimensional factors, so every derivative
//! is assembled from the factors' derivatives.

use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};

use crate::lambda_poly::{Jet2, SymMat3};

pub trait ExactSolution: Sync {
    fn name(&self) -> &'static str;

    /// Order of the differential operator (1: `-Δ`, 2: `Δ²`).
    fn order(&self) -> usize;

    /// Value, gradient and Hessian of `u`.
    fn jet(&self, p: &Point3<f64>) -> Jet2;

    /// `f = -Δu` or `f = Δ²u`.
    fn source(&self, p: &Point3<f64>) -> f64;
}

/// A function of one variable with derivatives `[g, g', g'', g''', g'''']`.
type Factor = fn(f64) -> [f64; 5];

fn product_jet(factors: [Factor; 3], p: &Point3<f64>) -> ([[f64; 5]; 3], Jet2) {
    let d = [factors[0](p.x), factors[1](p.y), factors[2](p.z)];
    let prod = |k: [usize; 3]| d[0][k[0]] * d[1][k[1]] * d[2][k[2]];
    let unit = |i: usize, order: usize| {
        let mut k = [0; 3];
        k[i] = order;
        k
    };
    let jet = Jet2 {
        value: prod([0, 0, 0]),
        gradient: Vector3::new(prod(unit(0, 1)), prod(unit(1, 1)), prod(unit(2, 1))),
        hessian: SymMat3::from_fn(|i, j| {
            let mut k = [0; 3];
            k[i] += 1;
            k[j] += 1;
            prod(k)
        }),
    };
    (d, jet)
}

/// `u = exp(x1 - 2πx2 + 3πx3) sin(2πx2) sin(3πx3) (x1² - x1³)`, `f = -Δu`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonExample;

/// `(sin πt, cos πt)`, exact at multiples of 1/2 so boundary values vanish exactly.
fn sin_cos_pi(t: f64) -> (f64, f64) {
    let r = t - 2.0 * (t / 2.0).round();
    if r == 0.0 {
        (0.0, 1.0)
    } else if r.abs() == 1.0 {
        (0.0, -1.0)
    } else if r.abs() == 0.5 {
        (r.signum(), 0.0)
    } else {
        ((PI * r).sin(), (PI * r).cos())
    }
}

fn exp_sin(a: f64, k: f64, x: f64) -> [f64; 5] {
    // g = e^{ax} sin(kπx), derivatives via (a + ikπ)^m
    let b = k * PI;
    let e = (a * x).exp();
    let (s, c) = sin_cos_pi(k * x);
    let mut out = [0.0; 5];
    let (mut re, mut im) = (1.0, 0.0);
    for slot in out.iter_mut() {
        *slot = e * (re * s + im * c);
        let next_re = re * a - im * b;
        im = re * b + im * a;
        re = next_re;
    }
    out
}

fn poisson_x1(x: f64) -> [f64; 5] {
    let e = x.exp();
    [
        e * (x * x - x * x * x),
        e * (2.0 * x - 2.0 * x * x - x * x * x),
        e * (2.0 - 2.0 * x - 5.0 * x * x - x * x * x),
        e * (-7.0 * x - 8.0 * x * x - x * x * x),
        e * (-7.0 - 23.0 * x - 11.0 * x * x - x * x * x),
    ]
}

fn poisson_x2(x: f64) -> [f64; 5] {
    exp_sin(-2.0 * PI, 2.0, x)
}

fn poisson_x3(x: f64) -> [f64; 5] {
    exp_sin(3.0 * PI, 3.0, x)
}

impl ExactSolution for PoissonExample {
    fn name(&self) -> &'static str {
        "poisson"
    }

    fn order(&self) -> usize {
        1
    }

    fn jet(&self, p: &Point3<f64>) -> Jet2 {
        product_jet([poisson_x1, poisson_x2, poisson_x3], p).1
    }

    fn source(&self, p: &Point3<f64>) -> f64 {
        let h = self.jet(p).hessian;
        -(h.get(0, 0) + h.get(1, 1) + h.get(2, 2))
    }
}

/// `u = Π_i (1 + cos((2x_i - 1)π))`, `f = Δ²u`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BiharmonicExample;

fn raised_cosine(x: f64) -> [f64; 5] {
    let (s, c) = sin_cos_pi(2.0 * x - 1.0);
    let w = 2.0 * PI;
    [1.0 + c, -w * s, -w * w * c, w.powi(3) * s, w.powi(4) * c]
}

impl ExactSolution for BiharmonicExample {
    fn name(&self) -> &'static str {
        "biharmonic"
    }

    fn order(&self) -> usize {
        2
    }

    fn jet(&self, p: &Point3<f64>) -> Jet2 {
        product_jet([raised_cosine; 3], p).1
    }

    fn source(&self, p: &Point3<f64>) -> f64 {
        let (d, _) = product_jet([raised_cosine; 3], p);
        let fourth = d[0][4] * d[1][0] * d[2][0] + d[0][0] * d[1][4] * d[2][0] + d[0][0] * d[1][0] * d[2][4];
        let mixed = d[0][2] * d[1][2] * d[2][0] + d[0][2] * d[1][0] * d[2][2] + d[0][0] * d[1][2] * d[2][2];
        fourth + 2.0 * mixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Poisson,
    Biharmonic,
}

impl Problem {
    pub fn exact(self) -> &'static dyn ExactSolution {
        match self {
            Problem::Poisson => &PoissonExample,
            Problem::Biharmonic => &BiharmonicExample,
        }
    }
}

/// The two manufactured problems, Poisson first.
pub fn registry() -> [&'static dyn ExactSolution; 2] {
    [&PoissonExample, &BiharmonicExample]
}

/// Largest relative discrepancy between the closed-form derivatives of `u` and
/// central differences, over the given points.
///
/// The gradient is checked against differences of `u`, the Hessian against
/// differences of the gradient, and `f` against the difference Laplacian of the
/// closed-form Laplacian (`Δ²`) or of `u` (`-Δ`).
pub fn finite_difference_discrepancy(exact: &dyn ExactSolution, points: &[Point3<f64>]) -> f64 {
    let h = 1e-4;
    let e = [Vector3::x(), Vector3::y(), Vector3::z()];
    let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / scale.max(1e-300);
    let mut worst: f64 = 0.0;
    for p in points {
        let jet = exact.jet(p);
        let plus = |k: usize| exact.jet(&(p + e[k] * h));
        let minus = |k: usize| exact.jet(&(p - e[k] * h));

        let gscale = jet.gradient.norm().max(jet.value.abs());
        let hscale = jet.hessian.frobenius_norm_sq().sqrt().max(gscale);
        for k in 0..3 {
            let (jp, jm) = (plus(k), minus(k));
            worst = worst.max(rel((jp.value - jm.value) / (2.0 * h), jet.gradient[k], gscale));
            for l in 0..3 {
                let fd = (jp.gradient[l] - jm.gradient[l]) / (2.0 * h);
                worst = worst.max(rel(fd, jet.hessian.get(k, l), hscale));
            }
        }

        let f = exact.source(p);
        let fd = match exact.order() {
            1 => {
                let lap: f64 = (0..3)
                    .map(|k| (plus(k).value - 2.0 * jet.value + minus(k).value) / (h * h))
                    .sum();
                -lap
            }
            _ => {
                let lap = |j: &Jet2| j.hessian.get(0, 0) + j.hessian.get(1, 1) + j.hessian.get(2, 2);
                (0..3)
                    .map(|k| (lap(&plus(k)) - 2.0 * lap(&jet) + lap(&minus(k))) / (h * h))
                    .sum()
            }
        };
        let fscale = f.abs().max(hscale);
        worst = worst.max(rel(fd, f, fscale));
    }
    worst
}
