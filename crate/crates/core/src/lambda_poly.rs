//! Polynomials in the six affine cell coordinates `λ0..λ5`.
//!
//! Shape functions are written as sums of monomials `c · λ0^e0 ··· λ5^e5`. Since each
//! `λm` is affine with a constant gradient, derivatives follow from the chain rule
//!
//! ```text
//! ∇p  = Σ_m ∂p/∂λm ∇λm
//! ∇²p = Σ_{m,n} ∂²p/∂λm∂λn ∇λm ∇λnᵀ
//! ```
//!
//! with no curvature terms. The representation is redundant (`λ1 + λ2 + λ3 = 1`,
//! `λ4 = λ0 + 1`, ...) and is kept that way on purpose so that basis formulas can be
//! written exactly as they appear in the element definitions.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Point3, Vector3};

use crate::frame::CellFrame;

pub type Exponents = [u8; 6];

/// Symmetric 3×3 matrix stored as `[xx, yy, zz, xy, xz, yz]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat3(pub [f64; 6]);

impl SymMat3 {
    pub const ZERO: SymMat3 = SymMat3([0.0; 6]);

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        SymMat3([f(0, 0), f(1, 1), f(2, 2), f(0, 1), f(0, 2), f(1, 2)])
    }

    /// `a bᵀ + b aᵀ` scaled by `s / 2`, i.e. the symmetric part of `s a bᵀ`.
    fn sym_outer(a: &Vector3<f64>, b: &Vector3<f64>, s: f64) -> Self {
        let h = 0.5 * s;
        SymMat3([
            s * a[0] * b[0],
            s * a[1] * b[1],
            s * a[2] * b[2],
            h * (a[0] * b[1] + a[1] * b[0]),
            h * (a[0] * b[2] + a[2] * b[0]),
            h * (a[1] * b[2] + a[2] * b[1]),
        ])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let m = &self.0;
        match (i.min(j), i.max(j)) {
            (0, 0) => m[0],
            (1, 1) => m[1],
            (2, 2) => m[2],
            (0, 1) => m[3],
            (0, 2) => m[4],
            (1, 2) => m[5],
            _ => panic!("index ({i}, {j}) out of range"),
        }
    }

    /// Frobenius inner product `A : B`.
    pub fn frobenius_dot(&self, other: &SymMat3) -> f64 {
        let (a, b) = (&self.0, &other.0);
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.frobenius_dot(self)
    }

    /// `uᵀ A v`
    pub fn bilinear(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| u[i] * self.get(i, j) * v[j])
            .sum()
    }
}

impl Add for SymMat3 {
    type Output = SymMat3;
    fn add(self, rhs: SymMat3) -> SymMat3 {
        SymMat3(std::array::from_fn(|k| self.0[k] + rhs.0[k]))
    }
}

impl Sub for SymMat3 {
    type Output = SymMat3;
    fn sub(self, rhs: SymMat3) -> SymMat3 {
        SymMat3(std::array::from_fn(|k| self.0[k] - rhs.0[k]))
    }
}

impl Mul<f64> for SymMat3 {
    type Output = SymMat3;
    fn mul(self, s: f64) -> SymMat3 {
        SymMat3(self.0.map(|v| v * s))
    }
}

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vector3<f64>,
    pub hessian: SymMat3,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 {
        value: 0.0,
        gradient: Vector3::new(0.0, 0.0, 0.0),
        hessian: SymMat3::ZERO,
    };

    /// `self + s · other`, used to sum basis expansions.
    pub fn axpy(&mut self, s: f64, other: &Jet2) {
        self.value += s * other.value;
        self.gradient += other.gradient * s;
        for k in 0..6 {
            self.hessian.0[k] += s * other.hessian.0[k];
        }
    }
}

/// How many derivatives to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JetOrder {
    Value = 0,
    Gradient = 1,
    Hessian = 2,
}

/// Polynomial in `(λ0, ..., λ5)` with real coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LambdaPoly {
    terms: BTreeMap<Exponents, f64>,
}

impl LambdaPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0; 6], c)
    }

    /// The coordinate `λm`.
    pub fn var(m: usize) -> Self {
        let mut e = [0; 6];
        e[m] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(exponents: Exponents, coeff: f64) -> Self {
        let mut terms = BTreeMap::new();
        if coeff != 0.0 {
            terms.insert(exponents, coeff);
        }
        LambdaPoly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &f64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree in the λ variables (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = LambdaPoly::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * s);
        }
        out
    }

    fn add_term(&mut self, e: Exponents, c: f64) {
        let entry = self.terms.entry(e).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn add_scaled(&mut self, s: f64, other: &LambdaPoly) {
        for (e, c) in &other.terms {
            self.add_term(*e, s * c);
        }
    }

    pub fn mul_poly(&self, other: &LambdaPoly) -> Self {
        let mut out = LambdaPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = std::array::from_fn(|k| ea[k] + eb[k]);
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Evaluates the polynomial at `point` on `frame`.
    pub fn evaluate(&self, frame: &CellFrame, point: &Point3<f64>, order: JetOrder) -> Jet2 {
        let lam = frame.lambda_values(point);
        self.evaluate_lambdas(&lam, &frame.lambda_gradients(), order)
    }

    pub fn value_at(&self, frame: &CellFrame, point: &Point3<f64>) -> f64 {
        let lam = frame.lambda_values(point);
        self.terms
            .iter()
            .map(|(e, c)| c * (0..6).map(|m| lam[m].powi(e[m] as i32)).product::<f64>())
            .sum()
    }

    /// Evaluates from precomputed coordinate values and gradients.
    pub fn evaluate_lambdas(&self, lam: &[f64; 6], grads: &[Vector3<f64>; 6], order: JetOrder) -> Jet2 {
        let mut value = 0.0;
        let mut d1 = [0.0; 6];
        let mut d2 = [[0.0; 6]; 6];
        for (e, &c) in &self.terms {
            let pw = |m: usize, k: u8| -> f64 { lam[m].powi(k as i32) };
            let full: [f64; 6] = std::array::from_fn(|m| pw(m, e[m]));
            value += c * full.iter().product::<f64>();
            if order == JetOrder::Value {
                continue;
            }
            // product of all factors except those listed
            let rest = |skip: &[usize]| -> f64 { (0..6).filter(|m| !skip.contains(m)).map(|m| full[m]).product() };
            for m in (0..6).filter(|&m| e[m] > 0) {
                let em = e[m] as f64;
                d1[m] += c * em * pw(m, e[m] - 1) * rest(&[m]);
                if order < JetOrder::Hessian {
                    continue;
                }
                if e[m] > 1 {
                    d2[m][m] += c * em * (em - 1.0) * pw(m, e[m] - 2) * rest(&[m]);
                }
                for n in (m + 1..6).filter(|&n| e[n] > 0) {
                    let en = e[n] as f64;
                    d2[m][n] += c * em * en * pw(m, e[m] - 1) * pw(n, e[n] - 1) * rest(&[m, n]);
                }
            }
        }

        let mut jet = Jet2 { value, ..Jet2::ZERO };
        if order >= JetOrder::Gradient {
            jet.gradient = (0..6).fold(Vector3::zeros(), |acc, m| acc + grads[m] * d1[m]);
        }
        if order >= JetOrder::Hessian {
            let mut h = SymMat3::ZERO;
            for m in 0..6 {
                if d2[m][m] != 0.0 {
                    h = h + SymMat3::sym_outer(&grads[m], &grads[m], d2[m][m]);
                }
                for n in m + 1..6 {
                    if d2[m][n] != 0.0 {
                        // off-diagonal pair appears twice in the double sum
                        h = h + SymMat3::sym_outer(&grads[m], &grads[n], 2.0 * d2[m][n]);
                    }
                }
            }
            jet.hessian = h;
        }
        jet
    }
}

impl Add for &LambdaPoly {
    type Output = LambdaPoly;
    fn add(self, rhs: &LambdaPoly) -> LambdaPoly {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Add for LambdaPoly {
    type Output = LambdaPoly;
    fn add(self, rhs: LambdaPoly) -> LambdaPoly {
        &self + &rhs
    }
}

impl Sub for &LambdaPoly {
    type Output = LambdaPoly;
    fn sub(self, rhs: &LambdaPoly) -> LambdaPoly {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Sub for LambdaPoly {
    type Output = LambdaPoly;
    fn sub(self, rhs: LambdaPoly) -> LambdaPoly {
        &self - &rhs
    }
}

impl Mul for &LambdaPoly {
    type Output = LambdaPoly;
    fn mul(self, rhs: &LambdaPoly) -> LambdaPoly {
        self.mul_poly(rhs)
    }
}

impl Mul for LambdaPoly {
    type Output = LambdaPoly;
    fn mul(self, rhs: LambdaPoly) -> LambdaPoly {
        self.mul_poly(&rhs)
    }
}

impl Mul<LambdaPoly> for f64 {
    type Output = LambdaPoly;
    fn mul(self, rhs: LambdaPoly) -> LambdaPoly {
        rhs.scale(self)
    }
}

impl Mul<&LambdaPoly> for f64 {
    type Output = LambdaPoly;
    fn mul(self, rhs: &LambdaPoly) -> LambdaPoly {
        rhs.scale(self)
    }
}

impl Neg for LambdaPoly {
    type Output = LambdaPoly;
    fn neg(self) -> LambdaPoly {
        self.scale(-1.0)
    }
}

/// Shorthand for `λm`.
pub fn lam(m: usize) -> LambdaPoly {
    LambdaPoly::var(m)
}

/// `λ1λ2 + λ2λ3 + λ3λ1`
pub fn pairwise_sum() -> LambdaPoly {
    lam(1) * lam(2) + lam(2) * lam(3) + lam(3) * lam(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::CellFrame;

    fn reference() -> CellFrame {
        CellFrame::reference()
    }

    #[test]
    fn lambda1_value_and_gradient() {
        let f = reference();
        let j = lam(1).evaluate(&f, &Point3::new(0.3, 0.3, 0.7), JetOrder::Gradient);
        assert!((j.value - 0.4).abs() < 1e-15);
        assert!((j.gradient - Vector3::new(-1.0, -1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn triple_vertical_product_hessian() {
        let f = reference();
        let p = lam(0) * lam(4) * lam(5);
        let mid = p.evaluate(&f, &Point3::new(0.2, 0.1, 0.5), JetOrder::Hessian);
        let bottom = p.evaluate(&f, &Point3::new(0.2, 0.1, 0.0), JetOrder::Hessian);
        assert!(mid.hessian.get(2, 2).abs() < 1e-13);
        assert!((bottom.hessian.get(2, 2) + 24.0).abs() < 1e-12);
    }

    #[test]
    fn product_of_two_vars_is_single_term() {
        let p = lam(4) * lam(5);
        let terms: Vec<_> = p.terms().collect();
        assert_eq!(terms, vec![(&[0, 0, 0, 0, 1, 1], &1.0)]);
    }

    #[test]
    fn partition_of_unity() {
        let p = (lam(1) + lam(2)) + lam(3);
        let f = reference();
        for pt in [[0.1, 0.2, 0.3], [5.0, -3.0, 1.0]] {
            let j = p.evaluate(&f, &Point3::from(pt), JetOrder::Hessian);
            assert!((j.value - 1.0).abs() < 1e-14);
            assert!(j.gradient.norm() < 1e-14);
        }
    }

    #[test]
    fn bubble_has_four_cubic_terms() {
        let phi = (5.0 / 12.0) * (lam(0) * lam(4) * lam(5)) + lam(0) * pairwise_sum();
        assert_eq!(phi.num_terms(), 4);
        assert_eq!(phi.degree(), 3);
    }

    #[test]
    fn cancellation_drops_terms() {
        let p = lam(1) - lam(1);
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
    }
}
