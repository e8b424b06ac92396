//! The `H¹`-nonconforming 11-node prism element.
//!
//! Shape space `P2(K) ⊕ span{φ}` with the cubic
//! `φ = 5/12 λ0λ4λ5 + λ0(λ1λ2 + λ2λ3 + λ3λ1)`; degrees of freedom are the values at
//! the six vertices and the five face centroids, in the order `V1..V6, M1..M5`.

use std::sync::OnceLock;

use nalgebra::Point3;

use crate::frame::{side_pair, CellFrame};
use crate::lambda_poly::{lam, pairwise_sum, LambdaPoly};

/// Which horizontal cap a face interpolant lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cap {
    Bottom,
    Top,
}

impl Cap {
    /// Local face index (`F4` or `F5`, zero-based).
    pub fn face(self) -> usize {
        match self {
            Cap::Bottom => 3,
            Cap::Top => 4,
        }
    }

    /// Offset of the cap's vertices in the local vertex list.
    pub fn vertex_offset(self) -> usize {
        match self {
            Cap::Bottom => 0,
            Cap::Top => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct H1Basis {
    /// Nodal basis `φ1..φ11`.
    pub phi: [LambdaPoly; 11],
    /// The enriching cubic `φ`.
    pub bubble: LambdaPoly,
    /// `f1..f4`, the `x3`-independent functions spanning the cap interpolants.
    pub face_fns: [LambdaPoly; 4],
    pub dof_nodes: [Point3<f64>; 11],
}

struct Template {
    phi: [LambdaPoly; 11],
    bubble: LambdaPoly,
    face_fns: [LambdaPoly; 4],
}

fn template() -> &'static Template {
    static TEMPLATE: OnceLock<Template> = OnceLock::new();
    TEMPLATE.get_or_init(|| {
        let s = pairwise_sum();
        let l45 = lam(4) * lam(5);
        let bubble = (5.0 / 12.0) * (lam(0) * l45.clone()) + lam(0) * s.clone();

        // face-centroid functions
        let side: [LambdaPoly; 3] = std::array::from_fn(|i| {
            let (j, k) = side_pair(i);
            let li = lam(i + 1);
            (8.0 / 3.0) * (lam(j + 1) * lam(k + 1))
                - (4.0 / 3.0) * (&li * &(LambdaPoly::constant(1.0) - li.clone()))
                - (1.0 / 3.0) * &l45
        });
        let cap_common = 1.5 * &s + 0.375 * &l45;
        let phi10 = &cap_common - &(1.5 * &bubble);
        let phi11 = &cap_common + &(1.5 * &bubble);

        let vertex = |i: usize, top: bool| {
            let (j, k) = side_pair(i);
            let pair = &side[j] + &side[k];
            if top {
                0.5 * (lam(i + 1) * lam(4)) - 0.25 * pair - (1.0 / 3.0) * &phi11
            } else {
                -0.5 * (lam(i + 1) * lam(5)) - 0.25 * pair - (1.0 / 3.0) * &phi10
            }
        };

        let phi = [
            vertex(0, false),
            vertex(1, false),
            vertex(2, false),
            vertex(0, true),
            vertex(1, true),
            vertex(2, true),
            side[0].clone(),
            side[1].clone(),
            side[2].clone(),
            phi10,
            phi11,
        ];
        let face_fns = [lam(1) - s.clone(), lam(2) - s.clone(), lam(3) - s.clone(), 3.0 * s];
        Template { phi, bubble, face_fns }
    })
}

/// Nodes of the 11 point-value functionals: `V1..V6` then `M1..M5`.
pub fn dof_nodes(frame: &CellFrame) -> [Point3<f64>; 11] {
    std::array::from_fn(|i| {
        if i < 6 {
            frame.vertices[i]
        } else {
            frame.centroids[i - 6]
        }
    })
}

pub fn build_h1_basis(frame: &CellFrame) -> H1Basis {
    let t = template();
    H1Basis {
        phi: t.phi.clone(),
        bubble: t.bubble.clone(),
        face_fns: t.face_fns.clone(),
        dof_nodes: dof_nodes(frame),
    }
}

/// Coefficients of `I_K v`, i.e. the values of `v` at the 11 nodes.
pub fn h1_interpolate(basis: &H1Basis, v: impl Fn(&Point3<f64>) -> f64) -> [f64; 11] {
    basis.dof_nodes.map(|p| v(&p))
}

/// Coefficients of `I_F v` in `span{f1, f2, f3, f4}` on the bottom or top cap.
pub fn face_interpolant_i(frame: &CellFrame, cap: Cap, v: impl Fn(&Point3<f64>) -> f64) -> [f64; 4] {
    let o = cap.vertex_offset();
    [
        v(&frame.vertices[o]),
        v(&frame.vertices[o + 1]),
        v(&frame.vertices[o + 2]),
        v(&frame.centroids[cap.face()]),
    ]
}

/// `Σ c_i f_i` as a polynomial.
pub fn face_interpolant_poly(basis: &H1Basis, coeffs: &[f64; 4]) -> LambdaPoly {
    let mut out = LambdaPoly::zero();
    for (c, f) in coeffs.iter().zip(&basis.face_fns) {
        out.add_scaled(*c, f);
    }
    out
}

/// `Σ c_i φ_i` as a polynomial.
pub fn expand(phi: &[LambdaPoly; 11], coeffs: &[f64; 11]) -> LambdaPoly {
    let mut out = LambdaPoly::zero();
    for (c, p) in coeffs.iter().zip(phi) {
        out.add_scaled(*c, p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::CellFrame;

    #[test]
    fn bubble_values_on_reference() {
        let f = CellFrame::reference();
        let b = build_h1_basis(&f);
        let at = |p: &Point3<f64>| b.bubble.value_at(&f, p);
        assert!((at(&f.centroids[3]) + 1.0 / 3.0).abs() < 1e-15);
        assert!((at(&f.centroids[4]) - 1.0 / 3.0).abs() < 1e-15);
        assert!(at(&f.centroids[0]).abs() < 1e-15);
        for v in &f.vertices {
            assert!(at(v).abs() < 1e-15);
        }
    }

    #[test]
    fn side_function_values() {
        let f = CellFrame::reference();
        let b = build_h1_basis(&f);
        assert!((b.phi[6].value_at(&f, &f.centroids[0]) - 1.0).abs() < 1e-15);
        assert!(b.phi[6].value_at(&f, &f.centroids[3]).abs() < 1e-15);
    }

    #[test]
    fn nodal_matrix_is_identity() {
        let f = CellFrame::reference();
        let b = build_h1_basis(&f);
        for (i, p) in b.phi.iter().enumerate() {
            for (j, node) in b.dof_nodes.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (p.value_at(&f, node) - expected).abs() < 1e-14,
                    "phi{} at node {}",
                    i + 1,
                    j + 1
                );
            }
        }
    }

    #[test]
    fn interpolating_the_bubble_and_constants() {
        let f = CellFrame::reference();
        let b = build_h1_basis(&f);
        let c = h1_interpolate(&b, |p| b.bubble.value_at(&f, p));
        let expected = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0 / 3.0, 1.0 / 3.0];
        for (a, e) in c.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        assert_eq!(h1_interpolate(&b, |_| 1.0), [1.0; 11]);
    }

    #[test]
    fn cap_interpolant_reproduces_f4() {
        let f = CellFrame::reference();
        let b = build_h1_basis(&f);
        let c = face_interpolant_i(&f, Cap::Bottom, |p| b.face_fns[3].value_at(&f, p));
        for (a, e) in c.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((a - e).abs() < 1e-15);
        }
    }
}
