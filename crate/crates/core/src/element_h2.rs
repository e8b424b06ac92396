//! The `H²`-nonconforming 11-node prism element.
//!
//! Shape space `P2(K) ⊕ span{λ0λ4λ5}`; degrees of freedom are the vertex values
//! `v(V1..V6)` and the outward normal derivatives `∂v/∂n(M1..M5)` at the face
//! centroids. The basis is built on top of the 2D Morley basis `{p_i, q_i}` of the
//! bottom triangle.

use nalgebra::{Point3, Vector3};

use crate::element_h1::Cap;
use crate::frame::{side_pair, CellFrame};
use crate::lambda_poly::{lam, JetOrder, LambdaPoly};

#[derive(Debug, Clone)]
pub struct H2Basis {
    /// Nodal basis `ψ1..ψ11`.
    pub psi: [LambdaPoly; 11],
    /// Morley vertex functions.
    pub p: [LambdaPoly; 3],
    /// Morley edge functions.
    pub q: [LambdaPoly; 3],
    pub vertex_nodes: [Point3<f64>; 6],
    /// Face centroid and outward unit normal for `τ7..τ11`.
    pub normal_nodes: [(Point3<f64>, Vector3<f64>); 5],
}

pub fn build_h2_basis(frame: &CellFrame) -> H2Basis {
    let gn: [f64; 4] = std::array::from_fn(|m| frame.grad_norm(m));
    let grads = frame.lambda_gradients();

    let q: [LambdaPoly; 3] = std::array::from_fn(|i| {
        let li = lam(i + 1);
        (1.0 / gn[i + 1]) * (&li * &(li.clone() - LambdaPoly::constant(1.0)))
    });
    let p: [LambdaPoly; 3] = std::array::from_fn(|i| {
        let (j, k) = side_pair(i);
        let djk = grads[j + 1].dot(&grads[k + 1]);
        let mut pi = lam(i + 1) + 2.0 * (lam(j + 1) * lam(k + 1));
        pi.add_scaled(-djk / gn[j + 1], &q[j]);
        pi.add_scaled(-djk / gn[k + 1], &q[k]);
        pi
    });

    let l45 = lam(4) * lam(5);
    let vertical = |i: usize| lam(0) * (lam(i + 1) - (1.0 / 6.0) * &l45);
    let bottom: [LambdaPoly; 3] = std::array::from_fn(|i| 0.5 * (&p[i] - &vertical(i)));
    let top: [LambdaPoly; 3] = std::array::from_fn(|i| 0.5 * (&p[i] + &vertical(i)));
    let cap_scale = 1.0 / (4.0 * gn[0]);
    let psi10 = cap_scale * (&l45 * &(LambdaPoly::constant(1.0) - lam(0)));
    let psi11 = cap_scale * (&l45 * &(LambdaPoly::constant(1.0) + lam(0)));

    let [b0, b1, b2] = bottom;
    let [t0, t1, t2] = top;
    let psi = [
        b0,
        b1,
        b2,
        t0,
        t1,
        t2,
        q[0].clone(),
        q[1].clone(),
        q[2].clone(),
        psi10,
        psi11,
    ];
    H2Basis {
        psi,
        p,
        q,
        vertex_nodes: frame.vertices,
        normal_nodes: std::array::from_fn(|f| (frame.centroids[f], frame.normals[f])),
    }
}

/// Applies `τ1..τ11` to a function given by its value and gradient.
pub fn apply_dofs(
    basis: &H2Basis,
    value: impl Fn(&Point3<f64>) -> f64,
    gradient: impl Fn(&Point3<f64>) -> Vector3<f64>,
) -> [f64; 11] {
    std::array::from_fn(|i| {
        if i < 6 {
            value(&basis.vertex_nodes[i])
        } else {
            let (m, n) = &basis.normal_nodes[i - 6];
            gradient(m).dot(n)
        }
    })
}

/// Applies `τ1..τ11` to a polynomial on the cell.
pub fn apply_dofs_poly(basis: &H2Basis, frame: &CellFrame, v: &LambdaPoly) -> [f64; 11] {
    apply_dofs(
        basis,
        |p| v.value_at(frame, p),
        |p| v.evaluate(frame, p, JetOrder::Gradient).gradient,
    )
}

/// Coefficients of `J_K v` in the basis `ψ1..ψ11`.
pub fn h2_interpolate(
    basis: &H2Basis,
    value: impl Fn(&Point3<f64>) -> f64,
    gradient: impl Fn(&Point3<f64>) -> Vector3<f64>,
) -> [f64; 11] {
    apply_dofs(basis, value, gradient)
}

/// Coefficients of `J_F v` in `span{λ1, λ2, λ3}` on the bottom or top cap.
pub fn face_interpolant_j(frame: &CellFrame, cap: Cap, v: impl Fn(&Point3<f64>) -> f64) -> [f64; 3] {
    let o = cap.vertex_offset();
    std::array::from_fn(|i| v(&frame.vertices[o + i]))
}

pub fn face_interpolant_j_poly(coeffs: &[f64; 3]) -> LambdaPoly {
    let mut out = LambdaPoly::zero();
    for (i, c) in coeffs.iter().enumerate() {
        out.add_scaled(*c, &lam(i + 1));
    }
    out
}
