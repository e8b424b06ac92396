//! The closed-form nodal bases against bases obtained by inverting the
//! generalized Vandermonde matrix of `P2 ⊕ {cubic}`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prismfem::element_h1::build_h1_basis;
use prismfem::element_h2::build_h2_basis;
use prismfem::frame::CellFrame;
use prismfem::lambda_poly::{lam, JetOrder, LambdaPoly};
use prismfem::verify::{random_point, random_prism};
use prismfem::{Point3, Vector3};

/// Monomial `x^a y^b z^c` of degree ≤ 2 about `c0`: value and gradient.
fn monomial(e: [i32; 3], c0: &Point3<f64>, p: &Point3<f64>) -> (f64, Vector3<f64>) {
    let d = p - c0;
    let pw = |x: f64, k: i32| if k < 0 { 0.0 } else { x.powi(k) };
    let value = pw(d.x, e[0]) * pw(d.y, e[1]) * pw(d.z, e[2]);
    let grad = Vector3::new(
        e[0] as f64 * pw(d.x, e[0] - 1) * pw(d.y, e[1]) * pw(d.z, e[2]),
        e[1] as f64 * pw(d.x, e[0]) * pw(d.y, e[1] - 1) * pw(d.z, e[2]),
        e[2] as f64 * pw(d.x, e[0]) * pw(d.y, e[1]) * pw(d.z, e[2] - 1),
    );
    (value, grad)
}

const P2: [[i32; 3]; 10] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [2, 0, 0],
    [0, 2, 0],
    [0, 0, 2],
    [1, 1, 0],
    [1, 0, 1],
    [0, 1, 1],
];

/// Value and gradient of the 11 spanning functions at `p`.
fn spanning(frame: &CellFrame, cubic: &LambdaPoly, c0: &Point3<f64>, p: &Point3<f64>) -> Vec<(f64, Vector3<f64>)> {
    let mut out: Vec<_> = P2.iter().map(|e| monomial(*e, c0, p)).collect();
    let j = cubic.evaluate(frame, p, JetOrder::Gradient);
    out.push((j.value, j.gradient));
    out
}

fn check(
    frame: &CellFrame,
    cubic: &LambdaPoly,
    functionals: &dyn Fn(&dyn Fn(&Point3<f64>) -> (f64, Vector3<f64>)) -> [f64; 11],
    basis: &[LambdaPoly; 11],
    rng: &mut impl Rng,
) {
    let c0 = frame.centroids[3];
    let mut v = DMatrix::zeros(11, 11);
    for a in 0..11 {
        let col = functionals(&|p| spanning(frame, cubic, &c0, p)[a]);
        for (j, x) in col.iter().enumerate() {
            v[(j, a)] = *x;
        }
    }
    let coeffs = v.try_inverse().expect("unisolvent");
    for _ in 0..20 {
        let p = random_point(frame, rng);
        let s = spanning(frame, cubic, &c0, &p);
        for (i, phi) in basis.iter().enumerate() {
            let oracle: f64 = (0..11).map(|a| coeffs[(a, i)] * s[a].0).sum();
            let got = phi.value_at(frame, &p);
            assert!(
                (oracle - got).abs() <= 1e-9 * oracle.abs().max(1.0),
                "basis {i}: {got} vs {oracle}"
            );
        }
    }
}

#[test]
fn h1_basis_matches_vandermonde_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20 {
        let v = if trial == 0 {
            prismfem::frame::reference_prism()
        } else {
            random_prism(&mut rng)
        };
        let f = CellFrame::from_vertices(&v, 0).unwrap();
        let b = build_h1_basis(&f);
        let nodes = b.dof_nodes;
        let functionals = move |g: &dyn Fn(&Point3<f64>) -> (f64, Vector3<f64>)| nodes.map(|p| g(&p).0);
        check(&f, &b.bubble, &functionals, &b.phi, &mut rng);
    }
}

#[test]
fn h2_basis_matches_vandermonde_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cubic = lam(0) * lam(4) * lam(5);
    for trial in 0..20 {
        let v = if trial == 0 {
            prismfem::frame::reference_prism()
        } else {
            random_prism(&mut rng)
        };
        let f = CellFrame::from_vertices(&v, 0).unwrap();
        let b = build_h2_basis(&f);
        let (verts, normals) = (b.vertex_nodes, b.normal_nodes);
        let functionals = move |g: &dyn Fn(&Point3<f64>) -> (f64, Vector3<f64>)| {
            std::array::from_fn(|i| {
                if i < 6 {
                    g(&verts[i]).0
                } else {
                    let (m, n) = normals[i - 6];
                    g(&m).1.dot(&n)
                }
            })
        };
        check(&f, &cubic, &functionals, &b.psi, &mut rng);
    }
}

#[test]
fn h1_basis_is_p2_plus_bubble() {
    // subtracting the bubble multiple leaves a function with constant Hessian
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f = CellFrame::from_vertices(&random_prism(&mut rng), 0).unwrap();
    let b = build_h1_basis(&f);
    let bubble_at = |p: &Point3<f64>| b.bubble.evaluate(&f, p, JetOrder::Hessian);
    let (m4, m5) = (f.centroids[3], f.centroids[4]);
    for phi in &b.phi {
        // third derivatives of phi are a multiple of those of the bubble; the
        // multiple is fixed by the Hessian difference between the caps
        let d_phi = phi.evaluate(&f, &m5, JetOrder::Hessian).hessian - phi.evaluate(&f, &m4, JetOrder::Hessian).hessian;
        let d_bub = bubble_at(&m5).hessian - bubble_at(&m4).hessian;
        let c = d_phi.frobenius_dot(&d_bub) / d_bub.frobenius_norm_sq();
        let rest = |p: &Point3<f64>| phi.evaluate(&f, p, JetOrder::Hessian).hessian - bubble_at(p).hessian * c;
        let h0 = rest(&f.centroids[0]);
        for _ in 0..10 {
            let p = random_point(&f, &mut rng);
            let diff = rest(&p) - h0;
            assert!(diff.frobenius_norm_sq().sqrt() <= 1e-9 * h0.frobenius_norm_sq().sqrt().max(1.0));
        }
    }
}

#[test]
fn face_functions_take_nodal_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = CellFrame::from_vertices(&random_prism(&mut rng), 0).unwrap();
    let b = build_h1_basis(&f);
    for (i, fi) in b.face_fns.iter().enumerate() {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            assert!((fi.value_at(&f, &f.vertices[j]) - delta).abs() < 1e-12);
            assert!((fi.value_at(&f, &f.vertices[j + 3]) - delta).abs() < 1e-12);
        }
        let at_centroid = if i == 3 { 1.0 } else { 0.0 };
        assert!((fi.value_at(&f, &f.centroids[3]) - at_centroid).abs() < 1e-12);
        assert!((fi.value_at(&f, &f.centroids[4]) - at_centroid).abs() < 1e-12);
    }
}

#[test]
fn q_norms_use_horizontal_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let f = CellFrame::from_vertices(&random_prism(&mut rng), 0).unwrap();
    for m in 1..4 {
        let g = f.lambda[m].gradient;
        assert_eq!(g.z, 0.0);
        assert!((f.grad_norm(m) - g.xy().norm()).abs() <= 1e-15 * g.norm());
    }
}
