//! Randomized checks of the element identities on single prisms, and of the
//! weak continuity of assembled functions across mesh faces.
//!
//! Every check reports its largest residual over all trials next to the
//! tolerance it is held to.

use std::fmt::Write as _;

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{
    assemble, build_dof_map, local_basis, local_matrix, local_matrix_oracle, ElementKind, QuadDegrees,
};
use crate::element_h1::{
    build_h1_basis, expand, face_interpolant_i, face_interpolant_poly, h1_interpolate, Cap, H1Basis,
};
use crate::element_h2::{apply_dofs, build_h2_basis, face_interpolant_j, face_interpolant_j_poly, H2Basis};
use crate::frame::{compute_frames, reference_prism, side_pair, CellFrame};
use crate::lambda_poly::{JetOrder, LambdaPoly};
use crate::mesh::{build_structured_mesh, FaceKind, MeshPattern};
use crate::quadrature::{face_rule, prism_rule};
use crate::solver::{solve_csr, SolverMethod};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<IdentityCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = format!("seed {} trials {}\n", self.seed, self.trials);
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            writeln!(
                out,
                "{:<width$}  max {:.3e}  tol {:.0e}  {}",
                c.name,
                c.max_residual,
                c.tolerance,
                if c.passed() { "PASS" } else { "FAIL" }
            )
            .unwrap();
        }
        writeln!(
            out,
            "{}",
            if self.all_passed() {
                "all identities hold"
            } else {
                "some identities FAILED"
            }
        )
        .unwrap();
        out
    }
}

/// Collects the running maximum of each named residual.
#[derive(Default)]
struct Tracker {
    checks: Vec<IdentityCheck>,
}

impl Tracker {
    fn record(&mut self, name: &'static str, tolerance: f64, residual: f64) {
        // NaN must never pass
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        match self.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => c.max_residual = c.max_residual.max(residual),
            None => self.checks.push(IdentityCheck {
                name,
                max_residual: residual,
                tolerance,
            }),
        }
    }
}

const IDENTITY_TOL: f64 = 1e-10;
const REPRODUCTION_TOL: f64 = 1e-11;
const FUNCTIONS_PER_TRIAL: usize = 10;

/// A shape-regular right prism: a perturbed equilateral triangle with random size,
/// position and orientation, random height and vertical offset.
pub fn random_prism(rng: &mut impl Rng) -> [Point3<f64>; 6] {
    let cx = rng.random_range(-1.0..1.0);
    let cy = rng.random_range(-1.0..1.0);
    let theta0 = rng.random_range(0.0..std::f64::consts::TAU);
    let tri: [(f64, f64); 3] = std::array::from_fn(|i| {
        let r = rng.random_range(0.3..1.5);
        let t = theta0 + i as f64 * std::f64::consts::TAU / 3.0 + rng.random_range(-0.5..0.5);
        (cx + r * t.cos(), cy + r * t.sin())
    });
    let zb = rng.random_range(-1.0..1.0);
    let zt = zb + rng.random_range(0.2..2.0);
    std::array::from_fn(|i| {
        let (x, y) = tri[i % 3];
        Point3::new(x, y, if i < 3 { zb } else { zt })
    })
}

/// A uniformly distributed point of the prism.
pub fn random_point(frame: &CellFrame, rng: &mut impl Rng) -> Point3<f64> {
    let (mut a, mut b) = (rng.random::<f64>(), rng.random::<f64>());
    if a + b > 1.0 {
        (a, b) = (1.0 - a, 1.0 - b);
    }
    let bottom = frame.cap_point([1.0 - a - b, a, b], false);
    let t: f64 = rng.random();
    Point3::new(bottom.x, bottom.y, bottom.z + t * frame.height)
}

fn random_coeffs<const N: usize>(rng: &mut impl Rng) -> [f64; N] {
    std::array::from_fn(|_| rng.random_range(-1.0..1.0))
}

/// A random quadratic in the physical coordinates, centered at the prism centroid.
pub fn random_quadratic(frame: &CellFrame, rng: &mut impl Rng) -> impl Fn(&Point3<f64>) -> (f64, Vector3<f64>) {
    let c: Point3<f64> = Point3::from(frame.vertices.iter().map(|v| v.coords).sum::<Vector3<f64>>() / 6.0);
    let lin = Vector3::from(random_coeffs::<3>(rng));
    let q = random_coeffs::<6>(rng);
    let a0: f64 = rng.random_range(-1.0..1.0);
    let hess = nalgebra::Matrix3::new(q[0], q[3], q[4], q[3], q[1], q[5], q[4], q[5], q[2]);
    move |p: &Point3<f64>| {
        let d = p - c;
        (a0 + lin.dot(&d) + 0.5 * d.dot(&(hess * d)), lin + hess * d)
    }
}

/// Largest relative error of `I_K q` (or `J_K q`) against `q` over random quadratics
/// and random points of the prism.
pub fn p2_reproduction_residual(
    frame: &CellFrame,
    kind: ElementKind,
    rng: &mut impl Rng,
    quadratics: usize,
    points: usize,
) -> f64 {
    let basis = local_basis(frame, kind);
    let h1 = build_h1_basis(frame);
    let h2 = build_h2_basis(frame);
    let mut worst: f64 = 0.0;
    for _ in 0..quadratics {
        let q = random_quadratic(frame, rng);
        let coeffs = match kind {
            ElementKind::H1 => h1_interpolate(&h1, |p| q(p).0),
            ElementKind::H2 => apply_dofs(&h2, |p| q(p).0, |p| q(p).1),
        };
        let interp = expand(&basis, &coeffs);
        let pts: Vec<Point3<f64>> = (0..points).map(|_| random_point(frame, rng)).collect();
        let scale = pts.iter().map(|p| q(p).0.abs()).fold(0.0, f64::max).max(1e-300);
        for p in &pts {
            worst = worst.max((interp.value_at(frame, p) - q(p).0).abs() / scale);
        }
    }
    worst
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn frame_identities(f: &CellFrame, t: &mut Tracker, rng: &mut impl Rng) {
    let l = &f.lambda;
    let v = &f.vertices;
    let mut r: f64 = 0.0;
    for i in 0..3 {
        r = r.max((l[i + 1].eval(&v[i]) - 1.0).abs());
    }
    r = r.max((l[4].eval(&f.centroids[0]) - 1.0).abs());
    r = r.max((l[5].eval(&f.centroids[0]) + 1.0).abs());
    r = r.max((l[0].eval(&v[3]) - 1.0).abs());
    r = r.max((l[0].eval(&v[0]) + 1.0).abs());
    for _ in 0..5 {
        let p = random_point(f, rng);
        r = r.max((l[1].eval(&p) + l[2].eval(&p) + l[3].eval(&p) - 1.0).abs());
    }
    t.record("frame: coordinate normalization", IDENTITY_TOL, r);

    let g0 = l[0].gradient;
    let scale = |a: &Vector3<f64>| a.norm() * g0.norm();
    let mut r: f64 = 0.0;
    for i in 1..4 {
        r = r.max(l[i].gradient.z.abs() / l[i].gradient.norm());
        r = r.max(l[i].gradient.dot(&g0).abs() / scale(&l[i].gradient));
    }
    for m in [0, 4, 5] {
        r = r.max(l[m].gradient.xy().norm() / g0.norm());
        r = r.max((l[m].gradient - g0).norm() / g0.norm());
    }
    t.record("frame: gradient structure", IDENTITY_TOL, r);

    let mut r: f64 = 0.0;
    for i in 0..3 {
        let (j, k) = side_pair(i);
        for (idx, xi, eta) in [(k, 1.0, -1.0), (k + 3, 1.0, 1.0), (j, -1.0, -1.0), (j + 3, -1.0, 1.0)] {
            r = r.max((f.xi[i].eval(&v[idx]) - xi).abs());
            r = r.max((f.eta[i].eval(&v[idx]) - eta).abs());
        }
    }
    t.record("frame: side-face xi/eta", IDENTITY_TOL, r);
}

fn h1_identities(f: &CellFrame, t: &mut Tracker, rng: &mut impl Rng) -> Result<()> {
    let b = build_h1_basis(f);
    let mut r: f64 = 0.0;
    for (i, phi) in b.phi.iter().enumerate() {
        for (j, node) in b.dof_nodes.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            r = r.max((phi.value_at(f, node) - delta).abs());
        }
    }
    t.record("h1: nodal delta property", IDENTITY_TOL, r);

    let mut r: f64 = 0.0;
    for _ in 0..10 {
        let p = random_point(f, rng);
        r = r.max((b.phi.iter().map(|phi| phi.value_at(f, &p)).sum::<f64>() - 1.0).abs());
    }
    t.record("h1: partition of unity", 1e-12, r);

    t.record(
        "h1: P2 reproduction",
        REPRODUCTION_TOL,
        p2_reproduction_residual(f, ElementKind::H1, rng, 2, 10),
    );
    let c = h1_interpolate(&b, |p| b.bubble.value_at(f, p));
    let back = expand(&b.phi, &c);
    let mut r: f64 = 0.0;
    for _ in 0..10 {
        let p = random_point(f, rng);
        r = r.max((back.value_at(f, &p) - b.bubble.value_at(f, &p)).abs());
    }
    t.record("h1: cubic reproduction", REPRODUCTION_TOL, r);

    for _ in 0..FUNCTIONS_PER_TRIAL {
        h1_lemmas(f, &b, t, rng)?;
    }
    Ok(())
}

/// Face identities for one random `v ∈ P_K`.
fn h1_lemmas(f: &CellFrame, b: &H1Basis, t: &mut Tracker, rng: &mut impl Rng) -> Result<()> {
    let v = expand(&b.phi, &random_coeffs(rng));
    let val = |p: &Point3<f64>| v.value_at(f, p);

    // cap interpolants leave the same remainder on both caps
    let g4 = face_interpolant_poly(&b, &face_interpolant_i(f, Cap::Bottom, val));
    let g5 = face_interpolant_poly(&b, &face_interpolant_i(f, Cap::Top, val));
    let mut r: f64 = 0.0;
    for _ in 0..20 {
        let p = random_point(f, rng);
        let (p4, p5) = (
            Point3::new(p.x, p.y, f.vertices[0].z),
            Point3::new(p.x, p.y, f.vertices[3].z),
        );
        r = r.max(rel(val(&p4) - g4.value_at(f, &p4), val(&p5) - g5.value_at(f, &p5)));
    }
    t.record("h1: cap remainders agree", IDENTITY_TOL, r);

    let mut r: f64 = 0.0;
    for cap in [Cap::Bottom, Cap::Top] {
        let face = cap.face();
        let rule = face_rule(f, face, 6)?;
        let mean = rule.integrate(val) / f.face_areas[face];
        let o = cap.vertex_offset();
        let rhs = (val(&f.vertices[o]) + val(&f.vertices[o + 1]) + val(&f.vertices[o + 2])) / 12.0
            + 0.75 * val(&f.centroids[face]);
        r = r.max(rel(mean, rhs));
    }
    t.record("h1: cap mean quadrature", IDENTITY_TOL, r);

    let mut r: f64 = 0.0;
    for i in 0..3 {
        let (j, k) = side_pair(i);
        let rule = face_rule(f, i, 6)?;
        let area = f.face_areas[i];
        let vv = |m: usize| val(&f.vertices[m]);
        let mean = rule.integrate(val) / area;
        let mean_xi = rule.integrate(|p| val(p) * f.xi[i].eval(p)) / area;
        let mean_eta = rule.integrate(|p| val(p) * f.eta[i].eval(p)) / area;
        r = r.max(rel(
            mean,
            (vv(j) + vv(k) + vv(j + 3) + vv(k + 3)) / 12.0 + 2.0 / 3.0 * val(&f.centroids[i]),
        ));
        r = r.max(rel(mean_xi, (vv(k) + vv(k + 3) - vv(j) - vv(j + 3)) / 12.0));
        r = r.max(rel(mean_eta, (vv(j + 3) + vv(k + 3) - vv(j) - vv(k)) / 12.0));
    }
    t.record("h1: side-face moments", IDENTITY_TOL, r);
    Ok(())
}

fn h2_identities(f: &CellFrame, t: &mut Tracker, rng: &mut impl Rng) -> Result<()> {
    let b = build_h2_basis(f);
    let grad = |v: &LambdaPoly, p: &Point3<f64>| v.evaluate(f, p, JetOrder::Gradient).gradient;

    let mut r: f64 = 0.0;
    for (j, psi) in b.psi.iter().enumerate() {
        let col = apply_dofs(&b, |p| psi.value_at(f, p), |p| grad(psi, p));
        for (i, c) in col.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            r = r.max((c - delta).abs());
        }
    }
    t.record("h2: nodal delta property", IDENTITY_TOL, r);

    let mut r: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let (m, n) = (f.edge_midpoints[j], f.normals[j]);
            r = r.max((b.p[i].value_at(f, &f.vertices[j]) - delta).abs());
            r = r.max(b.q[i].value_at(f, &f.vertices[j]).abs());
            r = r.max((grad(&b.q[i], &m).dot(&n) - delta).abs());
            r = r.max(grad(&b.p[i], &m).dot(&n).abs() / f.grad_norm(1).max(1.0));
        }
    }
    t.record("h2: Morley relations", IDENTITY_TOL, r);

    t.record(
        "h2: P2 reproduction",
        REPRODUCTION_TOL,
        p2_reproduction_residual(f, ElementKind::H2, rng, 2, 10),
    );

    for _ in 0..FUNCTIONS_PER_TRIAL {
        h2_lemmas(f, &b, t, rng)?;
    }
    Ok(())
}

/// Face identities for one random `v ∈ Q_K`.
fn h2_lemmas(f: &CellFrame, b: &H2Basis, t: &mut Tracker, rng: &mut impl Rng) -> Result<()> {
    let grad = |v: &LambdaPoly, p: &Point3<f64>| v.evaluate(f, p, JetOrder::Gradient).gradient;
    let v = expand(&b.psi, &random_coeffs(rng));
    let val = |p: &Point3<f64>| v.value_at(f, p);
    let dv = |p: &Point3<f64>| grad(&v, p);

    let g4 = face_interpolant_j_poly(&face_interpolant_j(f, Cap::Bottom, val));
    let g5 = face_interpolant_j_poly(&face_interpolant_j(f, Cap::Top, val));
    let mut r: f64 = 0.0;
    for _ in 0..20 {
        let p = random_point(f, rng);
        let (p4, p5) = (
            Point3::new(p.x, p.y, f.vertices[0].z),
            Point3::new(p.x, p.y, f.vertices[3].z),
        );
        r = r.max(rel(val(&p4) - g4.value_at(f, &p4), val(&p5) - g5.value_at(f, &p5)));
    }
    t.record("h2: cap remainders agree", IDENTITY_TOL, r);

    let mut r: f64 = 0.0;
    for face in 0..5 {
        let n = f.normals[face];
        let rule = face_rule(f, face, 6)?;
        let mean = rule.integrate(|p| dv(p).dot(&n)) / f.face_areas[face];
        r = r.max(rel(mean, dv(&f.centroids[face]).dot(&n)));
    }
    t.record("h2: face-mean normal derivative", IDENTITY_TOL, r);

    let mut r: f64 = 0.0;
    for i in 0..3 {
        let (j, k) = side_pair(i);
        let rule = face_rule(f, i, 6)?;
        let vv = |m: usize| val(&f.vertices[m]);
        let tangential = rule.integrate(|p| dv(p).dot(&f.tangents[i])) / f.height;
        let vertical = rule.integrate(|p| dv(p).z) / f.edge_lengths[i];
        r = r.max(rel(tangential, 0.5 * (vv(k) + vv(k + 3) - vv(j) - vv(j + 3))));
        r = r.max(rel(vertical, 0.5 * (vv(j + 3) + vv(k + 3) - vv(j) - vv(k))));
    }
    t.record("h2: side-face derivative means", IDENTITY_TOL, r);
    Ok(())
}

fn quadrature_identities(f: &CellFrame, t: &mut Tracker) -> Result<()> {
    let c: Point3<f64> = Point3::from(f.vertices.iter().map(|v| v.coords).sum::<Vector3<f64>>() / 6.0);
    let reference = prism_rule(f, 10)?;
    let mut r: f64 = 0.0;
    for d in 1..=8 {
        let rule = prism_rule(f, d)?;
        for a in 0..=d {
            for b in 0..=d - a {
                for e in 0..=d - a - b {
                    let m = |p: &Point3<f64>| {
                        let x = p - c;
                        x.x.powi(a as i32) * x.y.powi(b as i32) * x.z.powi(e as i32)
                    };
                    let exact = reference.integrate(m);
                    let scale = reference.integrate(|p| m(p).abs()).max(1e-300);
                    r = r.max((rule.integrate(m) - exact).abs() / scale);
                }
            }
        }
    }
    t.record("quadrature: prism rules agree with degree 10", 1e-12, r);

    let mut r: f64 = 0.0;
    for i in 0..3 {
        let rule = face_rule(f, i, 2)?;
        let area = f.face_areas[i];
        let (xi, eta) = (&f.xi[i], &f.eta[i]);
        r = r.max(rule.integrate(|p| xi.eval(p)).abs() / area);
        r = r.max(rule.integrate(|p| eta.eval(p)).abs() / area);
        r = r.max(rule.integrate(|p| xi.eval(p) * eta.eval(p)).abs() / area);
        r = r.max((rule.integrate(|p| xi.eval(p).powi(2)) / area - 1.0 / 3.0).abs());
    }
    t.record("quadrature: side-face xi/eta moments", 1e-12, r);
    Ok(())
}

fn oracle_identities(f: &CellFrame, t: &mut Tracker) -> Result<()> {
    for (kind, name, tol) in [
        (ElementKind::H1, "assembly: H1 local matrix vs difference oracle", 1e-8),
        (ElementKind::H2, "assembly: H2 local matrix vs difference oracle", 1e-6),
    ] {
        t.record(name, tol, local_matrix_discrepancy(f, kind)?);
    }
    Ok(())
}

/// Largest entry difference between the local matrix and its difference oracle,
/// relative to the largest entry.
pub fn local_matrix_discrepancy(frame: &CellFrame, kind: ElementKind) -> Result<f64> {
    let a = local_matrix(frame, kind, 6)?;
    let o = local_matrix_oracle(frame, kind, 6)?;
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a
        .iter()
        .flatten()
        .zip(o.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(diff / scale)
}

/// Runs the single-prism identity checks on `trials` prisms: the reference prism
/// first, then random ones drawn from `seed`.
pub fn verify_identities(seed: u64, trials: usize) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tracker::default();
    for trial in 0..trials {
        let vertices = if trial == 0 {
            reference_prism()
        } else {
            random_prism(&mut rng)
        };
        let f = CellFrame::from_vertices(&vertices, trial)?;
        frame_identities(&f, &mut t, &mut rng);
        h1_identities(&f, &mut t, &mut rng)?;
        h2_identities(&f, &mut t, &mut rng)?;
        quadrature_identities(&f, &mut t)?;
        oracle_identities(&f, &mut t)?;
    }
    for kind in [ElementKind::H1, ElementKind::H2] {
        t.checks.extend(weak_continuity(4, kind, seed, 2)?);
        let name = match kind {
            ElementKind::H1 => "assembly: H1 reduced matrix factors (n = 2, 4)",
            ElementKind::H2 => "assembly: H2 reduced matrix factors (n = 2, 4)",
        };
        for n in [2, 4] {
            let ok = reduced_matrix_factors(n, kind)?;
            t.record(name, 0.0, if ok { 0.0 } else { f64::INFINITY });
        }
    }
    Ok(VerifyReport {
        seed,
        trials,
        checks: t.checks,
    })
}

/// Whether sparse Cholesky succeeds on the reduced stiffness matrix.
pub fn reduced_matrix_factors(n: usize, kind: ElementKind) -> Result<bool> {
    let mesh = build_structured_mesh(n, MeshPattern::default())?;
    let frames = compute_frames(&mesh)?;
    let system = assemble(&mesh, &frames, kind, kind.order(), &|_| 1.0, QuadDegrees::default())?;
    Ok(solve_csr(&system.matrix, &system.rhs, SolverMethod::Direct).is_ok())
}

/// Weak continuity of random assembled functions on the `n` trapezoid mesh.
///
/// `H1`: side faces `∫[w]ξ = 0` for `ξ ∈ {1, ξ_i, η_i}`, horizontal faces `[w] = 0`
/// at the vertices and centroid. `H2`: side faces `∫[∇w] = 0`, horizontal faces
/// `[w] = 0` at the vertices and `∫[∂w/∂x3] = 0`. Residuals are relative to the face
/// area times the size of `w` (or `∇w`) on the face.
pub fn weak_continuity(n: usize, kind: ElementKind, seed: u64, samples: usize) -> Result<Vec<IdentityCheck>> {
    let mesh = build_structured_mesh(n, MeshPattern::default())?;
    let frames = compute_frames(&mesh)?;
    let map = build_dof_map(&mesh, kind);
    let bases: Vec<[LambdaPoly; 11]> = frames.iter().map(|f| local_basis(f, kind)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tracker::default();
    let (side_name, cap_name) = match kind {
        ElementKind::H1 => ("h1: side-face jump moments", "h1: cap jumps at vertices and centroid"),
        ElementKind::H2 => (
            "h2: side-face mean gradient jump",
            "h2: cap value and mean normal-derivative jumps",
        ),
    };

    for _ in 0..samples {
        let w: Vec<f64> = (0..map.n_total()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let local: Vec<LambdaPoly> = (0..frames.len())
            .map(|c| expand(&bases[c], &map.gather(c, &w)))
            .collect();
        for face in mesh.faces.iter().filter(|f| !f.is_boundary) {
            let [(c1, lf1), (c2, _)] = [face.cells[0], face.cells[1]];
            let (f1, f2) = (&frames[c1], &frames[c2]);
            let jet = |c: usize, fr: &CellFrame, p: &Point3<f64>| local[c].evaluate(fr, p, JetOrder::Gradient);
            let rule = face_rule(f1, lf1, 6)?;
            let area = f1.face_areas[lf1];
            let size = rule
                .points
                .iter()
                .map(|p| {
                    let j = jet(c1, f1, p);
                    if kind == ElementKind::H1 {
                        j.value.abs()
                    } else {
                        j.gradient.norm()
                    }
                })
                .fold(1.0, f64::max);
            let jump = |p: &Point3<f64>| {
                let (a, b) = (jet(c1, f1, p), jet(c2, f2, p));
                (a.value - b.value, a.gradient - b.gradient)
            };
            match (face.kind, kind) {
                (FaceKind::SideQuad, ElementKind::H1) => {
                    let (xi, eta) = (&f1.xi[lf1], &f1.eta[lf1]);
                    for weight in [
                        &|_: &Point3<f64>| 1.0,
                        &|p: &Point3<f64>| xi.eval(p),
                        &|p: &Point3<f64>| eta.eval(p),
                    ] as [&dyn Fn(&Point3<f64>) -> f64; 3]
                    {
                        let m = rule.integrate(|p| jump(p).0 * weight(p));
                        t.record(side_name, 1e-9, m.abs() / (area * size));
                    }
                }
                (FaceKind::SideQuad, ElementKind::H2) => {
                    let mut m = Vector3::zeros();
                    for (p, wq) in rule.points.iter().zip(&rule.weights) {
                        m += jump(p).1 * *wq;
                    }
                    t.record(side_name, 1e-9, m.norm() / (area * size));
                }
                (FaceKind::HorizontalTri, _) => {
                    let mut nodes: Vec<Point3<f64>> = face.vertices.iter().map(|&v| mesh.vertices[v]).collect();
                    if kind == ElementKind::H1 {
                        nodes.push(face.centroid);
                    }
                    for p in &nodes {
                        t.record(cap_name, 1e-9, jump(p).0.abs() / size);
                    }
                    if kind == ElementKind::H2 {
                        let m = rule.integrate(|p| jump(p).1.z);
                        t.record(cap_name, 1e-9, m.abs() / (area * size));
                    }
                }
            }
        }
    }
    Ok(t.checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_prism_only_is_tight() {
        let report = verify_identities(7, 1).unwrap();
        assert!(report.all_passed(), "{}", report.render());
        for c in &report.checks {
            if !c.name.contains("oracle") {
                assert!(c.max_residual <= 1e-12, "{}: {:e}", c.name, c.max_residual);
            }
        }
    }

    #[test]
    fn random_prisms_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let v = random_prism(&mut rng);
            let f = CellFrame::from_vertices(&v, 0).unwrap();
            assert!(f.base_area > 0.0 && f.height >= 0.2);
        }
    }

    #[test]
    fn report_is_deterministic() {
        let a = verify_identities(42, 3).unwrap().render();
        let b = verify_identities(42, 3).unwrap().render();
        assert_eq!(a, b);
    }
}
