use proptest::prelude::*;

use prismfem::frame::{side_pair, CellFrame};
use prismfem::lambda_poly::{JetOrder, LambdaPoly};
use prismfem::{Point3, Vector3};

fn prism() -> impl Strategy<Value = [Point3<f64>; 6]> {
    (
        (-1.0..1.0f64, -1.0..1.0f64, 0.0..std::f64::consts::TAU),
        prop::array::uniform3((0.3..1.5f64, -0.5..0.5f64)),
        (-1.0..1.0f64, 0.2..2.0f64),
    )
        .prop_map(|((cx, cy, t0), arms, (zb, h))| {
            std::array::from_fn(|i| {
                let (r, dt) = arms[i % 3];
                let t = t0 + (i % 3) as f64 * std::f64::consts::TAU / 3.0 + dt;
                Point3::new(cx + r * t.cos(), cy + r * t.sin(), if i < 3 { zb } else { zb + h })
            })
        })
}

fn poly() -> impl Strategy<Value = LambdaPoly> {
    prop::collection::vec((prop::array::uniform6(0u8..3), -2.0..2.0f64), 1..8).prop_map(|terms| {
        let mut p = LambdaPoly::zero();
        for (mut e, c) in terms {
            // keep total degree at most 3
            while e.iter().map(|&x| x as usize).sum::<usize>() > 3 {
                let k = e.iter().position(|&x| x > 0).unwrap();
                e[k] -= 1;
            }
            p = p + LambdaPoly::monomial(e, c);
        }
        p
    })
}

fn interior(frame: &CellFrame, a: f64, b: f64, t: f64) -> Point3<f64> {
    let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
    let p = frame.cap_point([1.0 - a - b, a, b], false);
    Point3::new(p.x, p.y, p.z + t * frame.height)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn coordinate_functions_are_normalized(v in prism()) {
        let f = CellFrame::from_vertices(&v, 0).unwrap();
        let l = &f.lambda;
        for i in 0..3 {
            prop_assert!((l[i + 1].eval(&v[i]) - 1.0).abs() < 1e-12);
            prop_assert!(l[i + 1].gradient.z.abs() < 1e-12);
            prop_assert!(l[i + 1].gradient.dot(&l[0].gradient).abs() < 1e-12);
        }
        prop_assert!((l[4].eval(&f.centroids[0]) - 1.0).abs() < 1e-12);
        prop_assert!((l[5].eval(&f.centroids[0]) + 1.0).abs() < 1e-12);
        prop_assert!((l[0].eval(&v[3]) - 1.0).abs() < 1e-12);
        prop_assert!((l[0].eval(&v[0]) + 1.0).abs() < 1e-12);
        prop_assert_eq!(l[0].gradient, l[4].gradient);
        prop_assert_eq!(l[0].gradient, l[5].gradient);
        prop_assert!(l[0].gradient.xy().norm() == 0.0);
        for p in f.vertices.iter().chain(&f.centroids) {
            prop_assert!((l[1].eval(p) + l[2].eval(p) + l[3].eval(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn side_face_functions_and_normals(v in prism()) {
        let f = CellFrame::from_vertices(&v, 0).unwrap();
        let cell_center = Point3::from(v.iter().map(|p| p.coords).sum::<Vector3<f64>>() / 6.0);
        for i in 0..3 {
            let (j, k) = side_pair(i);
            prop_assert!((f.xi[i].eval(&v[k]) - 1.0).abs() < 1e-12);
            prop_assert!((f.xi[i].eval(&v[j + 3]) + 1.0).abs() < 1e-12);
            prop_assert!((f.eta[i].eval(&v[k + 3]) - 1.0).abs() < 1e-12);
            prop_assert!((f.eta[i].eval(&v[j]) + 1.0).abs() < 1e-12);
            let t = (v[k] - v[j]).normalize();
            prop_assert!((f.tangents[i] - t).norm() < 1e-12);
            prop_assert!(f.normals[i].dot(&t).abs() < 1e-12);
        }
        for face in 0..5 {
            prop_assert!((f.normals[face].norm() - 1.0).abs() < 1e-12);
            prop_assert!(f.normals[face].dot(&(f.centroids[face] - cell_center)) > 0.0);
        }
        prop_assert!((f.volume - f.base_area * f.height).abs() < 1e-12 * f.volume);
    }

    #[test]
    fn gradients_match_finite_differences(v in prism(), p in poly(), (a, b, t) in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)) {
        let f = CellFrame::from_vertices(&v, 0).unwrap();
        let x = interior(&f, a, b, t);
        let jet = p.evaluate(&f, &x, JetOrder::Hessian);
        let h = 1e-5;
        let e = [Vector3::x(), Vector3::y(), Vector3::z()];
        let scale = jet.gradient.norm().max(1.0);
        for k in 0..3 {
            let fd = (p.value_at(&f, &(x + e[k] * h)) - p.value_at(&f, &(x - e[k] * h))) / (2.0 * h);
            prop_assert!((fd - jet.gradient[k]).abs() <= 1e-6 * scale, "{} vs {}", fd, jet.gradient[k]);
            let gp = p.evaluate(&f, &(x + e[k] * h), JetOrder::Gradient).gradient;
            let gm = p.evaluate(&f, &(x - e[k] * h), JetOrder::Gradient).gradient;
            let hscale = jet.hessian.frobenius_norm_sq().sqrt().max(1.0);
            for l in 0..3 {
                prop_assert!(((gp[l] - gm[l]) / (2.0 * h) - jet.hessian.get(k, l)).abs() <= 1e-6 * hscale);
            }
        }
    }

    #[test]
    fn evaluation_is_linear(v in prism(), p in poly(), q in poly(), s in -3.0..3.0f64, (a, b, t) in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)) {
        let f = CellFrame::from_vertices(&v, 0).unwrap();
        let x = interior(&f, a, b, t);
        let combined = p.scale(s) + q.clone();
        let lhs = combined.evaluate(&f, &x, JetOrder::Hessian);
        let (jp, jq) = (p.evaluate(&f, &x, JetOrder::Hessian), q.evaluate(&f, &x, JetOrder::Hessian));
        let scale = 1.0 + jp.value.abs() * s.abs() + jq.value.abs();
        prop_assert!((lhs.value - (s * jp.value + jq.value)).abs() <= 1e-13 * scale);
        let gscale = 1.0 + jp.gradient.norm() * s.abs() + jq.gradient.norm();
        prop_assert!((lhs.gradient - (jp.gradient * s + jq.gradient)).norm() <= 1e-13 * gscale);
    }
}
