//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prismfem::assembly::ElementKind;
use prismfem::element_h1::build_h1_basis;
use prismfem::element_h2::{apply_dofs, build_h2_basis};
use prismfem::frame::{reference_prism, CellFrame};
use prismfem::lambda_poly::JetOrder;
use prismfem::problems::Problem;
use prismfem::study::{run_study, StudyConfig, StudyResult};
use prismfem::verify::{
    local_matrix_discrepancy, p2_reproduction_residual, random_prism, reduced_matrix_factors, verify_identities,
    weak_continuity,
};

/// Reference errors at n = 4, 8, 16, 32, 64 for the Poisson example: `(H1, L2)`.
const POISSON_REFERENCE: [(usize, f64, f64); 5] = [
    (4, 4.035e2, 1.312e1),
    (8, 2.272e2, 4.394e0),
    (16, 7.840e1, 7.557e-1),
    (32, 2.142e1, 9.250e-2),
    (64, 5.480e0, 1.107e-2),
];

/// Reference errors for the biharmonic example: `(H2, H1, L2)`.
const BIHARMONIC_REFERENCE: [(usize, f64, f64, f64); 5] = [
    (4, 5.780e1, 4.523e0, 9.524e-1),
    (8, 3.254e1, 1.664e0, 3.346e-1),
    (16, 1.693e1, 4.692e-1, 9.242e-2),
    (32, 8.568e0, 1.216e-1, 2.377e-2),
    (64, 4.297e0, 3.070e-2, 5.990e-3),
];

const RANDOM_PRISMS: usize = 100;
const SEED: u64 = 42;

struct Gate {
    failures: usize,
}

impl Gate {
    fn report(&mut self, id: u32, title: &str, ok: bool, detail: String) {
        println!("[{}] {id}. {title}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn prisms(count: usize, seed: u64) -> Vec<CellFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let v = if i == 0 {
                reference_prism()
            } else {
                random_prism(&mut rng)
            };
            CellFrame::from_vertices(&v, i).unwrap()
        })
        .collect()
}

fn unisolvency(gate: &mut Gate) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for f in prisms(RANDOM_PRISMS, SEED) {
        let h1 = build_h1_basis(&f);
        for (j, phi) in h1.phi.iter().enumerate() {
            for (i, node) in h1.dof_nodes.iter().enumerate() {
                worst = worst.max((phi.value_at(&f, node) - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let h2 = build_h2_basis(&f);
        for (j, psi) in h2.psi.iter().enumerate() {
            let col = apply_dofs(
                &h2,
                |p| psi.value_at(&f, p),
                |p| psi.evaluate(&f, p, JetOrder::Gradient).gradient,
            );
            for (i, c) in col.iter().enumerate() {
                worst = worst.max((c - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    let t = start.elapsed();
    gate.report(
        1,
        "DoF matrices are the identity",
        worst <= 1e-10 && t < Duration::from_secs(5),
        format!(
            "max deviation {worst:.2e} (tol 1e-10) on {RANDOM_PRISMS} prisms in {:.2} s (limit 5 s)",
            t.as_secs_f64()
        ),
    );
}

const LEMMA_CHECKS: [&str; 6] = [
    "h1: cap remainders agree",
    "h1: cap mean quadrature",
    "h1: side-face moments",
    "h2: cap remainders agree",
    "h2: face-mean normal derivative",
    "h2: side-face derivative means",
];

fn lemma_suite(gate: &mut Gate) {
    let start = Instant::now();
    let report = verify_identities(SEED, RANDOM_PRISMS).unwrap();
    let t = start.elapsed();
    let mut worst: f64 = 0.0;
    for name in LEMMA_CHECKS {
        worst = worst.max(report.check(name).expect(name).max_residual);
    }
    gate.report(
        2,
        "face identities of both elements",
        worst <= 1e-9 && t < Duration::from_secs(30),
        format!(
            "max residual {worst:.2e} (tol 1e-9) over {} checks, {RANDOM_PRISMS} prisms x 10 functions, {:.2} s (limit 30 s)",
            LEMMA_CHECKS.len(),
            t.as_secs_f64()
        ),
    );
}

fn p2_reproduction(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for f in prisms(10, SEED + 2) {
        for kind in [ElementKind::H1, ElementKind::H2] {
            worst = worst.max(p2_reproduction_residual(&f, kind, &mut rng, 20, 50));
        }
    }
    gate.report(
        3,
        "P2 reproduction by both interpolants",
        worst <= 1e-11,
        format!("max relative error {worst:.2e} (tol 1e-11), 20 quadratics x 50 points on 10 prisms"),
    );
}

/// Worst ratio `max(got/ref, ref/got)` over the levels, or infinity when a level failed.
fn worst_ratio(result: &StudyResult, norm: &str, reference: impl Fn(usize) -> Option<f64>) -> f64 {
    let mut worst: f64 = 1.0;
    for (row, e) in result.rows.iter().zip(result.errors(norm)) {
        match (e, reference(row.n)) {
            (Some(e), Some(r)) => worst = worst.max((e / r).max(r / e)),
            _ => return f64::INFINITY,
        }
    }
    worst
}

fn last_order(result: &StudyResult, norm: &str) -> f64 {
    result.orders(norm).last().copied().flatten().unwrap_or(f64::NAN)
}

fn poisson(gate: &mut Gate) {
    let config = StudyConfig::for_problem(Problem::Poisson);
    let start = Instant::now();
    let result = run_study(&config).unwrap();
    let t = start.elapsed();
    print!("{}", result.render(prismfem::study::OutputFormat::Markdown));
    let (h1, l2) = (last_order(&result, "H1"), last_order(&result, "L2"));
    let reference = |k: usize| move |n: usize| POISSON_REFERENCE.iter().find(|r| r.0 == n).map(|r| [r.1, r.2][k]);
    let ratios = [
        worst_ratio(&result, "H1", reference(0)),
        worst_ratio(&result, "L2", reference(1)),
    ];
    let ok = result.all_solved()
        && h1 >= 1.75
        && l2 >= 2.8
        && ratios.iter().all(|&r| r <= 2.0)
        && t <= Duration::from_secs(600);
    gate.report(
        4,
        "Poisson convergence, levels 4-32",
        ok,
        format!(
            "H1 order {h1:.2} (>= 1.75), L2 order {l2:.2} (>= 2.8), worst error ratio to reference H1 {:.2} L2 {:.2} (<= 2), {:.1} s (limit 600 s)",
            ratios[0],
            ratios[1],
            t.as_secs_f64()
        ),
    );
}

fn biharmonic(gate: &mut Gate) {
    let config = StudyConfig::for_problem(Problem::Biharmonic);
    let start = Instant::now();
    let result = run_study(&config).unwrap();
    let t = start.elapsed();
    print!("{}", result.render(prismfem::study::OutputFormat::Markdown));
    let (h2, h1, l2) = (
        last_order(&result, "H2"),
        last_order(&result, "H1"),
        last_order(&result, "L2"),
    );
    let reference = |k: usize| {
        move |n: usize| {
            BIHARMONIC_REFERENCE
                .iter()
                .find(|r| r.0 == n)
                .map(|r| [r.1, r.2, r.3][k])
        }
    };
    let ratios = [
        worst_ratio(&result, "H2", reference(0)),
        worst_ratio(&result, "H1", reference(1)),
        worst_ratio(&result, "L2", reference(2)),
    ];
    let ok = result.all_solved()
        && h2 >= 0.85
        && h1 >= 1.7
        && l2 >= 1.7
        && ratios.iter().all(|&r| r <= 2.0)
        && t <= Duration::from_secs(600);
    gate.report(
        5,
        "biharmonic convergence, levels 4-16",
        ok,
        format!(
            "H2 order {h2:.2} (>= 0.85), H1 order {h1:.2} (>= 1.7), L2 order {l2:.2} (>= 1.7), worst error ratio H2 {:.2} H1 {:.2} L2 {:.2} (<= 2), {:.1} s (limit 600 s)",
            ratios[0],
            ratios[1],
            ratios[2],
            t.as_secs_f64()
        ),
    );
}

fn assembly(gate: &mut Gate) {
    let mut worst = [0.0f64; 2];
    for f in prisms(20, SEED + 3) {
        worst[0] = worst[0].max(local_matrix_discrepancy(&f, ElementKind::H1).unwrap());
        worst[1] = worst[1].max(local_matrix_discrepancy(&f, ElementKind::H2).unwrap());
    }
    let mut factored = true;
    for kind in [ElementKind::H1, ElementKind::H2] {
        for n in [2, 4] {
            factored &= reduced_matrix_factors(n, kind).unwrap();
        }
    }
    gate.report(
        6,
        "local matrices and SPD reduced systems",
        worst[0] <= 1e-8 && worst[1] <= 1e-6 && factored,
        format!(
            "oracle discrepancy H1 {:.2e} (tol 1e-8), H2 {:.2e} (tol 1e-6) on 20 prisms; Cholesky at n = 2, 4: {}",
            worst[0],
            worst[1],
            if factored { "ok" } else { "failed" }
        ),
    );
}

fn continuity(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    let mut names = 0;
    for kind in [ElementKind::H1, ElementKind::H2] {
        for c in weak_continuity(4, kind, SEED, 5).unwrap() {
            worst = worst.max(c.max_residual);
            names += 1;
        }
    }
    gate.report(
        7,
        "weak continuity of assembled functions at n = 4",
        worst <= 1e-9 && names == 4,
        format!(
            "max relative jump moment {worst:.2e} (tol 1e-9) over side and horizontal faces, 5 random functions each"
        ),
    );
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_prismfem"))
        .args(args)
        .output()
        .unwrap();
    out.stdout
}

fn determinism(gate: &mut Gate) {
    let verify = ["verify", "--seed", "42"];
    let study = ["study", "--problem", "biharmonic", "--levels", "4,8", "--format", "csv"];
    let study_cg = ["study", "--problem", "poisson", "--levels", "4,8", "--solver", "cg"];
    let mut same = true;
    let mut sizes = Vec::new();
    for args in [&verify[..], &study[..], &study_cg[..]] {
        let (a, b) = (run_cli(args), run_cli(args));
        same &= !a.is_empty() && a == b;
        sizes.push(a.len());
    }
    gate.report(
        8,
        "byte-identical repeated runs",
        same,
        format!("verify --seed 42 and two study runs repeated; output sizes {sizes:?} bytes"),
    );
}

fn main() -> ExitCode {
    let mut gate = Gate { failures: 0 };
    unisolvency(&mut gate);
    lemma_suite(&mut gate);
    p2_reproduction(&mut gate);
    poisson(&mut gate);
    biharmonic(&mut gate);
    assembly(&mut gate);
    continuity(&mut gate);
    determinism(&mut gate);
    if gate.failures == 0 {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 8 criteria FAILED", gate.failures);
        ExitCode::FAILURE
    }
}
