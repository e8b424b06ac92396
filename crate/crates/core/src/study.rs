//! Convergence studies: solve on a sequence of meshes and tabulate errors and orders.

use std::fmt::Write as _;
use std::time::Instant;

use crate::assembly::{assemble, ElementKind, QuadDegrees};
use crate::frame::compute_frames;
use crate::mesh::{build_structured_mesh, MeshPattern};
use crate::norms::{convergence_orders, error_norms, ErrorNorms};
use crate::problems::Problem;
use crate::solver::{solve_spd, SolverMethod};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    /// Direct for `n ≤ 16`, CG above.
    Auto,
    Direct,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub element: ElementKind,
    pub problem: Problem,
    pub levels: Vec<usize>,
    pub mesh: MeshPattern,
    pub quad: QuadDegrees,
    pub quad_error: usize,
    pub solver: SolverChoice,
    pub tol: f64,
    pub format: OutputFormat,
}

impl StudyConfig {
    /// Defaults for a problem: its matching element and the usual levels.
    pub fn for_problem(problem: Problem) -> Self {
        let (element, levels) = match problem {
            Problem::Poisson => (ElementKind::H1, vec![4, 8, 16, 32]),
            Problem::Biharmonic => (ElementKind::H2, vec![4, 8, 16]),
        };
        StudyConfig {
            element,
            problem,
            levels,
            mesh: MeshPattern::default(),
            quad: QuadDegrees::default(),
            quad_error: 8,
            solver: SolverChoice::Auto,
            tol: 1e-12,
            format: OutputFormat::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.element.order() != self.problem.exact().order() {
            return Err(Error::ElementOrderMismatch {
                kind: self.element,
                order: self.problem.exact().order(),
            });
        }
        if self.levels.is_empty() {
            return Err(Error::Config("no levels given".into()));
        }
        if let Some(n) = self.levels.iter().find(|&&n| n == 0 || n % 2 != 0) {
            return Err(Error::Config(format!("levels must be positive and even, got {n}")));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn method_for(&self, n: usize) -> SolverMethod {
        match self.solver {
            SolverChoice::Direct => SolverMethod::Direct,
            SolverChoice::Cg => SolverMethod::cg(self.tol),
            SolverChoice::Auto if n <= 16 => SolverMethod::Direct,
            SolverChoice::Auto => SolverMethod::cg(self.tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub n: usize,
    /// Number of free DoFs.
    pub dofs: usize,
    pub errors: Option<ErrorNorms>,
    /// Why the level has no errors.
    pub failure: Option<String>,
    pub solve_seconds: f64,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub rows: Vec<LevelRow>,
}

/// Column of the table: a named norm and how to read it from [`ErrorNorms`].
type NormColumn = (&'static str, fn(&ErrorNorms) -> Option<f64>);

const H1_COLUMNS: [NormColumn; 2] = [("H1", |e| Some(e.h1)), ("L2", |e| Some(e.l2))];
const H2_COLUMNS: [NormColumn; 3] = [("H2", |e| e.h2), ("H1", |e| Some(e.h1)), ("L2", |e| Some(e.l2))];

impl StudyResult {
    pub fn all_solved(&self) -> bool {
        self.rows.iter().all(|r| r.errors.is_some())
    }

    fn columns(&self) -> &'static [NormColumn] {
        match self.config.element {
            ElementKind::H1 => &H1_COLUMNS,
            ElementKind::H2 => &H2_COLUMNS,
        }
    }

    /// Errors in `norm` ("L2", "H1" or "H2"), `None` for failed levels.
    pub fn errors(&self, norm: &str) -> Vec<Option<f64>> {
        let Some((_, get)) = self.columns().iter().find(|(name, _)| *name == norm) else {
            return vec![None; self.rows.len()];
        };
        self.rows.iter().map(|r| r.errors.as_ref().and_then(get)).collect()
    }

    /// Order between each row and the previous one; `None` in the first row and
    /// next to failed levels.
    pub fn orders(&self, norm: &str) -> Vec<Option<f64>> {
        let errs = self.errors(norm);
        let mut out = vec![None];
        for w in errs.windows(2) {
            out.push(match (w[0], w[1]) {
                (Some(a), Some(b)) => convergence_orders(&[a, b]).ok().map(|o| o[0]),
                _ => None,
            });
        }
        out.truncate(errs.len());
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let cols = self.columns();
        let mut header = vec!["n".to_string(), "dofs".to_string()];
        for (name, _) in cols {
            header.push(format!("{name} error"));
            header.push("order".to_string());
        }
        header.push("status".to_string());

        let per_norm: Vec<(Vec<Option<f64>>, Vec<Option<f64>>)> = cols
            .iter()
            .map(|(name, _)| (self.errors(name), self.orders(name)))
            .collect();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut cells = vec![row.n.to_string(), row.dofs.to_string()];
                for (errs, ords) in &per_norm {
                    cells.push(errs[i].map_or("-".into(), format_error));
                    cells.push(ords[i].map_or("-".into(), |o| format!("{o:.2}")));
                }
                cells.push(match &row.failure {
                    None => "ok".into(),
                    Some(msg) => format!("failed: {msg}"),
                });
                cells
            })
            .collect();

        let mut out = String::new();
        match format {
            OutputFormat::Csv => {
                let line = |cells: &[String]| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
                writeln!(out, "{}", line(&header)).unwrap();
                for cells in &body {
                    writeln!(out, "{}", line(cells)).unwrap();
                }
            }
            OutputFormat::Markdown => {
                writeln!(out, "| {} |", header.join(" | ")).unwrap();
                writeln!(out, "|{}", "---|".repeat(header.len())).unwrap();
                for cells in &body {
                    writeln!(out, "| {} |", cells.join(" | ")).unwrap();
                }
            }
        }
        out
    }
}

/// Four significant digits, e.g. `2.142E1`.
pub fn format_error(e: f64) -> String {
    format!("{e:.3E}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Solves one level. Errors abort only this level.
pub fn run_level(config: &StudyConfig, n: usize) -> Result<LevelRow> {
    let exact = config.problem.exact();
    let mesh = build_structured_mesh(n, config.mesh)?;
    let frames = compute_frames(&mesh)?;
    let system = assemble(
        &mesh,
        &frames,
        config.element,
        exact.order(),
        &|p| exact.source(p),
        config.quad,
    )?;
    let dofs = system.dof_map.n_free;
    let start = Instant::now();
    let solution = solve_spd(&system, config.method_for(n))?;
    let solve_seconds = start.elapsed().as_secs_f64();
    let errors = error_norms(
        &frames,
        &solution.dof_map,
        &solution.global_coefficients(),
        exact,
        config.quad_error,
    )?;
    Ok(LevelRow {
        n,
        dofs,
        errors: Some(errors),
        failure: None,
        solve_seconds,
        iterations: solution.iterations,
    })
}

/// Runs every level in order. Only an invalid configuration is an error; a failed
/// level becomes a row with a diagnostic.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let rows = config
        .levels
        .iter()
        .map(|&n| {
            run_level(config, n).unwrap_or_else(|e| LevelRow {
                n,
                dofs: 0,
                errors: None,
                failure: Some(e.to_string()),
                solve_seconds: 0.0,
                iterations: None,
            })
        })
        .collect();
    Ok(StudyResult {
        config: config.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_format_matches_four_digits() {
        assert_eq!(format_error(21.42), "2.142E1");
        assert_eq!(format_error(0.7557), "7.557E-1");
        assert_eq!(format_error(403.5), "4.035E2");
    }

    #[test]
    fn incompatible_element_is_rejected() {
        let mut c = StudyConfig::for_problem(Problem::Poisson);
        c.element = ElementKind::H2;
        assert!(matches!(run_study(&c), Err(Error::ElementOrderMismatch { .. })));
        let mut c = StudyConfig::for_problem(Problem::Poisson);
        c.levels = vec![4, 5];
        assert!(matches!(run_study(&c), Err(Error::Config(_))));
    }

    #[test]
    fn two_levels_give_two_rows_and_one_order() {
        let mut c = StudyConfig::for_problem(Problem::Poisson);
        c.levels = vec![2, 4];
        let r = run_study(&c).unwrap();
        assert_eq!(r.rows.len(), 2);
        for norm in ["H1", "L2"] {
            let o = r.orders(norm);
            assert_eq!(o.iter().filter(|o| o.is_some()).count(), 1);
        }
        let csv = r.render(OutputFormat::Csv);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("n,dofs,H1 error,order,L2 error,order,status"));
    }

    #[test]
    fn failed_level_is_reported_in_its_row() {
        let mut c = StudyConfig::for_problem(Problem::Biharmonic);
        c.levels = vec![2];
        c.quad.stiffness = 20;
        let r = run_study(&c).unwrap();
        assert!(!r.all_solved());
        assert!(r
            .render(OutputFormat::Markdown)
            .contains("failed: unsupported quadrature degree 20"));
    }
}
