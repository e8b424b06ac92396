use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use prismfem::assembly::ElementKind;
use prismfem::mesh::{build_structured_mesh, MeshPattern};
use prismfem::problems::{finite_difference_discrepancy, registry, Problem};
use prismfem::study::{run_study, OutputFormat, SolverChoice, StudyConfig};
use prismfem::verify::verify_identities;
use prismfem::{Error, Point3, Result};

/// Convergence studies and identity checks for the 11-node prism elements.
#[derive(Parser)]
#[command(name = "prismfem", version)]
struct Cli {
    /// File of `key=value` lines using the long flag names; flags given on the
    /// command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on a sequence of meshes and print errors and orders.
    Study(StudyArgs),
    /// Check the element identities on random prisms.
    Verify(VerifyArgs),
    /// Write the structured mesh in the plain-text dump format.
    MeshDump(MeshDumpArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// h1 or h2 (default: the element matching the problem)
    #[arg(long)]
    element: Option<String>,
    /// poisson or biharmonic
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated even mesh sizes, e.g. 4,8,16
    #[arg(long)]
    levels: Option<String>,
    /// trapezoid or uniform
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long = "quad-assembly")]
    quad_assembly: Option<usize>,
    #[arg(long = "quad-load")]
    quad_load: Option<usize>,
    #[arg(long = "quad-error")]
    quad_error: Option<usize>,
    /// auto, direct or cg
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// csv or markdown
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MeshDumpArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flag values, command line first, config file second.
struct Settings {
    file: HashMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut file = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
                file.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
            }
        }
        Ok(Settings { file })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad value for {key}: {v:?}"))),
        }
    }
}

fn parse_choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T> {
    options
        .iter()
        .find(|(name, _)| name.eq_ignore_ascii_case(value))
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("{key} must be one of {}, got {value:?}", names.join("|")))
        })
}

fn mesh_pattern(s: &Settings, mesh: Option<String>, theta: Option<f64>) -> Result<MeshPattern> {
    let theta = s.get(theta, "theta")?;
    match s.get(mesh, "mesh")?.as_deref().unwrap_or("trapezoid") {
        "trapezoid" => Ok(MeshPattern::Trapezoid {
            theta: theta.unwrap_or(0.2),
        }),
        "uniform" => Ok(MeshPattern::Uniform),
        other => Err(Error::Config(format!("mesh must be trapezoid|uniform, got {other:?}"))),
    }
}

fn study_config(s: &Settings, a: StudyArgs) -> Result<(StudyConfig, Option<PathBuf>)> {
    let element = s
        .get(a.element, "element")?
        .map(|e| parse_choice("element", &e, &[("h1", ElementKind::H1), ("h2", ElementKind::H2)]))
        .transpose()?;
    let problem = match s.get(a.problem, "problem")? {
        Some(p) => parse_choice(
            "problem",
            &p,
            &[("poisson", Problem::Poisson), ("biharmonic", Problem::Biharmonic)],
        )?,
        None => match element {
            Some(ElementKind::H2) => Problem::Biharmonic,
            _ => Problem::Poisson,
        },
    };
    let mut c = StudyConfig::for_problem(problem);
    if let Some(e) = element {
        c.element = e;
    }
    if let Some(levels) = s.get(a.levels, "levels")? {
        c.levels = levels
            .split(',')
            .map(|l| l.trim().parse().map_err(|_| Error::Config(format!("bad level {l:?}"))))
            .collect::<Result<_>>()?;
    }
    c.mesh = mesh_pattern(s, a.mesh, a.theta)?;
    if let Some(d) = s.get(a.quad_assembly, "quad-assembly")? {
        c.quad.stiffness = d;
    }
    if let Some(d) = s.get(a.quad_load, "quad-load")? {
        c.quad.load = d;
    }
    if let Some(d) = s.get(a.quad_error, "quad-error")? {
        c.quad_error = d;
    }
    if let Some(m) = s.get(a.solver, "solver")? {
        c.solver = parse_choice(
            "solver",
            &m,
            &[
                ("auto", SolverChoice::Auto),
                ("direct", SolverChoice::Direct),
                ("cg", SolverChoice::Cg),
            ],
        )?;
    }
    if let Some(t) = s.get(a.tol, "tol")? {
        c.tol = t;
    }
    if let Some(f) = s.get(a.format, "format")? {
        c.format = parse_choice(
            "format",
            &f,
            &[("csv", OutputFormat::Csv), ("markdown", OutputFormat::Markdown)],
        )?;
    }
    let out = s.get(a.out.map(|p| p.display().to_string()), "out")?.map(PathBuf::from);
    Ok((c, out))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Closed-form sources checked against differences of the exact solutions.
fn self_check() -> Result<()> {
    let pts: Vec<Point3<f64>> = [0.21, 0.5, 0.73]
        .iter()
        .flat_map(|&x| [0.17, 0.62].iter().map(move |&y| Point3::new(x, y, 1.0 - y * x)))
        .collect();
    for exact in registry() {
        let d = finite_difference_discrepancy(exact, &pts);
        if d > 1e-5 {
            return Err(Error::Config(format!(
                "{} source fails its self-check ({d:.2e})",
                exact.name()
            )));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    if cfg!(debug_assertions) {
        self_check()?;
    }
    let s = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Study(a) => {
            let (config, out) = study_config(&s, a)?;
            let result = run_study(&config)?;
            for row in &result.rows {
                eprintln!(
                    "n = {:>3}: {} free DoFs, solve {:.2} s{}",
                    row.n,
                    row.dofs,
                    row.solve_seconds,
                    row.iterations.map_or(String::new(), |i| format!(", {i} CG iterations"))
                );
            }
            let mut w = output(out.as_deref())?;
            w.write_all(result.render(config.format).as_bytes())?;
            w.flush()?;
            Ok(result.all_solved())
        }
        Command::Verify(a) => {
            let trials = s.get(a.trials, "trials")?.unwrap_or(100);
            let seed = s.get(a.seed, "seed")?.unwrap_or(42);
            if trials == 0 {
                return Err(Error::Config("trials must be at least 1".into()));
            }
            let report = verify_identities(seed, trials)?;
            print!("{}", report.render());
            Ok(report.all_passed())
        }
        Command::MeshDump(a) => {
            let n = s
                .get(a.n, "n")?
                .ok_or_else(|| Error::Config("mesh-dump needs --n".into()))?;
            let pattern = mesh_pattern(&s, a.mesh, a.theta)?;
            let mesh = build_structured_mesh(n, pattern)?;
            let out = s.get(a.out.map(|p| p.display().to_string()), "out")?.map(PathBuf::from);
            let mut w = output(out.as_deref())?;
            mesh.write_dump(&mut w)?;
            w.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
