//! `mimetic`: solve, converge and self-check the mimetic spectral element
//! Stokes discretization.

mod check;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mimetic_core::analysis::{convergence_study, error_norms};
use mimetic_core::assembly::assemble_stokes;
use mimetic_core::mimetic::Discretization;
use mimetic_core::solver::{solve_system, Sample};
use mimetic_core::topology::MeshSpec;

use config::{ConvergeConfig, Flags, SolveConfig, UsageError};
use output::{DofCounts, ErrorSummary, Summary, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "mimetic", version, about = "Mimetic spectral element Stokes solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case and write summary.json, fields.csv and fields.vtk.
    Solve(CommonArgs),
    /// Run an h-convergence sweep and write errors.csv.
    Converge(CommonArgs),
    /// Verify the discrete identities; exits 1 if any check fails.
    Check {
        /// Corrupt one sign of the divergence matrix before checking.
        #[arg(long, hide = true)]
        inject_div_sign_flip: bool,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// lid2d, lid3d, manufactured2d, trig2d or trig3d.
    #[arg(long)]
    case: Option<String>,
    /// Elements per direction (a comma-separated list for `converge`).
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    elements: Option<Vec<usize>>,
    /// Polynomial degree N.
    #[arg(long)]
    degree: Option<usize>,
    /// Comma-separated degrees for `converge`.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    degrees: Option<Vec<usize>>,
    /// Sampling intervals per direction (the grid has one more point).
    #[arg(long)]
    resolution: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use degree 8 for the lid-driven cases.
    #[arg(long)]
    paper_size: bool,
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl From<CommonArgs> for Flags {
    fn from(a: CommonArgs) -> Self {
        Flags {
            case: a.case,
            elements: a.elements,
            degree: a.degree,
            degrees: a.degrees,
            resolution: a.resolution,
            out: a.out,
            paper_size: a.paper_size,
            config: a.config,
        }
    }
}

enum Failure {
    Usage(UsageError),
    Compute(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<mimetic_core::Error> for Failure {
    fn from(e: mimetic_core::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(format!("i/o error: {e}"))
    }
}

fn configure_threads() -> Result<(), UsageError> {
    let Ok(value) = std::env::var("MIMETIC_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| UsageError(format!("MIMETIC_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| UsageError(format!("cannot size thread pool: {e}")))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| Failure::Compute(format!("cannot create {}: {e}", path.display())))
}

fn cmd_solve(cfg: SolveConfig) -> Result<(), Failure> {
    let dim = cfg.case.dim();
    let spec = MeshSpec::unit(dim, cfg.elements, cfg.degree)?;
    let disc = Discretization::new(spec)?;
    let problem = cfg.case.problem();
    let system = assemble_stokes(&disc, &problem)?;
    let sol = solve_system(&disc, &system)?;

    let samples = sol.sample_grid(cfg.resolution)?;
    let speed = |s: &Sample| s.velocity.iter().map(|v| v * v).sum::<f64>().sqrt();
    let max_velocity = samples.iter().map(speed).fold(0.0, f64::max);
    let max_div = samples.iter().map(|s| s.divergence.abs()).fold(0.0, f64::max);
    let max_div_cochain = sol.divergence_cochain().max_abs();
    let divergence_free = max_div <= 1e-10 * max_velocity && max_div_cochain <= 1e-10 * sol.velocity.max_abs();
    let errors = match cfg.case.exact() {
        Some(exact) => {
            let e = error_norms(&sol, &*exact)?;
            Some(ErrorSummary {
                omega_l2: e.omega_l2,
                omega_hcurl: e.omega_hcurl,
                u_l2: e.u_l2,
                u_hdiv: e.u_hdiv,
                p_l2: e.p_l2,
            })
        }
        None => None,
    };

    create_dir(&cfg.out)?;
    let points = cfg.resolution + 1;
    let mut shape = [1; 3];
    let mut spacing = [1.0; 3];
    for d in 0..dim {
        shape[d] = points;
        spacing[d] = 1.0 / cfg.resolution as f64;
    }
    std::fs::write(cfg.out.join("fields.csv"), output::fields_csv(dim, &samples, None))?;
    std::fs::write(
        cfg.out.join("fields.vtk"),
        output::fields_vtk(dim, shape, [0.0; 3], spacing, &samples),
    )?;

    let slices_y = if dim == 3 { vec![0.1, 0.5, 0.9] } else { Vec::new() };
    if dim == 3 {
        let mut all = Vec::new();
        let mut ys = Vec::new();
        for &y in &slices_y {
            let s = sol.sample_plane(1, y, cfg.resolution)?;
            ys.extend(std::iter::repeat_n(y, s.len()));
            all.extend(s);
        }
        std::fs::write(
            cfg.out.join("slices.csv"),
            output::fields_csv(dim, &all, Some(("slice_y", &ys))),
        )?;
    }

    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        case: cfg.case.name().into(),
        dim,
        elements: cfg.elements,
        degree: cfg.degree,
        resolution: cfg.resolution,
        dofs: DofCounts {
            vorticity: system.n_vorticity(),
            velocity: sol.velocity.values().len(),
            velocity_free: system.n_free(),
            pressure: system.n_pressure(),
            unknowns: system.size(),
        },
        backward_error: sol.backward_error,
        gauge_multiplier: sol.multiplier,
        max_div_cochain,
        max_div,
        max_velocity,
        divergence_free,
        errors,
        slices_y,
    };
    output::write_summary(&cfg.out.join("summary.json"), &summary)?;
    println!(
        "{} K={} N={}: {} unknowns, max|div u_h| = {:.2e}, max|u_h| = {:.4}, output in {}",
        cfg.case,
        cfg.elements,
        cfg.degree,
        system.size(),
        max_div,
        max_velocity,
        cfg.out.display()
    );
    Ok(())
}

fn cmd_converge(cfg: ConvergeConfig) -> Result<(), Failure> {
    let exact = cfg.case.exact().expect("validated to have an exact solution");
    let dim = exact.dim();
    let table = convergence_study(exact, &cfg.degrees, &cfg.elements);
    create_dir(&cfg.out)?;
    let csv = output::errors_csv(dim, &table);
    std::fs::write(cfg.out.join("errors.csv"), &csv)?;
    print!("{csv}");
    if table.rows.is_empty() {
        return Err(Failure::Compute("every mesh of the sweep failed".into()));
    }
    Ok(())
}

fn cmd_check(flip: bool) -> bool {
    let lines = check::run(flip);
    for l in &lines {
        println!("{} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
    }
    lines.iter().all(|l| l.pass)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Solve(args) => cmd_solve(SolveConfig::resolve(&args.into())?).map(|_| true),
        Command::Converge(args) => cmd_converge(ConvergeConfig::resolve(&args.into())?).map(|_| true),
        Command::Check { inject_div_sign_flip } => Ok(cmd_check(inject_div_sign_flip)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
