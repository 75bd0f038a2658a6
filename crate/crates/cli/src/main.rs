use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use couple_core::coupling::{
    dirichlet_exchange_demo, schwarz_solve, solve_monolithic, Convergence, CoupledField, ConvergenceReport,
};
use couple_core::io::config::{Format, Mode};
use couple_core::io::csv::{fmt_f64, history_rows, trace_rows, write_csv, HISTORY_HEADER, TRACE_HEADER};
use couple_core::io::{write_sweep_csv, write_vtk, FieldExport};
use couple_core::verification::{energy_residual, jump_norm, w_norm};
use couple_core::{parse_config, run_alpha_sweep, validate_mesh, Discretization, InterfaceCoupling, RunConfig, SweepSettings};

/// Environment variable overriding `output.directory`.
const OUT_DIR_ENV: &str = "COUPLE_OUT_DIR";

#[derive(Parser)]
#[command(name = "couple", version, about = "Two-layer periodic Stokes flow with friction or continuity coupling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve with the configured coupling mode and write field and report files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// monolithic-friction | monolithic-continuity | schwarz | dirichlet-demo
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Monolithic and Schwarz solves over a list of friction coefficients.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated, strictly ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        /// Worker threads for independent alphas.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check the configuration and the generated mesh without solving.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Dirichlet trace exchange, showing that the interface trace never changes.
    DemoStagnation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        steps: usize,
    },
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| cfg.output.directory.clone(), PathBuf::from);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn discretize(cfg: &RunConfig) -> Result<Discretization> {
    let disc = cfg.discretization()?;
    let violations = validate_mesh(&disc.mesh);
    if let Some(v) = violations.first() {
        bail!("mesh check failed ({} violations), first: {}", violations.len(), v.message);
    }
    Ok(disc)
}

const REPORT_HEADER: [&str; 8] = [
    "mode",
    "alpha",
    "n_iterations",
    "converged",
    "w_norm",
    "jump_l2",
    "energy_residual",
    "solver_residual",
];

struct Summary {
    iterations: usize,
    converged: bool,
    solver_residual: Option<f64>,
}

fn write_outputs(cfg: &RunConfig, dir: &Path, disc: &Discretization, field: &CoupledField, summary: &Summary) -> Result<()> {
    let alpha = field.alpha_used;
    let w = w_norm(field, disc)?;
    let jump = jump_norm(field, disc)?;
    let energy = energy_residual(field, disc, alpha)?;
    println!(
        "mode={} alpha={} iterations={} converged={} |U|_W={w:.6e} jump={jump:.6e} energy_residual={energy:.3e}",
        cfg.coupling.mode, alpha, summary.iterations, summary.converged
    );
    if cfg.wants(Format::Csv) {
        let row = vec![
            cfg.coupling.mode.to_string(),
            alpha.finite().map_or_else(|| "inf".into(), fmt_f64),
            summary.iterations.to_string(),
            u8::from(summary.converged).to_string(),
            fmt_f64(w),
            fmt_f64(jump),
            fmt_f64(energy),
            summary.solver_residual.map_or_else(String::new, fmt_f64),
        ];
        write_csv(&dir.join("report.csv"), &REPORT_HEADER, [row])?;
    }
    if cfg.wants(Format::Vtk) {
        write_vtk(&FieldExport::from_field(disc, field), &dir.join("field.vtk"))?;
    }
    Ok(())
}

fn run_demo(cfg: &RunConfig, disc: &Discretization, dir: &Path, steps: usize) -> Result<()> {
    let history = dirichlet_exchange_demo(disc, steps, None)?;
    println!(
        "dirichlet exchange: {} half-steps, max trace change after step 1 = {:.3e}",
        history.traces.len(),
        history.max_drift()
    );
    if cfg.wants(Format::Csv) {
        write_csv(&dir.join("traces.csv"), &TRACE_HEADER, trace_rows(&history, disc))?;
    }
    if cfg.wants(Format::Vtk) {
        write_vtk(&FieldExport::from_field(disc, &history.field), &dir.join("field.vtk"))?;
    }
    Ok(())
}

fn cmd_run(config: &Path, mode: Option<String>, alpha: Option<f64>) -> Result<()> {
    let mut cfg = load(config)?;
    if let Some(m) = mode {
        cfg.coupling.mode = m.parse::<Mode>()?;
    }
    if let Some(a) = alpha {
        cfg.coupling.alpha = a;
    }
    cfg.validate()?;
    let disc = discretize(&cfg)?;
    let dir = output_dir(&cfg)?;
    match cfg.coupling.mode {
        Mode::MonolithicFriction | Mode::MonolithicContinuity => {
            let coupling = if cfg.coupling.mode == Mode::MonolithicFriction {
                InterfaceCoupling::Friction(cfg.coupling.alpha)
            } else {
                InterfaceCoupling::Continuity
            };
            let (field, report) = solve_monolithic(&disc, coupling)?;
            let summary = Summary {
                iterations: 0,
                converged: true,
                solver_residual: Some(report.relative_residual),
            };
            write_outputs(&cfg, &dir, &disc, &field, &summary)
        }
        Mode::Schwarz => {
            let (field, report) = schwarz_solve(&disc, &cfg.schwarz_config())?;
            report_schwarz(&report);
            if cfg.wants(Format::Csv) {
                write_csv(&dir.join("convergence.csv"), &HISTORY_HEADER, history_rows(&report))?;
            }
            let summary = Summary {
                iterations: report.iterations.len(),
                converged: report.convergence != Convergence::DidNotConverge,
                solver_residual: None,
            };
            write_outputs(&cfg, &dir, &disc, &field, &summary)
        }
        Mode::DirichletDemo => run_demo(&cfg, &disc, &dir, 4),
    }
}

fn report_schwarz(report: &ConvergenceReport) {
    match report.convergence {
        Convergence::Converged(n) => println!("schwarz converged after {n} iterations"),
        Convergence::DidNotConverge => println!(
            "schwarz did not converge in {} iterations (last increment {:.3e})",
            report.iterations.len(),
            report.final_increment().unwrap_or(f64::NAN)
        ),
    }
}

fn cmd_sweep(config: &Path, alphas: Vec<f64>, jobs: Option<usize>) -> Result<()> {
    let cfg = load(config)?;
    if alphas.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        bail!("validation error: alphas: alphas ascending");
    }
    let disc = discretize(&cfg)?;
    let dir = output_dir(&cfg)?;
    let settings = SweepSettings {
        tol_increment: cfg.schwarz.tol,
        max_iter: cfg.schwarz.max_iter,
        jobs,
    };
    let result = run_alpha_sweep(&disc, &alphas, &settings)?;
    for row in &result.rows {
        match &row.error {
            Some(e) => println!("alpha={:e} failed: {e}", row.alpha),
            None => println!(
                "alpha={:e} n={} converged={} w_dist={:.3e} jump={:.3e}",
                row.alpha,
                row.n_iterations.unwrap_or(row.iterations_run),
                row.converged(),
                row.w_dist_to_continuity,
                row.jump_l2
            ),
        }
    }
    let path = dir.join("sweep.csv");
    write_sweep_csv(&path, &result)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_validate(config: &Path) -> Result<()> {
    let cfg = load(config)?;
    let mesh = cfg.build_mesh()?;
    let violations = validate_mesh(&mesh);
    for v in &violations {
        println!("{:?} #{}: {}", v.invariant, v.index, v.message);
    }
    if !violations.is_empty() {
        bail!("{} mesh invariant violations", violations.len());
    }
    println!(
        "config ok: mode={} alpha={:e}; mesh ok: {} vertices, {} triangles",
        cfg.coupling.mode,
        cfg.coupling.alpha,
        mesh.n_vertices(),
        mesh.n_triangles()
    );
    Ok(())
}

fn cmd_demo(config: &Path, steps: usize) -> Result<()> {
    let cfg = load(config)?;
    let disc = discretize(&cfg)?;
    let dir = output_dir(&cfg)?;
    run_demo(&cfg, &disc, &dir, steps)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, mode, alpha } => cmd_run(&config, mode, alpha),
        Command::Sweep { config, alphas, jobs } => cmd_sweep(&config, alphas, jobs),
        Command::Validate { config } => cmd_validate(&config),
        Command::DemoStagnation { config, steps } => cmd_demo(&config, steps),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
