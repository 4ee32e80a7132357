//! `crmg`: runs the jump-coefficient sweeps and writes the condition-number
//! tables, spectra and matrix exports.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use crmg::experiment::{emit_table, run_experiment, write_table, CellStatus, ExperimentSpec, TableFormat};
use crmg::mgcycle::{MgConfig, SmootherKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Smoother {
    /// Forward Gauss-Seidel before, backward after the coarse correction
    Gs,
    /// Damped Jacobi (ω = 0.7)
    Jacobi,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

/// Condition numbers of the V-cycle preconditioned CR system over a sweep
/// of coefficient contrasts and refinement levels.
#[derive(Debug, Parser)]
#[command(name = "crmg", version)]
struct Args {
    /// Spatial dimension: 2 for (-1,1)², 3 for (0,1)³
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    dim: u8,
    /// Finest level J; levels 0..=J are run [default: 4 in 2D, 2 in 3D]
    #[arg(long)]
    levels: Option<usize>,
    /// Background coefficient values, comma separated [default: the table values]
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    eps: Option<Vec<f64>>,
    /// Pre- and post-smoothing sweeps [default: 1 in 2D, 5 in 3D]
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long, value_enum, default_value_t = Smoother::Gs)]
    smoother: Smoother,
    /// Relative residual tolerance [default: 1e-7 in 2D, 1e-12 in 3D]
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    maxit: usize,
    /// Seed for the Lanczos start vectors
    #[arg(long, default_value_t = 20240611)]
    seed: u64,
    /// Table file; the aligned table always goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of --out
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Directory for per-cell eigenvalue files
    #[arg(long)]
    dump_eigs: Option<PathBuf>,
    /// Directory for per-cell Matrix Market exports of the whole hierarchy
    #[arg(long)]
    export_matrix: Option<PathBuf>,
    /// Largest system for which --dump-eigs uses the dense oracle
    #[arg(long, default_value_t = crmg::krylov::DEFAULT_DENSE_LIMIT)]
    dense_limit: usize,
    /// Cells with more CR unknowns than this are skipped
    #[arg(long, default_value_t = crmg::experiment::DEFAULT_MAX_DOFS)]
    max_dofs: usize,
    /// Write 0 for wall_time_s so that repeated runs are byte-identical
    #[arg(long)]
    no_timing: bool,
}

fn build_spec(args: &Args) -> anyhow::Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::table_defaults(args.dim as usize)?;
    if let Some(j) = args.levels {
        spec.levels = (0..=j).collect();
    }
    if let Some(eps) = &args.eps {
        if eps.is_empty() {
            bail!("--eps needs at least one value");
        }
        spec.epsilons = eps.clone();
    }
    let sweeps = args.sweeps.unwrap_or(spec.mg.sweeps());
    let smoother = match args.smoother {
        Smoother::Gs => SmootherKind::GaussSeidel,
        Smoother::Jacobi => SmootherKind::jacobi(),
    };
    spec.mg = MgConfig::new(smoother, sweeps)?;
    if let Some(tol) = args.tol {
        spec.tol = tol;
    }
    spec.maxit = args.maxit;
    spec.seed = args.seed;
    spec.dense_limit = args.dense_limit;
    spec.max_dofs = args.max_dofs;
    spec.record_timing = !args.no_timing;
    spec.dump_eigs = args.dump_eigs.clone();
    spec.export_matrix = args.export_matrix.clone();
    spec.validate()?;
    Ok(spec)
}

fn run(args: &Args) -> anyhow::Result<bool> {
    let spec = build_spec(args)?;
    let rows = run_experiment(&spec)?;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    write_table(&rows, TableFormat::Text, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.out {
        let format = match args.format {
            Format::Csv => TableFormat::Csv,
            Format::Text => TableFormat::Text,
        };
        emit_table(&rows, format, path).with_context(|| format!("writing {}", path.display()))?;
    }

    let mut all_ok = true;
    for r in &rows {
        let why = match &r.status {
            CellStatus::Ok => continue,
            CellStatus::NotConverged => format!("PCG did not reach tol in {} iterations", spec.maxit),
            CellStatus::Skipped(s) => format!("skipped: {s}"),
            CellStatus::Failed(s) => format!("failed: {s}"),
        };
        all_ok = false;
        eprintln!("eps={:e} level={}: {why}", r.epsilon, r.level);
    }
    Ok(all_ok)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
