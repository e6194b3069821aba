use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcrelax_conic::SolverRegistry;
use qcrelax_core::gap::GapDenominator;
use qcrelax_cli::{
    exit, read_manifest, run_batch, run_case, settings_with_override, write_csv, write_json, RunOptions, VariantSpec,
    SOLVER_TOL_ENV,
};

/// QC relaxation bounds and optimality gaps for AC optimal power flow.
#[derive(Parser)]
#[command(name = "qcrelax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound one case with one variant.
    Run(RunArgs),
    /// Run every case of a JSON manifest under its listed variants.
    Batch(BatchArgs),
    /// List the registered conic solvers.
    Solvers,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Denominator {
    /// Divide by the relaxation bound.
    Bound,
    /// Divide by the local (AC) objective.
    Local,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Smallest bound improvement that keeps tightening sweeps going.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 10)]
    max_sweeps: usize,
    /// Solve each tightening sweep against its starting bounds, in parallel.
    #[arg(long)]
    parallel_obbt: bool,
    /// Add cost ≤ AC objective to every tightening subproblem.
    #[arg(long)]
    obbt_cutoff: bool,
    #[arg(long, default_value = "ipm")]
    solver: String,
    #[arg(long, value_enum, default_value = "bound")]
    gap_denominator: Denominator,
    /// Leave timing fields empty so reports are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Recorded in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// MATPOWER case file, or a network in JSON form (.json).
    case: PathBuf,
    /// Nested McCormick instead of Meyer–Floudas trilinear envelopes.
    #[arg(long)]
    no_mf: bool,
    /// Drop the voltage-magnitude-difference constraints.
    #[arg(long)]
    no_vdiff: bool,
    /// Skip bound tightening.
    #[arg(long)]
    no_bt: bool,
    /// Objective of a feasible AC solution, in $/hr.
    #[arg(long)]
    ac_objective: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BatchArgs {
    /// JSON list of {case, ac_objective, variants}.
    manifest: PathBuf,
    #[command(flatten)]
    common: Common,
}

fn options(common: &Common) -> anyhow::Result<RunOptions> {
    let env = std::env::var(SOLVER_TOL_ENV).ok();
    let settings = settings_with_override(env.as_deref()).map_err(anyhow::Error::msg)?;
    Ok(RunOptions {
        obbt_tol: common.tol,
        max_sweeps: common.max_sweeps,
        parallel_obbt: common.parallel_obbt,
        obbt_cutoff: common.obbt_cutoff,
        solver: common.solver.clone(),
        settings,
        gap_denominator: match common.gap_denominator {
            Denominator::Bound => GapDenominator::Bound,
            Denominator::Local => GapDenominator::Local,
        },
        timing: !common.no_timing,
        seed: common.seed,
        ..RunOptions::default()
    })
}

fn sink(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(args: RunArgs) -> anyhow::Result<i32> {
    let opts = RunOptions {
        variant: VariantSpec::new(!args.no_mf, !args.no_vdiff, !args.no_bt),
        ac_objective: args.ac_objective,
        ..options(&args.common)?
    };
    let report = match run_case(&args.case, &opts, &SolverRegistry::builtin()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(e.exit_code());
        }
    };
    let mut out = sink(&args.common.output)?;
    match args.common.format {
        Format::Json => write_json(&report, &mut out)?,
        Format::Csv => write_csv(&[report.into_row()], &mut out)?,
    }
    out.flush()?;
    Ok(exit::OK)
}

fn batch(args: BatchArgs) -> anyhow::Result<i32> {
    let opts = options(&args.common)?;
    let entries = match read_manifest(&args.manifest) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::INPUT);
        }
    };
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let rows = run_batch(&entries, base, &opts, &SolverRegistry::builtin());
    let mut out = sink(&args.common.output)?;
    match args.common.format {
        Format::Json => write_json(&rows, &mut out)?,
        Format::Csv => write_csv(&rows, &mut out)?,
    }
    out.flush()?;
    let failed: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    for row in &failed {
        eprintln!("error: {} [{}]: {}", row.case, row.variant, row.error.as_deref().unwrap_or_default());
    }
    Ok(if failed.is_empty() { exit::OK } else { exit::PARTIAL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Batch(args) => batch(args),
        Command::Solvers => {
            for name in SolverRegistry::builtin().names() {
                println!("{name}");
            }
            Ok(exit::OK)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::FAILURE as u8)
        }
    }
}
