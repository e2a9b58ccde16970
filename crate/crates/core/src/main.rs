use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use helmholtz_iga::harness::commands::{self, Outcome, SPECTRUM_CAP};
use helmholtz_iga::harness::{ExperimentConfig, Format, PreconditionerConfig};
use helmholtz_iga::problems::ProblemId;
use helmholtz_iga::Result;

#[derive(Parser)]
#[command(name = "helmholtz-iga", version, about = "Isogeometric Helmholtz solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Result file format.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    /// Skip runs whose system is larger than this (spectra: dense cap).
    #[arg(long, global = true)]
    max_n: Option<usize>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// One preconditioned solve, given inline or as the first cell of a config.
    Solve(SolveArgs),
    /// Iteration-count sweep from a config, compared against its golden table.
    Table,
    /// Dense spectra of preconditioned operators.
    Spectrum,
    /// Discretization error under refinement or at fixed kh.
    Convergence,
    /// Compare a results file against a golden table.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "mp1b")]
    problem: ProblemId,
    #[arg(long, default_value_t = 100.0)]
    k: f64,
    #[arg(long, default_value_t = 2)]
    p: usize,
    /// Preconditioner tag: none, D, D_eps, C_ex, DC_MG, Deps_C_MG.
    #[arg(long, default_value = "Deps_C_MG")]
    precond: String,
    /// Shift, e.g. 1, 4.2, 1/k, 1/(3k).
    #[arg(long)]
    beta2: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    nu: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, default_value_t = 0.625)]
    kh: f64,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_it: usize,
}

#[derive(Args)]
struct CompareArgs {
    /// Results file written by `table` (csv or json).
    #[arg(long)]
    results: PathBuf,
    /// Golden table; defaults to the one named in --config.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Allowed iteration difference; defaults to the config's or 2.
    #[arg(long)]
    tolerance: Option<u32>,
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| helmholtz_iga::Error::InvalidArgument("--config is required for this command".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if common.max_n.is_some() {
        cfg.max_n = common.max_n;
    }
    Ok(cfg)
}

fn inline_config(args: &SolveArgs, max_n: Option<usize>) -> Result<ExperimentConfig> {
    let tag = args.precond.parse()?;
    let mut pc = PreconditionerConfig::new(&args.precond, tag);
    if let Some(b) = &args.beta2 {
        pc.beta2 = b.parse()?;
    }
    pc.epsilon = args.epsilon.unwrap_or(pc.epsilon);
    pc.cycles = args.cycles.unwrap_or(pc.cycles);
    pc.nu = args.nu.unwrap_or(pc.nu);
    pc.omega = args.omega.unwrap_or(pc.omega);
    Ok(ExperimentConfig {
        name: format!("solve-{}-{}-p{}-k{}", args.problem, args.precond, args.p, args.k),
        problem: args.problem,
        ks: vec![args.k],
        ps: vec![args.p],
        kh: vec![args.kh],
        tol: args.tol,
        max_it: args.max_it,
        max_n,
        preconditioners: vec![pc],
        ..ExperimentConfig::default()
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    match &cli.command {
        Command::Solve(args) => {
            let cfg = match &c.config {
                Some(_) => {
                    let mut cfg = load(c)?;
                    cfg.ks.truncate(1);
                    cfg.ps.truncate(1);
                    cfg
                }
                None => inline_config(args, c.max_n)?,
            };
            commands::solve(&cfg, c.out.as_deref(), c.format)
        }
        Command::Table => commands::table(&load(c)?, &out, c.format),
        Command::Spectrum => commands::spectrum(&load(c)?, &out, c.max_n.unwrap_or(SPECTRUM_CAP)),
        Command::Convergence => commands::convergence(&load(c)?, &out),
        Command::Compare(args) => {
            let cfg = c.config.as_ref().map(|_| load(c)).transpose()?;
            let reference = args
                .reference
                .clone()
                .or_else(|| cfg.as_ref().and_then(|cfg| cfg.reference.clone()))
                .ok_or_else(|| helmholtz_iga::Error::InvalidArgument("no golden table: pass --reference or --config".into()))?;
            let tolerance = args.tolerance.or(cfg.map(|cfg| cfg.tolerance)).unwrap_or(2);
            commands::compare(&args.results, &reference, tolerance, c.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for golden mismatches.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for path in &outcome.written {
                eprintln!("wrote {}", path.display());
            }
            if outcome.golden_failed {
                eprintln!("golden table mismatch");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
