use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracsub_cli::config::ExperimentConfig;
use fracsub_cli::error::CliError;
use fracsub_cli::{run, Command, RunOptions};

#[derive(Parser)]
#[command(name = "fracsub", version, about = "Nonuniqueness experiments for the sublinear fractional heat equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON config; defaults are used for missing keys, or entirely when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Treat warnings as failures.
    #[arg(long, global = true)]
    strict: bool,

    /// Also write the assembled operator as `operator.csv`.
    #[arg(long, global = true)]
    dump_matrix: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Special-function self-checks.
    VerifySpecfun,
    /// Bump profile, its fractional Laplacian and the subsolution scan.
    Bump,
    /// Operator checks and the stationary problem.
    Stationary,
    /// Two solutions from zero data.
    Evolve,
    /// Perturbation growth for alpha >= 1.
    Uniqueness,
    /// Every stage.
    All,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::VerifySpecfun => Command::VerifySpecfun,
            Cmd::Bump => Command::Bump,
            Cmd::Stationary => Command::Stationary,
            Cmd::Evolve => Command::Evolve,
            Cmd::Uniqueness => Command::Uniqueness,
            Cmd::All => Command::All,
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let opts = RunOptions {
        out: cli.out.clone(),
        strict: cli.strict,
        dump_matrix: cli.dump_matrix,
    };
    let summary = run(cli.command.into(), &cfg, &opts)?;
    for (name, m) in &summary.margins {
        let tag = if m.pass { "ok  " } else { "FAIL" };
        println!("{tag} {name:<40} {:>12.4e}  (budget {:.4e})", m.value, m.budget);
    }
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    let failures = summary.failures();
    if !failures.is_empty() {
        eprintln!("{} margin(s) failed: {}", failures.len(), failures.join(", "));
    }
    if summary.strict && !summary.warnings.is_empty() {
        eprintln!("--strict: {} warning(s) treated as failures", summary.warnings.len());
    }
    Ok(summary.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
