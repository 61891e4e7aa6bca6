//! Configuration, orchestration and reporting for the `fracsub` binary.
//!
//! A run validates an [`ExperimentConfig`](config::ExperimentConfig) for one
//! [`Command`], executes the corresponding stages and writes, under the output
//! directory, one subdirectory of CSV/SVG files per stage plus `summary.json`.

pub mod config;
pub mod error;
pub mod report;
pub mod stages;
pub mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use config::ExperimentConfig;
use error::CliError;
use report::{write_summary, RunSummary, StageDir, StageReport};
use stages::Context;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifySpecfun,
    Bump,
    Stationary,
    Evolve,
    Uniqueness,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifySpecfun => "verify-specfun",
            Command::Bump => "bump",
            Command::Stationary => "stationary",
            Command::Evolve => "evolve",
            Command::Uniqueness => "uniqueness",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output_dir` from the config.
    pub out: Option<PathBuf>,
    pub strict: bool,
    pub dump_matrix: bool,
}

/// `--out`, else `output_dir`, else `runs/<first 12 hex digits of the config hash>`.
pub fn output_root(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| Path::new("runs").join(&cfg.hash()[..12]))
}

fn stage_dir(root: &Path, name: &str) -> Result<StageDir, CliError> {
    StageDir::create(root, name)
}

/// Validates, runs every stage of `command` and writes `summary.json`.
pub fn run(command: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    cfg.validate(command)?;
    let root = output_root(cfg, opts);
    std::fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
    let ctx = Context::new(cfg)?;
    let mut reports: Vec<(&str, StageReport)> = Vec::new();

    match command {
        Command::VerifySpecfun => reports.push(("specfun", stages::specfun(cfg, &stage_dir(&root, "specfun")?)?)),
        Command::Bump => reports.push(("bump", stages::bump(&ctx, &stage_dir(&root, "bump")?)?)),
        Command::Stationary => {
            let (a, q) = (ctx.operator()?, ctx.weight()?);
            let (rep, _) = stages::stationary(&ctx, &a, &q, &stage_dir(&root, "stationary")?, opts.dump_matrix)?;
            reports.push(("stationary", rep));
        }
        Command::Evolve => {
            let (a, q) = (ctx.operator()?, ctx.weight()?);
            let (rep, pair) = stages::stationary(&ctx, &a, &q, &stage_dir(&root, "stationary")?, opts.dump_matrix)?;
            reports.push(("stationary", rep));
            reports.push(("evolve", stages::evolve(&ctx, &a, &q, &pair, &stage_dir(&root, "evolve")?)?));
        }
        Command::Uniqueness => {
            let (a, q) = (ctx.operator()?, ctx.weight()?);
            let dir = stage_dir(&root, "uniqueness")?;
            reports.push(("uniqueness", stages::uniqueness(&ctx, &a, &q, &[cfg.alpha], &dir)?));
        }
        Command::All => {
            let (a, q) = (ctx.operator()?, ctx.weight()?);
            let (left, right) = rayon::join(
                || -> Result<Vec<(&str, StageReport)>, CliError> {
                    Ok(vec![
                        ("specfun", stages::specfun(cfg, &stage_dir(&root, "specfun")?)?),
                        ("bump", stages::bump(&ctx, &stage_dir(&root, "bump")?)?),
                        (
                            "uniqueness",
                            stages::uniqueness(&ctx, &a, &q, &cfg.uniqueness.alphas, &stage_dir(&root, "uniqueness")?)?,
                        ),
                    ])
                },
                || -> Result<Vec<(&str, StageReport)>, CliError> {
                    let (rep, pair) =
                        stages::stationary(&ctx, &a, &q, &stage_dir(&root, "stationary")?, opts.dump_matrix)?;
                    let evo = stages::evolve(&ctx, &a, &q, &pair, &stage_dir(&root, "evolve")?)?;
                    Ok(vec![("stationary", rep), ("evolve", evo)])
                },
            );
            reports.extend(left?);
            reports.extend(right?);
        }
    }

    let mut summary = RunSummary {
        command: command.name().to_string(),
        config_hash: cfg.hash(),
        margins: BTreeMap::new(),
        warnings: Vec::new(),
        strict: opts.strict,
        timings: BTreeMap::new(),
    };
    for (name, rep) in reports {
        summary.timings.insert(name.to_string(), rep.seconds);
        summary.margins.extend(rep.margins);
        summary.warnings.extend(rep.warnings);
    }
    let canonical = serde_json::to_string_pretty(cfg).expect("config serializes");
    let path = root.join("config.json");
    std::fs::write(&path, canonical + "\n").map_err(|e| CliError::io(&path, e))?;
    write_summary(&root.join("summary.json"), &summary)?;
    Ok(summary)
}
