//! `netcl search`: find large-gap configurations for a frozen checkpoint
//! and emit the best one as a reusable config file.

use super::{ensure_dir, write_file, write_json};
use crate::{CliError, CliResult, SpaceArgs};
use netcl_core::curriculum::{bo_search, grid_search, random_search, BaselineGapOracle, SearchLog};
use netcl_core::eval::write_trials_csv;
use netcl_core::policy::load_checkpoint;
use netcl_core::rollout::{RuleKind, UseCaseFactory};
use netcl_core::space::SpaceFile;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Frozen policy checkpoint to measure gaps against.
    #[arg(long)]
    checkpoint: PathBuf,

    /// Rule baseline supplying the gap signal.
    #[arg(long)]
    baseline: String,

    #[command(flatten)]
    space: SpaceArgs,

    /// bo, random, or grid.
    #[arg(long, default_value = "bo")]
    method: String,

    /// Trial budget (bo and random; grid derives its own from the space).
    #[arg(long, default_value_t = 15)]
    budget: usize,

    /// Paired episodes per gap estimate.
    #[arg(long, default_value_t = 10)]
    gap_episodes: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> CliResult<()> {
    let snapshot = load_checkpoint(&args.checkpoint)?;
    let rule = RuleKind::parse(&args.baseline).map_err(|e| CliError::usage(e.to_string()))?;
    rule.check_use_case(snapshot.use_case)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let file = args.space.load(snapshot.use_case)?;
    let space = file.space()?;
    let factory = UseCaseFactory::new(snapshot.use_case);
    let oracle = BaselineGapOracle {
        rl: &snapshot,
        rule,
        factory: &factory,
        k: args.gap_episodes,
    };

    let log: SearchLog = match args.method.as_str() {
        "bo" => bo_search(&space, &oracle, args.budget, args.seed)?,
        "random" => random_search(&space, &oracle, args.budget, args.seed)?,
        "grid" => grid_search(&space, &oracle, args.seed)?,
        other => {
            return Err(CliError::usage(format!(
                "unknown method `{other}` (expected bo, random, or grid)"
            )));
        }
    };

    ensure_dir(&args.out)?;
    let best = log.best();
    let point = SpaceFile::point(&space, &best.config);
    write_file(&args.out.join("best_config.toml"), point.to_toml().as_bytes())?;
    let mut trials = Vec::new();
    write_trials_csv(&log, &mut trials)?;
    write_file(&args.out.join("trials.csv"), &trials)?;
    write_json(
        &args.out.join("search_summary.json"),
        &serde_json::json!({
            "method": args.method,
            "trials": log.trials.len(),
            "best_gap_mean": best.gap.mean,
            "best_gap_std": best.gap.std,
            "best_config": best.config.values,
            "seed": args.seed,
        }),
    )?;
    println!(
        "{} search: {} trials, best gap {:.4} -> {}",
        args.method,
        log.trials.len(),
        best.gap.mean,
        args.out.display()
    );
    Ok(())
}
