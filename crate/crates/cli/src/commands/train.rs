//! `netcl train`: run the selected curriculum end to end and persist the
//! checkpoint, learning curve, and curriculum log.

use super::{ensure_dir, write_file, write_json};
use crate::config::RunConfigFile;
use crate::{CliError, CliResult};
use netcl_core::curriculum::{
    cl1_train, cl2_train, cl3_train, genet_train_baseline, CurriculumLog, CurriculumMode,
};
use netcl_core::eval::write_curve_csv;
use netcl_core::policy::{
    load_checkpoint, save_checkpoint, train_uniform, IterationStat, PolicySnapshot,
};
use netcl_core::rollout::arch_for;
use netcl_core::space::SpaceFile;
use netcl_core::ConfigDistribution;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Run-configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Continue from an existing checkpoint instead of a fresh policy.
    #[arg(long)]
    resume: Option<PathBuf>,

    /// Override the config file's seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the config file's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    let file = RunConfigFile::load(&args.config)?;
    let config_dir = args
        .config
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_default();
    let mut run = file.resolve(&config_dir)?;
    if let Some(seed) = args.seed {
        run.seed = seed;
        run.train_spec.seed = seed;
    }
    if let Some(out) = args.out {
        run.out_dir = out;
    }
    ensure_dir(&run.out_dir)?;

    let snapshot = match &args.resume {
        Some(path) => {
            let snap = load_checkpoint(path)?;
            if snap.use_case != run.use_case {
                return Err(CliError::usage(format!(
                    "checkpoint is for {}, config says {}",
                    snap.use_case, run.use_case
                )));
            }
            snap
        }
        None => PolicySnapshot::new_random(run.use_case, arch_for(run.use_case), run.seed),
    };

    let space = run.space_file.space()?;
    let (trained, curve, log): (PolicySnapshot, Vec<IterationStat>, Option<CurriculumLog>) =
        match run.mode {
            CurriculumMode::Uniform => {
                let dist = ConfigDistribution::uniform(space.clone());
                let (snap, curve) =
                    train_uniform(&dist, &snapshot, &run.train_spec, &run.factory)?;
                (snap, curve, None)
            }
            CurriculumMode::Genet => {
                let (snap, log) = genet_train_baseline(
                    &space,
                    &snapshot,
                    &run.train_spec,
                    &run.curriculum_spec,
                    &run.factory,
                    run.baseline,
                )?;
                (snap, log.full_curve(), Some(log))
            }
            CurriculumMode::Cl1 => {
                let (snap, log) = cl1_train(
                    &space,
                    &snapshot,
                    &run.train_spec,
                    &run.curriculum_spec,
                    &run.factory,
                )?;
                (snap, log.full_curve(), Some(log))
            }
            CurriculumMode::Cl2 => {
                let (snap, log) = cl2_train(
                    &space,
                    &snapshot,
                    &run.train_spec,
                    &run.curriculum_spec,
                    &run.factory,
                    run.baseline,
                )?;
                (snap, log.full_curve(), Some(log))
            }
            CurriculumMode::Cl3 => {
                let (snap, log) = cl3_train(
                    &space,
                    &snapshot,
                    &run.train_spec,
                    &run.curriculum_spec,
                    &run.factory,
                )?;
                (snap, log.full_curve(), Some(log))
            }
        };

    save_checkpoint(&trained, &run.out_dir.join("checkpoint.bin"))?;
    let mut curve_bytes = Vec::new();
    write_curve_csv(&curve, &mut curve_bytes)?;
    write_file(&run.out_dir.join("curve.csv"), &curve_bytes)?;

    if let Some(log) = &log {
        let json = serde_json::to_value(log).expect("log serializes");
        write_json(&run.out_dir.join("curriculum.json"), &json)?;
        for (r, cfg) in log.promoted_configs().iter().enumerate() {
            let point = SpaceFile::point(&space, cfg);
            write_file(
                &run.out_dir.join(format!("promoted_round_{r}.toml")),
                point.to_toml().as_bytes(),
            )?;
        }
    }

    let summary = serde_json::json!({
        "mode": run.mode.as_str(),
        "use_case": run.use_case.as_str(),
        "baseline": run.baseline.as_str(),
        "seed": run.seed,
        "iterations": trained.iteration,
        "final_mean_reward": curve.last().map(|c| c.mean_reward),
        "rounds": log.as_ref().map(|l| l.rounds.len()),
    });
    write_json(&run.out_dir.join("train_summary.json"), &summary)?;
    println!(
        "trained {} ({}) for {} iterations -> {}",
        run.use_case,
        run.mode.as_str(),
        trained.iteration,
        run.out_dir.display()
    );
    Ok(())
}
