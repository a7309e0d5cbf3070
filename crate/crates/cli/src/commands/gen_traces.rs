//! `netcl gen-traces`: write synthetic trace files plus a manifest
//! recording the generating config and seeds.

use super::{ensure_dir, write_file, write_json};
use crate::{CliResult, SpaceArgs};
use netcl_core::rng::{child_rng, child_seed};
use netcl_core::trace::{
    gen_abr_trace, gen_cc_trace, gen_lb_trace, write_bandwidth_trace, write_job_trace,
};
use netcl_core::{EnvConfig, UseCase};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// abr, cc, or lb.
    #[arg(long)]
    use_case: String,

    #[command(flatten)]
    space: SpaceArgs,

    /// Number of trace files to write.
    #[arg(long, default_value_t = 10)]
    count: usize,

    /// Sample a fresh config per trace instead of using the defaults.
    #[arg(long)]
    sample: bool,

    /// CC trace duration in seconds.
    #[arg(long, default_value_t = 30.0)]
    duration: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> CliResult<()> {
    let use_case = UseCase::parse(&args.use_case).map_err(|e| crate::CliError::usage(e.to_string()))?;
    let file = args.space.load(use_case)?;
    let space = file.space()?;
    let defaults = file.default_config()?;
    ensure_dir(&args.out)?;

    let mut configs: Vec<EnvConfig> = Vec::with_capacity(args.count);
    let mut names: Vec<String> = Vec::with_capacity(args.count);
    for i in 0..args.count {
        let cfg = if args.sample {
            let mut rng = child_rng(args.seed, &[0x02, i as u64]);
            space.sample(&mut rng)
        } else {
            defaults.clone()
        };
        let mut rng = child_rng(child_seed(args.seed, &[0x01, i as u64]), &[]);
        let mut buf = Vec::new();
        match use_case {
            UseCase::Abr => write_bandwidth_trace(&gen_abr_trace(&cfg, &mut rng)?, &mut buf)?,
            UseCase::Cc => {
                let (trace, _) = gen_cc_trace(&cfg, args.duration, &mut rng)?;
                write_bandwidth_trace(&trace, &mut buf)?;
            }
            UseCase::Lb => write_job_trace(&gen_lb_trace(&cfg, &mut rng)?, &mut buf)?,
        }
        let name = format!("trace_{i:05}.csv");
        write_file(&args.out.join(&name), &buf)?;
        names.push(name);
        configs.push(cfg);
    }

    let manifest = serde_json::json!({
        "version": 1,
        "use_case": use_case.as_str(),
        "seed": args.seed,
        "count": args.count,
        "sampled": args.sample,
        "files": names,
        "configs": configs.iter().map(|c| c.values.clone()).collect::<Vec<_>>(),
        "param_names": space.params.iter().map(|p| p.name.clone()).collect::<Vec<_>>(),
    });
    write_json(&args.out.join("manifest.json"), &manifest)?;
    println!(
        "wrote {} trace file(s) and manifest.json to {}",
        args.count,
        args.out.display()
    );
    Ok(())
}
