//! `netcl eval`: paired comparison of RL checkpoints and rule baselines
//! over synthetic environments, recorded traces, or one-parameter sweeps.

use super::{ensure_dir, write_file, write_json};
use crate::{CliError, CliResult, SpaceArgs};
use netcl_core::eval::{asymptotic_eval, eval_on_traces, sweep_eval, ComparisonReport};
use netcl_core::policy::{load_checkpoint, PolicySnapshot};
use netcl_core::rollout::{PolicyRef, RuleKind, UseCaseFactory};
use netcl_core::trace::TraceCorpus;
use netcl_core::{ConfigDistribution, UseCase};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// abr, cc, or lb.
    #[arg(long)]
    use_case: String,

    #[command(flatten)]
    space: SpaceArgs,

    /// Policy under test: `rl:<checkpoint path>` or a rule name
    /// (bba, mpc, bbr, cubic, llf, sjf). Repeatable.
    #[arg(long = "policy", required = true)]
    policies: Vec<String>,

    /// Number of test environments.
    #[arg(short = 'n', long, default_value_t = netcl_core::eval::DEFAULT_TEST_ENVS)]
    n_envs: usize,

    /// Evaluate on recorded traces (one env per file) instead of synthetic
    /// environments.
    #[arg(long)]
    trace_dir: Option<PathBuf>,

    /// Sweep one parameter (by name) instead of sampling the whole box.
    #[arg(long, requires = "sweep_values")]
    sweep_dim: Option<String>,

    /// Comma-separated values for the sweep dimension.
    #[arg(long, requires = "sweep_dim")]
    sweep_values: Option<String>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    out: PathBuf,
}

/// Owned policy list: checkpoints must outlive the `PolicyRef`s.
struct Loaded {
    names: Vec<String>,
    snapshots: Vec<Option<PolicySnapshot>>,
    rules: Vec<Option<RuleKind>>,
}

fn load_policies(specs: &[String], use_case: UseCase) -> CliResult<Loaded> {
    let mut loaded = Loaded {
        names: Vec::new(),
        snapshots: Vec::new(),
        rules: Vec::new(),
    };
    for spec in specs {
        if let Some(path) = spec.strip_prefix("rl:") {
            let snap = load_checkpoint(std::path::Path::new(path))?;
            if snap.use_case != use_case {
                return Err(CliError::usage(format!(
                    "checkpoint {path} is for {}, expected {use_case}",
                    snap.use_case
                )));
            }
            let stem = std::path::Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "rl".to_string());
            let mut name = stem;
            let mut suffix = 2;
            while loaded.names.contains(&name) {
                name = format!("{name}_{suffix}");
                suffix += 1;
            }
            loaded.names.push(name);
            loaded.snapshots.push(Some(snap));
            loaded.rules.push(None);
        } else {
            let rule = RuleKind::parse(spec).map_err(|e| CliError::usage(e.to_string()))?;
            rule.check_use_case(use_case)
                .map_err(|e| CliError::usage(e.to_string()))?;
            loaded.names.push(rule.as_str().to_string());
            loaded.snapshots.push(None);
            loaded.rules.push(Some(rule));
        }
    }
    Ok(loaded)
}

impl Loaded {
    fn refs(&self) -> Vec<PolicyRef<'_>> {
        self.snapshots
            .iter()
            .zip(&self.rules)
            .map(|(snap, rule)| match (snap, rule) {
                (Some(s), _) => PolicyRef::Rl(s),
                (_, Some(r)) => PolicyRef::Rule(*r),
                _ => unreachable!(),
            })
            .collect()
    }

    fn apply_names(&self, report: &mut ComparisonReport) {
        for (p, name) in report.policies.iter_mut().zip(&self.names) {
            p.name = name.clone();
        }
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let use_case = UseCase::parse(&args.use_case).map_err(|e| CliError::usage(e.to_string()))?;
    let file = args.space.load(use_case)?;
    let space = file.space()?;
    let loaded = load_policies(&args.policies, use_case)?;
    let policies = loaded.refs();
    let factory = UseCaseFactory::new(use_case);
    ensure_dir(&args.out)?;

    if let Some(dim_name) = &args.sweep_dim {
        let (dim_index, _) = space
            .param(dim_name)
            .ok_or_else(|| CliError::usage(format!("unknown sweep dimension `{dim_name}`")))?;
        let values: Vec<f64> = args
            .sweep_values
            .as_deref()
            .unwrap_or_default()
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::usage(format!("sweep value `{v}`: {e}")))
            })
            .collect::<CliResult<_>>()?;
        let defaults = file.default_config()?;
        let rows = sweep_eval(
            &policies,
            &factory,
            &space,
            &defaults,
            dim_index,
            &values,
            args.n_envs,
            args.seed,
        )?;
        let mut csv = String::from("value");
        for name in &loaded.names {
            csv.push_str(&format!(",{name}_mean"));
        }
        csv.push('\n');
        let mut sweep_json = Vec::new();
        for row in &rows {
            let mut report = row.report.clone();
            loaded.apply_names(&mut report);
            csv.push_str(&row.value.to_string());
            for p in &report.policies {
                csv.push_str(&format!(",{}", p.mean));
            }
            csv.push('\n');
            sweep_json.push(serde_json::json!({
                "value": row.value,
                "summary": report.summary_json(),
            }));
        }
        write_file(&args.out.join("sweep.csv"), csv.as_bytes())?;
        write_json(
            &args.out.join("summary.json"),
            &serde_json::json!({
                "mode": "sweep",
                "dimension": dim_name,
                "rows": sweep_json,
            }),
        )?;
        println!("swept {dim_name} over {} values -> {}", rows.len(), args.out.display());
        return Ok(());
    }

    let mut report = if let Some(dir) = &args.trace_dir {
        let corpus = TraceCorpus::load_dir(dir)?;
        if corpus.is_empty() {
            return Err(CliError::usage(format!(
                "no parseable traces in {}",
                dir.display()
            )));
        }
        let defaults = file.default_config()?;
        eval_on_traces(&policies, &factory, &defaults, corpus.traces(), args.seed)?
    } else {
        let dist = ConfigDistribution::uniform(space);
        asymptotic_eval(&policies, &factory, &dist, args.n_envs, args.seed)?
    };
    loaded.apply_names(&mut report);

    write_file(&args.out.join("comparison.csv"), report.to_csv().as_bytes())?;
    write_json(&args.out.join("summary.json"), &report.summary_json())?;
    for p in &report.policies {
        println!(
            "{:>12}  mean {:>12.4}  ci90 [{:.4}, {:.4}]",
            p.name, p.mean, p.ci_lo, p.ci_hi
        );
    }
    println!("wrote comparison.csv and summary.json to {}", args.out.display());
    Ok(())
}
