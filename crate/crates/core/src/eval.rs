//! Comparison harness: paired evaluation over shared environment sets,
//! bootstrap confidence intervals, per-parameter sweeps, and
//! search-efficiency curves.

use crate::curriculum::{bo_search, grid_search, random_search, GapOracle, SearchLog};
use crate::error::{Error, Result};
use crate::policy::PolicySnapshot;
use crate::rng::{child_rng, child_seed};
use crate::rollout::{eval_policy_on, PolicyRef, RuleKind, UseCaseFactory};
use crate::space::{ConfigDistribution, EnvConfig, EnvSpace};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const DEFAULT_TEST_ENVS: usize = 200;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Two-sided confidence level for bootstrap intervals.
pub const CI_LEVEL: f64 = 0.90;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyResult {
    pub name: String,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub per_env: Vec<f64>,
}

/// Paired comparison over one shared set of environments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub policies: Vec<PolicyResult>,
    /// `[i][j]`: fraction of environments where policy i beats j, ties
    /// split evenly.
    pub fraction_better: Vec<Vec<f64>>,
    /// `[i][j]`: fraction of strict wins only.
    pub fraction_better_strict: Vec<Vec<f64>>,
    /// (config, seed) per environment, aligned with `per_env` rows.
    pub envs: Vec<(EnvConfig, u64)>,
}

impl ComparisonReport {
    pub fn policy(&self, name: &str) -> Option<&PolicyResult> {
        self.policies.iter().find(|p| p.name == name)
    }

    /// Dense CSV of paired per-environment rewards.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("env,seed");
        for p in &self.policies {
            out.push(',');
            out.push_str(&p.name);
        }
        out.push('\n');
        for (i, (_, seed)) in self.envs.iter().enumerate() {
            out.push_str(&format!("{i},{seed}"));
            for p in &self.policies {
                out.push_str(&format!(",{}", p.per_env[i]));
            }
            out.push('\n');
        }
        out
    }

    /// Machine-readable summary (means, CIs, pairwise fractions).
    pub fn summary_json(&self) -> serde_json::Value {
        let mut pairs = serde_json::Map::new();
        for (i, a) in self.policies.iter().enumerate() {
            for (j, b) in self.policies.iter().enumerate() {
                if i != j {
                    pairs.insert(
                        format!("{}_vs_{}", a.name, b.name),
                        serde_json::json!({
                            "fraction_better": self.fraction_better[i][j],
                            "fraction_better_strict": self.fraction_better_strict[i][j],
                        }),
                    );
                }
            }
        }
        serde_json::json!({
            "n_envs": self.envs.len(),
            "policies": self.policies.iter().map(|p| serde_json::json!({
                "name": p.name,
                "mean": p.mean,
                "ci_lo": p.ci_lo,
                "ci_hi": p.ci_hi,
            })).collect::<Vec<_>>(),
            "pairwise": pairs,
        })
    }
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_ci(values: &[f64], resamples: usize, level: f64, seed: u64) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = child_rng(seed, &[0xF7]);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += values[rng.random_range(0..n)];
        }
        means.push(sum / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    let lo = ((resamples as f64 * alpha) as usize).min(resamples - 1);
    let hi = ((resamples as f64 * (1.0 - alpha)) as usize).min(resamples - 1);
    (means[lo], means[hi])
}

/// Mean of paired differences and the bootstrap CI half-width around it.
pub fn paired_diff_ci(a: &[f64], b: &[f64], level: f64, seed: u64) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let (lo, hi) = bootstrap_ci(&diffs, BOOTSTRAP_RESAMPLES, level, seed);
    (mean, (hi - lo) / 2.0)
}

/// Evaluate every policy on the identical environment set drawn once from
/// `dist`: paired rewards, bootstrap CIs, and pairwise win fractions.
pub fn asymptotic_eval(
    policies: &[PolicyRef],
    factory: &UseCaseFactory,
    dist: &ConfigDistribution,
    n_envs: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    if policies.is_empty() || n_envs == 0 {
        return Err(Error::invalid_argument("need policies and environments"));
    }
    let mut rng = child_rng(seed, &[0xF0]);
    let envs: Vec<(EnvConfig, u64)> = (0..n_envs)
        .map(|i| {
            let cfg = dist.sample(&mut rng);
            (cfg, child_seed(seed, &[0xF2, i as u64]))
        })
        .collect();
    eval_on_envs(policies, factory, &envs, seed)
}

/// Evaluate every policy on an explicit environment list (paired).
pub fn eval_on_envs(
    policies: &[PolicyRef],
    factory: &UseCaseFactory,
    envs: &[(EnvConfig, u64)],
    seed: u64,
) -> Result<ComparisonReport> {
    let rewards: Vec<Vec<f64>> = policies
        .iter()
        .map(|p| {
            envs.par_iter()
                .map(|(cfg, env_seed)| eval_policy_on(p, factory, cfg, *env_seed))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    assemble_report(policies, rewards, envs.to_vec(), seed)
}

fn assemble_report(
    policies: &[PolicyRef],
    rewards: Vec<Vec<f64>>,
    envs: Vec<(EnvConfig, u64)>,
    seed: u64,
) -> Result<ComparisonReport> {
    let n = envs.len();
    let policies_out: Vec<PolicyResult> = policies
        .iter()
        .zip(&rewards)
        .enumerate()
        .map(|(pi, (p, per_env))| {
            let mean = per_env.iter().sum::<f64>() / n as f64;
            let (ci_lo, ci_hi) = bootstrap_ci(
                per_env,
                BOOTSTRAP_RESAMPLES,
                CI_LEVEL,
                child_seed(seed, &[0xF3, pi as u64]),
            );
            PolicyResult {
                name: p.name(),
                mean,
                ci_lo,
                ci_hi,
                per_env: per_env.clone(),
            }
        })
        .collect();

    let k = policies.len();
    let mut split = vec![vec![0.0; k]; k];
    let mut strict = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let mut wins = 0.0;
            let mut strict_wins = 0.0;
            for e in 0..n {
                let (a, b) = (rewards[i][e], rewards[j][e]);
                if a > b {
                    wins += 1.0;
                    strict_wins += 1.0;
                } else if a == b {
                    wins += 0.5;
                }
            }
            split[i][j] = wins / n as f64;
            strict[i][j] = strict_wins / n as f64;
        }
    }

    Ok(ComparisonReport {
        policies: policies_out,
        fraction_better: split,
        fraction_better_strict: strict,
        envs,
    })
}

/// Trace-driven comparison: every recorded trace is used exactly once per
/// policy, with non-bandwidth parameters from `cfg`.
pub fn eval_on_traces(
    policies: &[PolicyRef],
    factory: &UseCaseFactory,
    cfg: &EnvConfig,
    traces: &[crate::trace::RecordedTrace],
    seed: u64,
) -> Result<ComparisonReport> {
    if policies.is_empty() || traces.is_empty() {
        return Err(Error::invalid_argument("need policies and traces"));
    }
    let rewards: Vec<Vec<f64>> = policies
        .iter()
        .map(|p| {
            traces
                .par_iter()
                .enumerate()
                .map(|(ti, rec)| {
                    let env_seed = child_seed(seed, &[0xF6, ti as u64]);
                    match p {
                        PolicyRef::Rl(snapshot) => {
                            let mut env =
                                factory.build_with_trace(cfg, &rec.trace, env_seed)?;
                            let mut rng = child_rng(env_seed, &[0x7e]);
                            Ok(crate::rollout::run_policy_rollout(
                                env.as_mut(),
                                snapshot,
                                &mut rng,
                                true,
                            )
                            .episode_reward)
                        }
                        PolicyRef::Rule(rule) => {
                            factory.run_rule_on_trace(*rule, cfg, &rec.trace, env_seed)
                        }
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let envs: Vec<(EnvConfig, u64)> = traces
        .iter()
        .enumerate()
        .map(|(ti, _)| (cfg.clone(), child_seed(seed, &[0xF6, ti as u64])))
        .collect();
    assemble_report(policies, rewards, envs, seed)
}

/// One sweep row: every dimension at its default except `dim_index`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub report: ComparisonReport,
}

/// Hold all parameters at the table defaults, sweep one dimension across
/// the given values, and run a paired comparison per value.
pub fn sweep_eval(
    policies: &[PolicyRef],
    factory: &UseCaseFactory,
    space: &EnvSpace,
    defaults: &EnvConfig,
    dim_index: usize,
    values: &[f64],
    n_envs_per_value: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if dim_index >= space.dim() {
        return Err(Error::invalid_argument("sweep dimension out of range"));
    }
    values
        .iter()
        .enumerate()
        .map(|(vi, &value)| {
            let mut cfg = defaults.clone();
            cfg.values[dim_index] = value;
            let point = ConfigDistribution {
                base_space: space.point_space(&cfg),
                promoted: Vec::new(),
                base_weight: 1.0,
            };
            let report = asymptotic_eval(
                policies,
                factory,
                &point,
                n_envs_per_value,
                child_seed(seed, &[0xF4, vi as u64]),
            )?;
            Ok(SweepRow { value, report })
        })
        .collect()
}

/// Best-gap-found curves for the three search strategies, averaged over
/// seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EfficiencyCurves {
    /// Per-seed best-so-far curves.
    pub bo: Vec<Vec<f64>>,
    pub random: Vec<Vec<f64>>,
    pub grid: Vec<Vec<f64>>,
}

impl EfficiencyCurves {
    pub fn mean_curve(per_seed: &[Vec<f64>]) -> Vec<f64> {
        if per_seed.is_empty() {
            return Vec::new();
        }
        let len = per_seed.iter().map(|c| c.len()).min().unwrap_or(0);
        (0..len)
            .map(|i| per_seed.iter().map(|c| c[i]).sum::<f64>() / per_seed.len() as f64)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,bo,random,grid\n");
        let (b, r, g) = (
            Self::mean_curve(&self.bo),
            Self::mean_curve(&self.random),
            Self::mean_curve(&self.grid),
        );
        let len = b.len().max(r.len()).max(g.len());
        let cell = |v: &[f64], i: usize| {
            v.get(i)
                .or(v.last())
                .map(|x| x.to_string())
                .unwrap_or_default()
        };
        for i in 0..len {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                cell(&b, i),
                cell(&r, i),
                cell(&g, i)
            ));
        }
        out
    }
}

/// Run BO, random, and grid searches over the same oracle with per-seed
/// restarts; records best-so-far trajectories.
pub fn search_efficiency_eval(
    space: &EnvSpace,
    oracle: &dyn GapOracle,
    bo_budget: usize,
    random_budget: usize,
    n_seeds: usize,
    seed: u64,
) -> Result<EfficiencyCurves> {
    let mut curves = EfficiencyCurves {
        bo: Vec::new(),
        random: Vec::new(),
        grid: Vec::new(),
    };
    for s in 0..n_seeds {
        let s_bo = child_seed(seed, &[0xF5, s as u64, 0]);
        let s_rand = child_seed(seed, &[0xF5, s as u64, 1]);
        let s_grid = child_seed(seed, &[0xF5, s as u64, 2]);
        curves
            .bo
            .push(bo_search(space, oracle, bo_budget, s_bo)?.best_so_far());
        curves
            .random
            .push(random_search(space, oracle, random_budget, s_rand)?.best_so_far());
        curves
            .grid
            .push(grid_search(space, oracle, s_grid)?.best_so_far());
    }
    Ok(curves)
}

/// Baseline-gap oracle for efficiency evaluation against a frozen snapshot.
pub fn frozen_gap_oracle<'a>(
    snapshot: &'a PolicySnapshot,
    rule: RuleKind,
    factory: &'a UseCaseFactory,
    k: usize,
) -> impl GapOracle + 'a {
    move |cfg: &EnvConfig, seed: u64| {
        crate::curriculum::calc_baseline_gap(cfg, snapshot, rule, factory, k, seed)
    }
}

/// Write learning-curve rows as CSV.
pub fn write_curve_csv(
    curve: &[crate::policy::IterationStat],
    mut w: impl Write,
) -> Result<()> {
    writeln!(w, "iteration,mean_reward,reward_std")?;
    for row in curve {
        writeln!(w, "{},{},{}", row.iteration, row.mean_reward, row.reward_std)?;
    }
    Ok(())
}

/// Search trial rows as CSV (used by the CLI and by the efficiency plots).
pub fn write_trials_csv(log: &SearchLog, mut w: impl Write) -> Result<()> {
    writeln!(w, "trial,gap_mean,gap_std,k,best_so_far,config")?;
    let best = log.best_so_far();
    for (i, t) in log.trials.iter().enumerate() {
        let values: Vec<String> = t.config.values.iter().map(|v| v.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            i,
            t.gap.mean,
            t.gap.std,
            t.gap.k,
            best[i],
            values.join(";")
        )?;
    }
    Ok(())
}
