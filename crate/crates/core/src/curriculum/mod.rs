//! Curriculum generation: gap-to-baseline estimation, environment search
//! (Bayesian, random, grid), the promote-and-train loop, and the three
//! comparator curricula.
//!
//! The main loop starts from a uniform configuration distribution and, each
//! round, searches the box for the configuration where the current policy
//! trails its rule-based baseline the most, promotes that configuration
//! into the training distribution, and resumes training. The search starts
//! from scratch every round: the rewarding region moves as the policy
//! improves.

mod bo;

pub use bo::{CubeMap, Gp};

use crate::abr::{abr_optimal, DEFAULT_BUFFER_GRID_S};
use crate::error::{Error, Result};
use crate::policy::{
    train_uniform_with_state, IterationStat, PolicySnapshot, TrainSpec, TrainerState,
};
use crate::rng::{child_rng, child_seed};
use crate::rollout::{eval_policy_on, EnvFactory, PolicyRef, RuleKind, UseCaseFactory};
use crate::space::{ConfigDistribution, EnvConfig, EnvSpace, UseCase};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Mean and dispersion of (baseline reward - RL reward) over k paired
/// environments generated from one config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub config: EnvConfig,
    pub mean: f64,
    pub std: f64,
    pub k: usize,
}

/// Black-box objective for the environment searches: larger is more
/// rewarding to train on.
pub trait GapOracle: Sync {
    fn measure(&self, cfg: &EnvConfig, seed: u64) -> Result<GapEstimate>;
}

impl<F> GapOracle for F
where
    F: Fn(&EnvConfig, u64) -> Result<GapEstimate> + Sync,
{
    fn measure(&self, cfg: &EnvConfig, seed: u64) -> Result<GapEstimate> {
        self(cfg, seed)
    }
}

/// Gap-to-baseline of `rl` against `rule` over `k` environments generated
/// from `cfg` with shared per-index seeds (both policies see the identical
/// environment instance).
pub fn calc_baseline_gap(
    cfg: &EnvConfig,
    rl: &PolicySnapshot,
    rule: RuleKind,
    factory: &UseCaseFactory,
    k: usize,
    seed: u64,
) -> Result<GapEstimate> {
    if k < 1 {
        return Err(Error::invalid_argument("k must be >= 1"));
    }
    let diffs: Vec<f64> = (0..k)
        .into_par_iter()
        .map(|i| {
            let env_seed = child_seed(seed, &[0xB0, i as u64]);
            let rule_reward = factory.run_rule(rule, cfg, env_seed)?;
            let rl_reward = eval_policy_on(&PolicyRef::Rl(rl), factory, cfg, env_seed)?;
            Ok(rule_reward - rl_reward)
        })
        .collect::<Result<_>>()?;
    Ok(summarize_gap(cfg.clone(), &diffs))
}

fn summarize_gap(config: EnvConfig, samples: &[f64]) -> GapEstimate {
    let k = samples.len();
    let mean = samples.iter().sum::<f64>() / k as f64;
    let std = if k > 1 {
        (samples.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (k - 1) as f64).sqrt()
    } else {
        0.0
    };
    GapEstimate {
        config,
        mean,
        std,
        k,
    }
}

/// Gap-to-baseline oracle bound to a policy snapshot.
pub struct BaselineGapOracle<'a> {
    pub rl: &'a PolicySnapshot,
    pub rule: RuleKind,
    pub factory: &'a UseCaseFactory,
    pub k: usize,
}

impl GapOracle for BaselineGapOracle<'_> {
    fn measure(&self, cfg: &EnvConfig, seed: u64) -> Result<GapEstimate> {
        calc_baseline_gap(cfg, self.rl, self.rule, self.factory, self.k, seed)
    }
}

// ---------------------------------------------------------------------------
// Environment searches
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trial {
    pub config: EnvConfig,
    pub gap: GapEstimate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchLog {
    pub trials: Vec<Trial>,
    pub best_index: usize,
}

impl SearchLog {
    fn from_trials(trials: Vec<Trial>) -> SearchLog {
        let best_index = trials
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.gap.mean.partial_cmp(&b.1.gap.mean).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        SearchLog { trials, best_index }
    }

    pub fn best(&self) -> &Trial {
        &self.trials[self.best_index]
    }

    /// Monotone best-gap-so-far curve by trial index.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.trials
            .iter()
            .map(|t| {
                best = best.max(t.gap.mean);
                best
            })
            .collect()
    }
}

fn run_trial(
    oracle: &dyn GapOracle,
    cfg: &EnvConfig,
    seed: u64,
    trial: usize,
) -> Result<GapEstimate> {
    oracle
        .measure(cfg, child_seed(seed, &[0xC1, trial as u64]))
        .map_err(|e| Error::SearchTrial {
            trial,
            source: Box::new(e),
        })
}

/// Bayesian-optimization search for the config maximizing the gap oracle.
///
/// A fresh surrogate is built per call. The first `min(3, n_trials)` points
/// are quasi-random; afterwards each trial maximizes expected improvement
/// under a GP fit to all observations. Returns the full trial history with
/// the best *observed* config marked.
pub fn bo_search(
    space: &EnvSpace,
    oracle: &dyn GapOracle,
    n_trials: usize,
    seed: u64,
) -> Result<SearchLog> {
    if n_trials < 1 {
        return Err(Error::invalid_argument("n_trials must be >= 1"));
    }
    let map = CubeMap::new(space);
    let mut rng = child_rng(seed, &[0xC2]);
    let n_init = n_trials.min(3);
    let mut points: Vec<Vec<f64>> = map.quasi_random(n_init, &mut rng);
    let mut trials: Vec<Trial> = Vec::with_capacity(n_trials);

    for trial in 0..n_trials {
        let u = if trial < points.len() {
            points[trial].clone()
        } else {
            let ys: Vec<f64> = trials.iter().map(|t| t.gap.mean).collect();
            let noise: Vec<f64> = trials
                .iter()
                .map(|t| t.gap.std * t.gap.std / t.gap.k.max(1) as f64)
                .collect();
            let gp = Gp::fit(points.clone(), &ys, &noise);
            let best = trials
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.gap.mean.partial_cmp(&b.1.gap.mean).unwrap())
                .unwrap();
            let u = gp.suggest(map.dim(), &points[best.0], best.1.gap.mean, &mut rng);
            points.push(u.clone());
            u
        };
        let cfg = map.to_config(&u);
        let gap = run_trial(oracle, &cfg, seed, trial)?;
        trials.push(Trial { config: cfg, gap });
    }
    Ok(SearchLog::from_trials(trials))
}

/// Uniform-random comparator search.
pub fn random_search(
    space: &EnvSpace,
    oracle: &dyn GapOracle,
    n_trials: usize,
    seed: u64,
) -> Result<SearchLog> {
    if n_trials < 1 {
        return Err(Error::invalid_argument("n_trials must be >= 1"));
    }
    let mut rng = child_rng(seed, &[0xC3]);
    let mut trials = Vec::with_capacity(n_trials);
    for trial in 0..n_trials {
        let cfg = space.sample(&mut rng);
        let gap = run_trial(oracle, &cfg, seed, trial)?;
        trials.push(Trial { config: cfg, gap });
    }
    Ok(SearchLog::from_trials(trials))
}

pub const GRID_POINTS_PER_DIM: usize = 5;

/// Coordinate-descent grid comparator: start at the box midpoints and sweep
/// each dimension over five evenly spaced values, keeping the best value
/// found before moving to the next dimension.
pub fn grid_search(space: &EnvSpace, oracle: &dyn GapOracle, seed: u64) -> Result<SearchLog> {
    let map = CubeMap::new(space);
    let mut current = vec![0.5; map.dim()];
    let mut trials = Vec::new();
    let mut best_val = f64::NEG_INFINITY;
    let mut trial = 0usize;
    for d in 0..map.dim() {
        let mut best_coord = current[d];
        for g in 0..GRID_POINTS_PER_DIM {
            let mut u = current.clone();
            u[d] = g as f64 / (GRID_POINTS_PER_DIM - 1) as f64;
            let cfg = map.to_config(&u);
            let gap = run_trial(oracle, &cfg, seed, trial)?;
            trial += 1;
            if gap.mean > best_val {
                best_val = gap.mean;
                best_coord = u[d];
            }
            trials.push(Trial { config: cfg, gap });
        }
        current[d] = best_coord;
    }
    if trials.is_empty() {
        // Fully degenerate box: single midpoint evaluation.
        let cfg = map.to_config(&[]);
        let gap = run_trial(oracle, &cfg, seed, 0)?;
        trials.push(Trial { config: cfg, gap });
    }
    Ok(SearchLog::from_trials(trials))
}

// ---------------------------------------------------------------------------
// Curriculum loops
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurriculumMode {
    Uniform,
    Genet,
    Cl1,
    Cl2,
    Cl3,
}

impl CurriculumMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(CurriculumMode::Uniform),
            "genet" => Ok(CurriculumMode::Genet),
            "cl1" => Ok(CurriculumMode::Cl1),
            "cl2" => Ok(CurriculumMode::Cl2),
            "cl3" => Ok(CurriculumMode::Cl3),
            other => Err(Error::invalid_argument(format!(
                "unknown curriculum `{other}` (expected uniform, genet, cl1, cl2, or cl3)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CurriculumMode::Uniform => "uniform",
            CurriculumMode::Genet => "genet",
            CurriculumMode::Cl1 => "cl1",
            CurriculumMode::Cl2 => "cl2",
            CurriculumMode::Cl3 => "cl3",
        }
    }
}

/// Knobs for the promote-and-train loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurriculumSpec {
    pub rounds: usize,
    pub iters_per_round: usize,
    /// Probability mass given to each newly promoted config.
    pub promote_weight: f64,
    pub bo_trials: usize,
    /// Paired episodes per gap estimate.
    pub gap_episodes: usize,
}

impl Default for CurriculumSpec {
    fn default() -> Self {
        CurriculumSpec {
            rounds: 9,
            iters_per_round: 10,
            promote_weight: 0.3,
            bo_trials: 15,
            gap_episodes: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub selected: Trial,
    pub curve: Vec<IterationStat>,
    pub base_weight: f64,
    pub search: SearchLog,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CurriculumLog {
    pub rounds: Vec<RoundLog>,
}

impl CurriculumLog {
    pub fn promoted_configs(&self) -> Vec<&EnvConfig> {
        self.rounds.iter().map(|r| &r.selected.config).collect()
    }

    pub fn full_curve(&self) -> Vec<IterationStat> {
        self.rounds.iter().flat_map(|r| r.curve.clone()).collect()
    }
}

/// Round selection: (current snapshot, round index, seed) -> the chosen
/// trial plus the full search history behind it.
fn curriculum_loop<F, S>(
    space: &EnvSpace,
    snapshot: &PolicySnapshot,
    train_spec: &TrainSpec,
    cur: &CurriculumSpec,
    factory: &F,
    select: S,
) -> Result<(PolicySnapshot, CurriculumLog)>
where
    F: EnvFactory + ?Sized,
    S: Fn(&PolicySnapshot, usize, u64) -> Result<(Trial, SearchLog)>,
{
    space.validate()?;
    if !(cur.promote_weight >= 0.0 && cur.promote_weight < 1.0) {
        return Err(Error::invalid_argument(
            "promote_weight must be in [0, 1)",
        ));
    }
    let mut dist = ConfigDistribution::uniform(space.clone());
    let mut current = snapshot.clone();
    let mut state = TrainerState::new(&current);
    let mut log = CurriculumLog::default();

    for round in 0..cur.rounds {
        let wrap = |e: Error| Error::CurriculumRound {
            round,
            source: Box::new(e),
        };
        let search_seed = child_seed(train_spec.seed, &[0xD0, round as u64]);
        let (selected, search) = select(&current, round, search_seed).map_err(wrap)?;

        if cur.promote_weight > 0.0 {
            dist = dist
                .promote(selected.config.clone(), cur.promote_weight)
                .map_err(wrap)?;
        }

        let round_spec = TrainSpec {
            iterations: cur.iters_per_round,
            ..train_spec.clone()
        };
        let (next, curve) =
            train_uniform_with_state(&dist, &current, &round_spec, factory, &mut state)
                .map_err(wrap)?;
        current = next;
        log.rounds.push(RoundLog {
            round,
            selected,
            curve,
            base_weight: dist.base_weight,
            search,
        });
    }
    Ok((current, log))
}

/// The gap-to-baseline curriculum (the main loop): per round, BO-search the
/// box for the config with the largest gap to the rule baseline, promote it
/// with `promote_weight`, and train for `iters_per_round`.
pub fn genet_train<F, G>(
    space: &EnvSpace,
    snapshot: &PolicySnapshot,
    train_spec: &TrainSpec,
    cur: &CurriculumSpec,
    factory: &F,
    gap_for: G,
) -> Result<(PolicySnapshot, CurriculumLog)>
where
    F: EnvFactory + ?Sized,
    G: Fn(&PolicySnapshot, &EnvConfig, u64) -> Result<GapEstimate> + Sync,
{
    curriculum_loop(
        space,
        snapshot,
        train_spec,
        cur,
        factory,
        |snap, _round, seed| {
            let oracle = |cfg: &EnvConfig, s: u64| gap_for(snap, cfg, s);
            let search = bo_search(space, &oracle, cur.bo_trials, seed)?;
            Ok((search.best().clone(), search))
        },
    )
}

/// Gap-to-baseline curriculum against a named rule policy.
pub fn genet_train_baseline(
    space: &EnvSpace,
    snapshot: &PolicySnapshot,
    train_spec: &TrainSpec,
    cur: &CurriculumSpec,
    factory: &UseCaseFactory,
    rule: RuleKind,
) -> Result<(PolicySnapshot, CurriculumLog)> {
    rule.check_use_case(factory.use_case)?;
    let k = cur.gap_episodes;
    genet_train(
        space,
        snapshot,
        train_spec,
        cur,
        factory,
        |snap: &PolicySnapshot, cfg: &EnvConfig, seed: u64| {
            calc_baseline_gap(cfg, snap, rule, factory, k, seed)
        },
    )
}

/// Name of the dimension CL1 schedules from easy to hard.
pub fn cl1_difficulty_dim(use_case: UseCase) -> &'static str {
    match use_case {
        // Faster bandwidth fluctuation is harder.
        UseCase::Abr | UseCase::Cc => "bw_change_interval_s",
        // Denser arrivals are harder.
        UseCase::Lb => "job_interval_ms",
    }
}

/// The config CL1 selects at `round`: every parameter at its box midpoint
/// except the difficulty dimension, which walks from its easy end (high)
/// to its hard end (low) across rounds.
pub fn cl1_schedule(space: &EnvSpace, round: usize, rounds: usize) -> EnvConfig {
    let map = CubeMap::new(space);
    let u = vec![0.5; map.dim()];
    let mut cfg = map.to_config(&u);
    if let Some((dim, spec)) = space.param(cl1_difficulty_dim(space.use_case)) {
        let frac = if rounds > 1 {
            round as f64 / (rounds - 1) as f64
        } else {
            1.0
        };
        cfg.values[dim] = spec.denormalize(1.0 - frac);
    }
    cfg
}

/// Hand-picked heuristic curriculum: schedule the difficulty dimension from
/// easy to hard; no search.
pub fn cl1_train<F: EnvFactory + ?Sized>(
    space: &EnvSpace,
    snapshot: &PolicySnapshot,
    train_spec: &TrainSpec,
    cur: &CurriculumSpec,
    factory: &F,
) -> Result<(PolicySnapshot, CurriculumLog)> {
    curriculum_loop(
        space,
        snapshot,
        train_spec,
        cur,
        factory,
        |_snap, round, _seed| {
            let config = cl1_schedule(space, round, cur.rounds);
            let trial = Trial {
                config: config.clone(),
                gap: GapEstimate {
                    config,
                    mean: f64::NAN, // scheduled, not measured
                    std: 0.0,
                    k: 0,
                },
            };
            Ok((
                trial.clone(),
                SearchLog {
                    trials: vec![trial],
                    best_index: 0,
                },
            ))
        },
    )
}

/// Baseline-hardness curriculum: BO-maximize the *negated* rule-baseline
/// reward (environments where the baseline itself struggles).
pub fn cl2_train(
    space: &EnvSpace,
    snapshot: &PolicySnapshot,
    train_spec: &TrainSpec,
    cur: &CurriculumSpec,
    factory: &UseCaseFactory,
    rule: RuleKind,
) -> Result<(PolicySnapshot, CurriculumLog)> {
    rule.check_use_case(factory.use_case)?;
    let k = cur.gap_episodes;
    genet_train(
        space,
        snapshot,
        train_spec,
        cur,
        factory,
        move |_snap: &PolicySnapshot, cfg: &EnvConfig, seed: u64| {
            let samples: Vec<f64> = (0..k)
                .into_par_iter()
                .map(|i| {
                    let env_seed = child_seed(seed, &[0xB1, i as u64]);
                    factory.run_rule(rule, cfg, env_seed).map(|r| -r)
                })
                .collect::<Result<_>>()?;
            Ok(summarize_gap(cfg.clone(), &samples))
        },
    )
}

/// Gap-to-optimum curriculum: BO-maximize (optimal reward - RL reward).
/// Only ABR has a tractable ground-truth oracle.
pub fn cl3_train(
    space: &EnvSpace,
    snapshot: &PolicySnapshot,
    train_spec: &TrainSpec,
    cur: &CurriculumSpec,
    factory: &UseCaseFactory,
) -> Result<(PolicySnapshot, CurriculumLog)> {
    if factory.use_case != UseCase::Abr {
        return Err(Error::invalid_argument(
            "cl3 needs the ground-truth oracle, which exists only for abr",
        ));
    }
    let k = cur.gap_episodes;
    genet_train(
        space,
        snapshot,
        train_spec,
        cur,
        factory,
        move |snap: &PolicySnapshot, cfg: &EnvConfig, seed: u64| {
            let samples: Vec<f64> = (0..k)
                .into_par_iter()
                .map(|i| {
                    let env_seed = child_seed(seed, &[0xB2, i as u64]);
                    let env = factory.build_abr(cfg, env_seed)?;
                    let optimal = abr_optimal(&env, DEFAULT_BUFFER_GRID_S);
                    let rl = eval_policy_on(&PolicyRef::Rl(snap), factory, cfg, env_seed)?;
                    Ok(optimal - rl)
                })
                .collect::<Result<_>>()?;
            Ok(summarize_gap(cfg.clone(), &samples))
        },
    )
}

// ---------------------------------------------------------------------------
// Gap vs. training-improvement diagnostic
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub config: EnvConfig,
    pub gap: f64,
    pub improvement: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub spearman: f64,
}

/// Default fine-tuning budget for the scan (iterations on the single
/// config).
pub const SCAN_FINE_TUNE_ITERS: usize = 20;

/// For each of `n_configs` random configs: measure the gap-to-baseline,
/// fine-tune a copy of the policy on that config alone for a fixed budget,
/// and measure the paired test-reward improvement. Reports the scatter rows
/// and the Spearman rank correlation between gap and improvement.
pub fn gap_improvement_scan(
    space: &EnvSpace,
    snapshot: &PolicySnapshot,
    rule: RuleKind,
    factory: &UseCaseFactory,
    n_configs: usize,
    fine_tune_iters: usize,
    train_spec: &TrainSpec,
    seed: u64,
) -> Result<ScanResult> {
    if n_configs < 1 {
        return Err(Error::invalid_argument("n_configs must be >= 1"));
    }
    // Improvement estimates need a tighter noise floor than gap estimates.
    let k_eval = 20;
    let mut cfg_rng = child_rng(seed, &[0xE0]);
    let configs: Vec<EnvConfig> = (0..n_configs).map(|_| space.sample(&mut cfg_rng)).collect();

    let mut rows = Vec::with_capacity(n_configs);
    for (ci, cfg) in configs.iter().enumerate() {
        let gap = calc_baseline_gap(
            cfg,
            snapshot,
            rule,
            factory,
            k_eval,
            child_seed(seed, &[0xE1, ci as u64]),
        )?;
        let point = ConfigDistribution {
            base_space: space.point_space(cfg),
            promoted: vec![(cfg.clone(), 1.0)],
            base_weight: 0.0,
        };
        let tune_spec = TrainSpec {
            iterations: fine_tune_iters,
            seed: child_seed(seed, &[0xE2, ci as u64]),
            ..train_spec.clone()
        };
        let (tuned, _) = crate::policy::train_uniform(&point, snapshot, &tune_spec, factory)?;
        let eval_seed = child_seed(seed, &[0xE3, ci as u64]);
        let before = crate::rollout::evaluate(
            &PolicyRef::Rl(snapshot),
            factory,
            std::slice::from_ref(cfg),
            k_eval,
            eval_seed,
        )?[0];
        let after = crate::rollout::evaluate(
            &PolicyRef::Rl(&tuned),
            factory,
            std::slice::from_ref(cfg),
            k_eval,
            eval_seed,
        )?[0];
        rows.push(ScanRow {
            config: cfg.clone(),
            gap: gap.mean,
            improvement: after - before,
        });
    }
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let imps: Vec<f64> = rows.iter().map(|r| r.improvement).collect();
    Ok(ScanResult {
        rows,
        spearman: spearman(&gaps, &imps),
    })
}

/// Average ranks (ties averaged).
pub fn rank_with_ties(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of tie-averaged ranks).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ra, rb) = (rank_with_ties(a), rank_with_ties(b));
    let n = a.len() as f64;
    let (ma, mb) = (
        ra.iter().sum::<f64>() / n,
        rb.iter().sum::<f64>() / n,
    );
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..a.len() {
        let (da, db) = (ra[i] - ma, rb[i] - mb);
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va.sqrt() * vb.sqrt())
    }
}
