//! Episode plumbing: a small gym-style interface over the three
//! simulators, feature extraction for the policy network, rule-policy
//! episode runners, and paired evaluation.
//!
//! Environment instances are deterministic functions of (config, seed), so
//! an RL policy and a rule-based policy can be rolled out on the identical
//! environment by sharing the seed.

use crate::abr::{run_abr_episode, AbrDecider, AbrEnv, AbrSim, Bba, RobustMpc};
use crate::cc::{cc_reward, BbrLike, CcEnv, CcPolicy, CcSim, CubicLike, MonitorReport, MAX_RATE_PPS};
use crate::error::{Error, Result};
use crate::lb::{lb_reward, run_lb_episode, LbDecider, LbEnv, LbSim, Llf, Sjf};
use crate::policy::{policy_act, ArchDescriptor, PolicySnapshot, Rollout, RolloutStep};
use crate::rng::{child_rng, child_seed};
use crate::space::{EnvConfig, UseCase};
use crate::trace::TraceCorpus;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Step interface the trainer rolls against.
pub trait GymEnv: Send {
    fn obs_dim(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn observe(&mut self, out: &mut Vec<f64>);
    /// Apply an action; `None` means the episode ended before the step ran
    /// (trace exhaustion).
    fn step(&mut self, action: usize) -> Option<f64>;
    fn done(&self) -> bool;
    /// Use-case reward formula over the episode so far.
    fn formula_reward(&self) -> f64;
}

/// Builds environment instances from config points.
pub trait EnvFactory: Sync {
    fn obs_dim(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn build(&self, cfg: &EnvConfig, seed: u64) -> Box<dyn GymEnv>;
}

// ---------------------------------------------------------------------------
// Feature extraction
// ---------------------------------------------------------------------------

pub const ABR_OBS_DIM: usize = crate::abr::HISTORY_LEN + 6 + 3;
pub const CC_REPORT_FEATURES: usize = 6;
pub const CC_HISTORY: usize = 3;
pub const CC_OBS_DIM: usize = CC_REPORT_FEATURES * CC_HISTORY;
pub const LB_OBS_DIM: usize = 5;

/// Quantized multiplicative rate deltas for the CC agent.
pub const CC_ACTION_DELTAS: [f64; 11] = [
    -0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
];

/// log1p-compress into roughly [0, 1] with a documented cap.
fn log_norm(x: f64, cap: f64) -> f64 {
    (x.max(0.0).ln_1p() / cap.ln_1p()).min(2.0)
}

pub fn arch_for(use_case: UseCase) -> ArchDescriptor {
    match use_case {
        UseCase::Abr => ArchDescriptor::new(ABR_OBS_DIM, 6),
        UseCase::Cc => ArchDescriptor::new(CC_OBS_DIM, CC_ACTION_DELTAS.len()),
        UseCase::Lb => ArchDescriptor::new(LB_OBS_DIM, 3),
    }
}

// ---------------------------------------------------------------------------
// Gym adapters
// ---------------------------------------------------------------------------

struct AbrGym {
    sim: AbrSim,
    rewards: Vec<f64>,
}

impl GymEnv for AbrGym {
    fn obs_dim(&self) -> usize {
        ABR_OBS_DIM
    }

    fn n_actions(&self) -> usize {
        self.sim.env().n_bitrates()
    }

    fn observe(&mut self, out: &mut Vec<f64>) {
        out.clear();
        let s = self.sim.state();
        let env = self.sim.env();
        for &t in &s.throughput_history {
            out.push(log_norm(t, 1000.0));
        }
        let chunk = s.next_chunk.min(env.n_chunks() - 1);
        for b in 0..env.n_bitrates() {
            out.push(log_norm(env.chunk_megabits(chunk, b), 50.0));
        }
        out.push((s.buffer_s / env.max_buffer_s).clamp(0.0, 1.0));
        out.push(s.last_bitrate as f64 / (env.n_bitrates() - 1) as f64);
        out.push((env.n_chunks() - s.next_chunk) as f64 / env.n_chunks() as f64);
    }

    fn step(&mut self, action: usize) -> Option<f64> {
        match self.sim.step(action) {
            Ok(res) => {
                self.rewards.push(res.reward);
                Some(res.reward)
            }
            Err(_) => None,
        }
    }

    fn done(&self) -> bool {
        self.sim.done()
    }

    fn formula_reward(&self) -> f64 {
        if self.rewards.is_empty() {
            0.0
        } else {
            self.rewards.iter().sum::<f64>() / self.rewards.len() as f64
        }
    }
}

struct CcGym {
    sim: CcSim,
    rate_pps: f64,
    reports: Vec<MonitorReport>,
}

impl CcGym {
    fn new(env: CcEnv, seed: u64) -> Self {
        let initial = (10.0 / env.min_rtt_s()).clamp(crate::cc::MIN_RATE_PPS, MAX_RATE_PPS);
        CcGym {
            sim: CcSim::new(env, seed),
            rate_pps: initial,
            reports: Vec::new(),
        }
    }

    fn report_features(report: Option<&MonitorReport>, out: &mut Vec<f64>) {
        match report {
            Some(r) => {
                out.push(log_norm(r.sending_rate_pps, MAX_RATE_PPS));
                out.push(log_norm(r.receiving_rate_pps, MAX_RATE_PPS));
                out.push(r.rtt_inflation.min(10.0) / 10.0);
                out.push(r.avg_rtt_s.min(2.0) / 2.0);
                out.push(r.min_rtt_s.min(2.0) / 2.0);
                out.push(r.loss_rate);
            }
            None => out.extend_from_slice(&[0.0; CC_REPORT_FEATURES]),
        }
    }
}

impl GymEnv for CcGym {
    fn obs_dim(&self) -> usize {
        CC_OBS_DIM
    }

    fn n_actions(&self) -> usize {
        CC_ACTION_DELTAS.len()
    }

    fn observe(&mut self, out: &mut Vec<f64>) {
        out.clear();
        for back in (0..CC_HISTORY).rev() {
            let report = self
                .reports
                .len()
                .checked_sub(back + 1)
                .map(|i| &self.reports[i]);
            Self::report_features(report, out);
        }
    }

    fn step(&mut self, action: usize) -> Option<f64> {
        if self.sim.done() {
            return None;
        }
        self.rate_pps = crate::cc::apply_rate_delta(self.rate_pps, CC_ACTION_DELTAS[action]);
        let mi = self.sim.next_mi_length_s();
        let report = self.sim.step(self.rate_pps, mi).ok()?;
        self.reports.push(report);
        Some(
            crate::cc::REWARD_THROUGHPUT * report.throughput_pps
                + crate::cc::REWARD_LATENCY * report.avg_latency_s
                + crate::cc::REWARD_LOSS * report.loss_rate,
        )
    }

    fn done(&self) -> bool {
        self.sim.done()
    }

    fn formula_reward(&self) -> f64 {
        if self.reports.is_empty() {
            0.0
        } else {
            cc_reward(&self.reports).unwrap()
        }
    }
}

struct LbGym {
    sim: LbSim,
}

impl GymEnv for LbGym {
    fn obs_dim(&self) -> usize {
        LB_OBS_DIM
    }

    fn n_actions(&self) -> usize {
        self.sim.env().n_servers()
    }

    fn observe(&mut self, out: &mut Vec<f64>) {
        out.clear();
        let obs = self.sim.observe();
        for &w in &obs.works {
            out.push(log_norm(w, 1e6));
        }
        out.push(log_norm(obs.job_size, 1e6));
        out.push(log_norm(obs.interarrival_ms, 1e3));
    }

    fn step(&mut self, action: usize) -> Option<f64> {
        self.sim.step(action).ok().map(|delay| -delay)
    }

    fn done(&self) -> bool {
        self.sim.done()
    }

    fn formula_reward(&self) -> f64 {
        lb_reward(self.sim.delays()).unwrap_or(0.0)
    }
}

// ---------------------------------------------------------------------------
// Factory and rule policies
// ---------------------------------------------------------------------------

/// Environment factory for one use case, with optional recorded-trace
/// mixing for the bandwidth-driven cases.
#[derive(Debug, Clone)]
pub struct UseCaseFactory {
    pub use_case: UseCase,
    pub corpus: Option<TraceCorpus>,
    pub trace_weight: f64,
    pub cc_duration_s: f64,
}

impl UseCaseFactory {
    pub fn new(use_case: UseCase) -> Self {
        UseCaseFactory {
            use_case,
            corpus: None,
            trace_weight: 0.0,
            cc_duration_s: crate::cc::DEFAULT_EPISODE_S,
        }
    }

    pub fn with_corpus(mut self, corpus: TraceCorpus, weight: f64) -> Self {
        self.corpus = Some(corpus);
        self.trace_weight = weight;
        self
    }

    pub fn arch(&self) -> ArchDescriptor {
        arch_for(self.use_case)
    }

    fn mix(&self) -> Option<(&TraceCorpus, f64)> {
        self.corpus.as_ref().map(|c| (c, self.trace_weight))
    }

    pub fn build_abr(&self, cfg: &EnvConfig, seed: u64) -> Result<AbrEnv> {
        AbrEnv::from_config(cfg, seed, self.mix())
    }

    pub fn build_cc(&self, cfg: &EnvConfig, seed: u64) -> Result<CcEnv> {
        CcEnv::from_config(cfg, seed, self.cc_duration_s, self.mix())
    }

    pub fn build_lb(&self, cfg: &EnvConfig, seed: u64) -> Result<LbEnv> {
        LbEnv::from_config(cfg, seed)
    }

    /// Environment that replays one recorded bandwidth trace; every
    /// non-bandwidth parameter still comes from the config.
    pub fn build_with_trace(
        &self,
        cfg: &EnvConfig,
        trace: &crate::trace::BandwidthTrace,
        seed: u64,
    ) -> Result<Box<dyn GymEnv>> {
        match self.use_case {
            UseCase::Abr => {
                let mut env = self.build_abr(cfg, seed)?;
                env.hard_stop_s = trace.duration();
                env.trace = trace.clone();
                Ok(Box::new(AbrGym {
                    sim: AbrSim::new(env),
                    rewards: Vec::new(),
                }))
            }
            UseCase::Cc => {
                let mut env = self.build_cc(cfg, seed)?;
                env.duration_s = env.duration_s.min(trace.duration().max(0.1));
                env.trace = trace.clone();
                Ok(Box::new(CcGym::new(env, seed)))
            }
            UseCase::Lb => Err(Error::invalid_argument(
                "lb environments are not trace-driven",
            )),
        }
    }

    /// Rule-policy reward on a recorded-trace environment.
    pub fn run_rule_on_trace(
        &self,
        rule: RuleKind,
        cfg: &EnvConfig,
        trace: &crate::trace::BandwidthTrace,
        seed: u64,
    ) -> Result<f64> {
        rule.check_use_case(self.use_case)?;
        match self.use_case {
            UseCase::Abr => {
                let mut env = self.build_abr(cfg, seed)?;
                env.hard_stop_s = trace.duration();
                env.trace = trace.clone();
                let mut policy: Box<dyn AbrDecider> = match rule {
                    RuleKind::Bba => Box::new(Bba::for_env(&env)),
                    RuleKind::Mpc => Box::new(RobustMpc::new(5)),
                    _ => unreachable!(),
                };
                Ok(run_abr_episode(env, policy.as_mut()).0)
            }
            UseCase::Cc => {
                let mut env = self.build_cc(cfg, seed)?;
                env.duration_s = env.duration_s.min(trace.duration().max(0.1));
                env.trace = trace.clone();
                let mut policy: Box<dyn CcPolicy> = match rule {
                    RuleKind::Cubic => Box::new(CubicLike::new()),
                    RuleKind::Bbr => Box::new(BbrLike::new()),
                    _ => unreachable!(),
                };
                Ok(crate::cc::cc_episode(env, policy.as_mut(), seed).0)
            }
            UseCase::Lb => unreachable!(),
        }
    }

    /// Reward of a rule-based policy on the environment (config, seed).
    pub fn run_rule(&self, rule: RuleKind, cfg: &EnvConfig, seed: u64) -> Result<f64> {
        rule.check_use_case(self.use_case)?;
        match self.use_case {
            UseCase::Abr => {
                let env = self.build_abr(cfg, seed)?;
                let mut policy: Box<dyn AbrDecider> = match rule {
                    RuleKind::Bba => Box::new(Bba::for_env(&env)),
                    RuleKind::Mpc => Box::new(RobustMpc::new(5)),
                    _ => unreachable!(),
                };
                Ok(run_abr_episode(env, policy.as_mut()).0)
            }
            UseCase::Cc => {
                let env = self.build_cc(cfg, seed)?;
                let mut policy: Box<dyn CcPolicy> = match rule {
                    RuleKind::Cubic => Box::new(CubicLike::new()),
                    RuleKind::Bbr => Box::new(BbrLike::new()),
                    _ => unreachable!(),
                };
                Ok(crate::cc::cc_episode(env, policy.as_mut(), seed).0)
            }
            UseCase::Lb => {
                let env = self.build_lb(cfg, seed)?;
                let mut policy: Box<dyn LbDecider> = match rule {
                    RuleKind::Llf => Box::new(Llf),
                    RuleKind::Sjf => Box::new(Sjf),
                    _ => unreachable!(),
                };
                Ok(run_lb_episode(env, policy.as_mut(), seed).0)
            }
        }
    }
}

impl EnvFactory for UseCaseFactory {
    fn obs_dim(&self) -> usize {
        self.arch().input_dim
    }

    fn n_actions(&self) -> usize {
        self.arch().n_actions
    }

    fn build(&self, cfg: &EnvConfig, seed: u64) -> Box<dyn GymEnv> {
        match self.use_case {
            UseCase::Abr => Box::new(AbrGym {
                sim: AbrSim::new(self.build_abr(cfg, seed).expect("valid abr config")),
                rewards: Vec::new(),
            }),
            UseCase::Cc => Box::new(CcGym::new(
                self.build_cc(cfg, seed).expect("valid cc config"),
                seed,
            )),
            UseCase::Lb => Box::new(LbGym {
                sim: LbSim::new(self.build_lb(cfg, seed).expect("valid lb config"), seed),
            }),
        }
    }
}

/// The rule-based baselines, by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Bba,
    Mpc,
    Bbr,
    Cubic,
    Llf,
    Sjf,
}

impl RuleKind {
    pub const ALL: [RuleKind; 6] = [
        RuleKind::Bba,
        RuleKind::Mpc,
        RuleKind::Bbr,
        RuleKind::Cubic,
        RuleKind::Llf,
        RuleKind::Sjf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RuleKind::Bba => "bba",
            RuleKind::Mpc => "mpc",
            RuleKind::Bbr => "bbr",
            RuleKind::Cubic => "cubic",
            RuleKind::Llf => "llf",
            RuleKind::Sjf => "sjf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == lower)
            .ok_or_else(|| {
                Error::invalid_argument(format!(
                    "unknown baseline `{s}` (expected one of bba, mpc, bbr, cubic, llf, sjf)"
                ))
            })
    }

    pub fn use_case(&self) -> UseCase {
        match self {
            RuleKind::Bba | RuleKind::Mpc => UseCase::Abr,
            RuleKind::Bbr | RuleKind::Cubic => UseCase::Cc,
            RuleKind::Llf | RuleKind::Sjf => UseCase::Lb,
        }
    }

    pub fn check_use_case(&self, use_case: UseCase) -> Result<()> {
        if self.use_case() != use_case {
            let alternatives: Vec<&str> = Self::ALL
                .iter()
                .filter(|r| r.use_case() == use_case)
                .map(|r| r.as_str())
                .collect();
            return Err(Error::invalid_argument(format!(
                "baseline `{}` is not valid for {use_case}; available: {}",
                self.as_str(),
                alternatives.join(", ")
            )));
        }
        Ok(())
    }

    /// Default curriculum baseline per use case.
    pub fn default_for(use_case: UseCase) -> RuleKind {
        match use_case {
            UseCase::Abr => RuleKind::Mpc,
            UseCase::Cc => RuleKind::Bbr,
            UseCase::Lb => RuleKind::Llf,
        }
    }
}

impl std::fmt::Display for RuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---------------------------------------------------------------------------
// Rollouts and evaluation
// ---------------------------------------------------------------------------

/// Roll a policy through one environment; actions are sampled unless
/// `greedy`.
pub fn run_policy_rollout(
    env: &mut dyn GymEnv,
    snapshot: &PolicySnapshot,
    rng: &mut ChaCha8Rng,
    greedy: bool,
) -> Rollout {
    let mut steps = Vec::new();
    let mut features = Vec::with_capacity(env.obs_dim());
    while !env.done() {
        env.observe(&mut features);
        let action = policy_act(snapshot, &features, rng, greedy);
        match env.step(action) {
            Some(reward) => steps.push(RolloutStep {
                features: features.clone(),
                action,
                reward,
            }),
            None => break,
        }
    }
    Rollout {
        steps,
        episode_reward: env.formula_reward(),
    }
}

/// A policy under evaluation: an RL snapshot (greedy) or a rule baseline.
#[derive(Debug, Clone)]
pub enum PolicyRef<'a> {
    Rl(&'a PolicySnapshot),
    Rule(RuleKind),
}

impl PolicyRef<'_> {
    pub fn name(&self) -> String {
        match self {
            PolicyRef::Rl(s) => format!("rl_iter{}", s.iteration),
            PolicyRef::Rule(r) => r.as_str().to_string(),
        }
    }
}

/// Formula reward of a policy on the environment (config, seed). Greedy
/// action selection; rule policies are deterministic, so paired seeds give
/// paired environments.
pub fn eval_policy_on(
    policy: &PolicyRef,
    factory: &UseCaseFactory,
    cfg: &EnvConfig,
    env_seed: u64,
) -> Result<f64> {
    match policy {
        PolicyRef::Rl(snapshot) => {
            let mut env = factory.build(cfg, env_seed);
            let mut rng = child_rng(env_seed, &[0x7e]); // unused under greedy
            Ok(run_policy_rollout(env.as_mut(), snapshot, &mut rng, true).episode_reward)
        }
        PolicyRef::Rule(rule) => factory.run_rule(*rule, cfg, env_seed),
    }
}

/// Mean formula reward per config over `k` environments each, seeds derived
/// from `seed` so different policies pair exactly.
pub fn evaluate(
    policy: &PolicyRef,
    factory: &UseCaseFactory,
    configs: &[EnvConfig],
    k: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    configs
        .par_iter()
        .enumerate()
        .map(|(ci, cfg)| {
            let mut sum = 0.0;
            for ep in 0..k {
                let env_seed = child_seed(seed, &[0x90, ci as u64, ep as u64]);
                sum += eval_policy_on(policy, factory, cfg, env_seed)?;
            }
            Ok(sum / k as f64)
        })
        .collect()
}
