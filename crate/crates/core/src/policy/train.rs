//! REINFORCE with a learned value baseline.
//!
//! Each iteration samples K configs from the training distribution, builds
//! N environments per config, rolls the current policy out on all of them
//! in parallel, and applies one Adam step to the policy (gradient ascent on
//! discounted returns-to-go minus the value baseline, plus entropy
//! regularization) and one to the value network (MSE descent). Rollout
//! seeds are derived per (iteration, config, env), so results do not depend
//! on worker count.

use super::{softmax, PolicySnapshot};
use crate::error::{Error, Result};
use crate::rng::{child_rng, child_seed};
use crate::rollout::EnvFactory;
use crate::space::ConfigDistribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct RolloutStep {
    pub features: Vec<f64>,
    pub action: usize,
    pub reward: f64,
}

/// One episode of (state, action, reward) plus the use-case formula reward.
#[derive(Debug, Clone, Default)]
pub struct Rollout {
    pub steps: Vec<RolloutStep>,
    pub episode_reward: f64,
}

/// Trainer knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSpec {
    /// K: configs sampled per iteration.
    pub k_configs: usize,
    /// N: environments per config.
    pub n_envs: usize,
    /// Policy learning rate (Adam).
    pub learning_rate: f64,
    pub iterations: usize,
    pub entropy_weight: f64,
    pub seed: u64,
    /// Discount for returns-to-go.
    pub gamma: f64,
    /// Z-score advantages across the batch.
    pub normalize_advantages: bool,
    pub value_learning_rate: f64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            k_configs: 10,
            n_envs: 3,
            learning_rate: 1e-2,
            iterations: 10,
            entropy_weight: 0.05,
            seed: 0,
            gamma: 0.99,
            normalize_advantages: true,
            value_learning_rate: 1e-2,
        }
    }
}

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k_configs < 1 || self.n_envs < 1 {
            return Err(Error::invalid_argument("K and N must be >= 1"));
        }
        if !(self.learning_rate >= 0.0) || !(self.value_learning_rate >= 0.0) {
            return Err(Error::invalid_argument("learning rates must be >= 0"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::invalid_argument("gamma must be in (0, 1]"));
        }
        Ok(())
    }
}

/// One learning-curve row.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IterationStat {
    pub iteration: u64,
    pub mean_reward: f64,
    pub reward_std: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GradientStats {
    pub mean_episode_reward: f64,
    pub episode_reward_std: f64,
    pub mean_entropy: f64,
}

/// Policy-gradient and value-gradient estimate over a batch of rollouts.
///
/// The policy gradient is the ascent direction, averaged over episodes:
/// for each step, `grad log pi(a|s) * (G - V(s))` plus the entropy-bonus
/// gradient. The value gradient is the descent direction of the MSE to the
/// returns, averaged over steps. With `normalize` the advantages are
/// z-scored across the whole batch before use.
pub fn policy_gradient_estimate(
    snapshot: &PolicySnapshot,
    rollouts: &[Rollout],
    gamma: f64,
    entropy_weight: f64,
    normalize: bool,
) -> Result<(Vec<f64>, Vec<f64>, GradientStats)> {
    if rollouts.is_empty() {
        return Err(Error::invalid_argument("no rollouts"));
    }
    let policy_net = snapshot.policy_net();
    let value_net = snapshot.value_net();

    // Returns-to-go and baseline values per step.
    let mut returns: Vec<Vec<f64>> = Vec::with_capacity(rollouts.len());
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(rollouts.len());
    for rollout in rollouts {
        let mut g = vec![0.0; rollout.steps.len()];
        let mut acc = 0.0;
        for (t, step) in rollout.steps.iter().enumerate().rev() {
            acc = step.reward + gamma * acc;
            g[t] = acc;
        }
        let v = rollout
            .steps
            .iter()
            .map(|s| value_net.forward(&snapshot.value_params, &s.features)[0])
            .collect();
        returns.push(g);
        values.push(v);
    }

    let mut advantages: Vec<Vec<f64>> = returns
        .iter()
        .zip(&values)
        .map(|(g, v)| g.iter().zip(v).map(|(g, v)| g - v).collect())
        .collect();
    if normalize {
        let flat: Vec<f64> = advantages.iter().flatten().copied().collect();
        let n = flat.len() as f64;
        let mean = flat.iter().sum::<f64>() / n;
        let var = flat.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        let std = var.sqrt().max(1e-8);
        for adv in &mut advantages {
            for a in adv {
                *a = (*a - mean) / std;
            }
        }
    }

    let mut policy_grad = vec![0.0; policy_net.param_count()];
    let mut value_grad = vec![0.0; value_net.param_count()];
    let mut entropy_sum = 0.0;
    let mut step_count = 0usize;

    for (r, rollout) in rollouts.iter().enumerate() {
        for (t, step) in rollout.steps.iter().enumerate() {
            let acts = policy_net.forward_cached(&snapshot.params, &step.features);
            let probs = softmax(acts.last().unwrap());
            let entropy: f64 = -probs
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| p * p.ln())
                .sum::<f64>();
            entropy_sum += entropy;
            step_count += 1;

            // d/dlogits of [log pi(a) * adv + w * H].
            let adv = advantages[r][t];
            let mut delta = vec![0.0; probs.len()];
            for (k, &p) in probs.iter().enumerate() {
                let dlogp = if k == step.action { 1.0 - p } else { -p };
                let dentropy = -p * (p.max(1e-300).ln() + entropy);
                delta[k] = dlogp * adv + entropy_weight * dentropy;
            }
            policy_net.backward_into(&snapshot.params, &acts, &delta, &mut policy_grad);

            // Value MSE descent direction: d/dout of 0.5 (V - G)^2.
            let vacts = value_net.forward_cached(&snapshot.value_params, &step.features);
            let verr = vacts.last().unwrap()[0] - returns[r][t];
            value_net.backward_into(&snapshot.value_params, &vacts, &[verr], &mut value_grad);
        }
    }

    let n_episodes = rollouts.len() as f64;
    for g in &mut policy_grad {
        *g /= n_episodes;
    }
    if step_count > 0 {
        for g in &mut value_grad {
            *g /= step_count as f64;
        }
    }

    let rewards: Vec<f64> = rollouts.iter().map(|r| r.episode_reward).collect();
    let mean = rewards.iter().sum::<f64>() / n_episodes;
    let var = rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n_episodes;
    Ok((
        policy_grad,
        value_grad,
        GradientStats {
            mean_episode_reward: mean,
            episode_reward_std: var.sqrt(),
            mean_entropy: if step_count > 0 {
                entropy_sum / step_count as f64
            } else {
                0.0
            },
        },
    ))
}

/// Adam accumulator.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Adam {
    pub fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// Ascend `params` along `grad` (negate the gradient to descend).
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let b1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let b2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * grad[i];
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * grad[i] * grad[i];
            let mhat = self.m[i] / b1;
            let vhat = self.v[i] / b2;
            params[i] += lr * mhat / (vhat.sqrt() + ADAM_EPS);
        }
    }
}

/// Optimizer accumulators that persist across training calls (curricula
/// train in short bursts between distribution updates).
#[derive(Debug, Clone)]
pub struct TrainerState {
    policy_adam: Adam,
    value_adam: Adam,
}

impl TrainerState {
    pub fn new(snapshot: &PolicySnapshot) -> Self {
        TrainerState {
            policy_adam: Adam::new(snapshot.params.len()),
            value_adam: Adam::new(snapshot.value_params.len()),
        }
    }
}

/// Traditional training: per iteration, K uniformly sampled configs with N
/// environments each, one policy-gradient update from the pooled rollouts.
///
/// Returns the trained snapshot and the per-iteration learning curve. The
/// iteration counter continues from `snapshot.iteration`, so checkpoints
/// resume with fresh but reproducible seed substreams.
pub fn train_uniform<F: EnvFactory + ?Sized>(
    dist: &ConfigDistribution,
    snapshot: &PolicySnapshot,
    spec: &TrainSpec,
    factory: &F,
) -> Result<(PolicySnapshot, Vec<IterationStat>)> {
    let mut state = TrainerState::new(snapshot);
    train_uniform_with_state(dist, snapshot, spec, factory, &mut state)
}

/// [`train_uniform`] with caller-owned optimizer state.
pub fn train_uniform_with_state<F: EnvFactory + ?Sized>(
    dist: &ConfigDistribution,
    snapshot: &PolicySnapshot,
    spec: &TrainSpec,
    factory: &F,
    state: &mut TrainerState,
) -> Result<(PolicySnapshot, Vec<IterationStat>)> {
    spec.validate()?;
    dist.validate()?;
    if factory.obs_dim() != snapshot.arch.input_dim
        || factory.n_actions() != snapshot.arch.n_actions
    {
        return Err(Error::invalid_argument(
            "snapshot architecture does not match environment factory",
        ));
    }

    let mut current = snapshot.clone();
    let mut curve = Vec::with_capacity(spec.iterations);

    for i in 0..spec.iterations {
        let iter_index = current.iteration;
        let mut cfg_rng = child_rng(spec.seed, &[0xA0, iter_index]);
        let mut jobs = Vec::with_capacity(spec.k_configs * spec.n_envs);
        for k in 0..spec.k_configs {
            let cfg = dist.sample(&mut cfg_rng);
            for n in 0..spec.n_envs {
                let env_seed = child_seed(spec.seed, &[0xA1, iter_index, k as u64, n as u64]);
                let act_seed = child_seed(spec.seed, &[0xA2, iter_index, k as u64, n as u64]);
                jobs.push((cfg.clone(), env_seed, act_seed));
            }
        }

        let rollouts: Vec<Rollout> = jobs
            .par_iter()
            .map(|(cfg, env_seed, act_seed)| {
                let mut env = factory.build(cfg, *env_seed);
                let mut rng = child_rng(*act_seed, &[]);
                crate::rollout::run_policy_rollout(env.as_mut(), &current, &mut rng, false)
            })
            .collect();

        let (policy_grad, value_grad, stats) = policy_gradient_estimate(
            &current,
            &rollouts,
            spec.gamma,
            spec.entropy_weight,
            spec.normalize_advantages,
        )?;
        if policy_grad.iter().chain(&value_grad).any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: i });
        }

        state
            .policy_adam
            .step(&mut current.params, &policy_grad, spec.learning_rate);
        let descent: Vec<f64> = value_grad.iter().map(|g| -g).collect();
        state.value_adam.step(
            &mut current.value_params,
            &descent,
            spec.value_learning_rate,
        );
        current.iteration += 1;
        curve.push(IterationStat {
            iteration: current.iteration,
            mean_reward: stats.mean_episode_reward,
            reward_std: stats.episode_reward_std,
        });
    }
    Ok((current, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::ArchDescriptor;
    use crate::rollout::GymEnv;
    use crate::space::{EnvConfig, EnvSpace, ParamSpec, Scale, UseCase};

    /// Two-armed bandit: one constant-feature step, arm 0 pays 1.
    struct Bandit {
        done: bool,
        reward: f64,
    }

    impl GymEnv for Bandit {
        fn obs_dim(&self) -> usize {
            1
        }
        fn n_actions(&self) -> usize {
            2
        }
        fn observe(&mut self, out: &mut Vec<f64>) {
            out.clear();
            out.push(0.5);
        }
        fn step(&mut self, action: usize) -> Option<f64> {
            self.done = true;
            self.reward = if action == 0 { 1.0 } else { 0.0 };
            Some(self.reward)
        }
        fn done(&self) -> bool {
            self.done
        }
        fn formula_reward(&self) -> f64 {
            self.reward
        }
    }

    struct BanditFactory;

    impl EnvFactory for BanditFactory {
        fn obs_dim(&self) -> usize {
            1
        }
        fn n_actions(&self) -> usize {
            2
        }
        fn build(&self, _cfg: &EnvConfig, _seed: u64) -> Box<dyn GymEnv> {
            Box::new(Bandit {
                done: false,
                reward: 0.0,
            })
        }
    }

    fn dummy_dist() -> ConfigDistribution {
        let space = EnvSpace {
            use_case: UseCase::Lb,
            params: vec![
                ParamSpec::new("a", "", 0.0, 1.0, Scale::Linear).unwrap(),
                ParamSpec::new("b", "", 0.0, 1.0, Scale::Linear).unwrap(),
                ParamSpec::new("c", "", 0.0, 1.0, Scale::Linear).unwrap(),
                ParamSpec::new("d", "", 0.0, 1.0, Scale::Linear).unwrap(),
                ParamSpec::new("e", "", 0.0, 1.0, Scale::Linear).unwrap(),
            ],
        };
        ConfigDistribution::uniform(space)
    }

    fn bandit_snapshot(seed: u64) -> PolicySnapshot {
        PolicySnapshot::new_random(UseCase::Lb, ArchDescriptor::new(1, 2), seed)
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let snap = bandit_snapshot(1);
        let spec = TrainSpec {
            learning_rate: 0.0,
            value_learning_rate: 0.0,
            iterations: 5,
            k_configs: 2,
            n_envs: 2,
            ..TrainSpec::default()
        };
        let (out, curve) = train_uniform(&dummy_dist(), &snap, &spec, &BanditFactory).unwrap();
        assert_eq!(out.params, snap.params);
        assert_eq!(out.value_params, snap.value_params);
        assert_eq!(curve.len(), 5);
        assert_eq!(out.iteration, 5);
    }

    #[test]
    fn bandit_converges_to_optimal_arm() {
        let snap = bandit_snapshot(2);
        let spec = TrainSpec {
            k_configs: 4,
            n_envs: 2,
            iterations: 500,
            learning_rate: 0.02,
            entropy_weight: 0.001,
            seed: 7,
            ..TrainSpec::default()
        };
        let (out, curve) = train_uniform(&dummy_dist(), &snap, &spec, &BanditFactory).unwrap();
        let probs = out.action_probs(&[0.5]);
        assert!(probs[0] > 0.95, "P(best arm) = {} after 500 iters", probs[0]);
        assert!(curve.last().unwrap().mean_reward > 0.9);
    }

    #[test]
    fn training_is_seed_deterministic() {
        let snap = bandit_snapshot(3);
        let spec = TrainSpec {
            iterations: 20,
            k_configs: 3,
            n_envs: 2,
            seed: 11,
            ..TrainSpec::default()
        };
        let (a, _) = train_uniform(&dummy_dist(), &snap, &spec, &BanditFactory).unwrap();
        let (b, _) = train_uniform(&dummy_dist(), &snap, &spec, &BanditFactory).unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn bandit_curve_is_nondecreasing_after_smoothing() {
        let mut good = 0;
        for seed in 0..10u64 {
            let snap = bandit_snapshot(100 + seed);
            let spec = TrainSpec {
                k_configs: 4,
                n_envs: 2,
                iterations: 300,
                learning_rate: 0.02,
                entropy_weight: 0.001,
                seed,
                ..TrainSpec::default()
            };
            let (_, curve) = train_uniform(&dummy_dist(), &snap, &spec, &BanditFactory).unwrap();
            let rewards: Vec<f64> = curve.iter().map(|c| c.mean_reward).collect();
            let window = 50;
            let smooth: Vec<f64> = rewards
                .windows(window)
                .map(|w| w.iter().sum::<f64>() / window as f64)
                .collect();
            if smooth.windows(2).all(|w| w[1] >= w[0] - 1e-6) {
                good += 1;
            }
        }
        assert!(good >= 9, "monotone smoothed curves in only {good}/10 seeds");
    }

    // ------------------------------------------------------------------
    // Exact gradient check on a two-step MDP by trajectory enumeration.
    // ------------------------------------------------------------------

    /// Deterministic 3-state, 2-action MDP: s0 -a-> s_{1+a} -a'-> end.
    fn toy_features(state: usize) -> Vec<f64> {
        let mut f = vec![0.0; 3];
        f[state] = 1.0;
        f
    }

    fn toy_reward(state: usize, action: usize) -> f64 {
        const R: [[f64; 2]; 3] = [[0.1, 0.3], [1.0, 0.0], [0.2, 0.8]];
        R[state][action]
    }

    /// Expected estimator value: sum over trajectories of P(tau) * grad(tau).
    fn exact_gradient(snapshot: &PolicySnapshot) -> (Vec<f64>, f64) {
        let n = snapshot.params.len();
        let mut grad = vec![0.0; n];
        let mut j = 0.0;
        for a0 in 0..2usize {
            for a1 in 0..2usize {
                let s1 = 1 + a0;
                let p0 = snapshot.action_probs(&toy_features(0))[a0];
                let p1 = snapshot.action_probs(&toy_features(s1))[a1];
                let p = p0 * p1;
                let rollout = Rollout {
                    steps: vec![
                        RolloutStep {
                            features: toy_features(0),
                            action: a0,
                            reward: toy_reward(0, a0),
                        },
                        RolloutStep {
                            features: toy_features(s1),
                            action: a1,
                            reward: toy_reward(s1, a1),
                        },
                    ],
                    episode_reward: 0.0,
                };
                let (g, _, _) =
                    policy_gradient_estimate(snapshot, &[rollout], 1.0, 0.0, false).unwrap();
                for i in 0..n {
                    grad[i] += p * g[i];
                }
                j += p * (toy_reward(0, a0) + toy_reward(s1, a1));
            }
        }
        (grad, j)
    }

    fn exact_objective(snapshot: &PolicySnapshot) -> f64 {
        exact_gradient(snapshot).1
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let snapshot = PolicySnapshot::new_random(UseCase::Lb, ArchDescriptor::new(3, 2), 5);
        let (grad, _) = exact_gradient(&snapshot);
        let eps = 1e-5;
        let mut fd = vec![0.0; grad.len()];
        for i in 0..grad.len() {
            let mut plus = snapshot.clone();
            plus.params[i] += eps;
            let mut minus = snapshot.clone();
            minus.params[i] -= eps;
            fd[i] = (exact_objective(&plus) - exact_objective(&minus)) / (2.0 * eps);
        }
        let num: f64 = grad
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
        let rel = num / den.max(1e-300);
        assert!(rel < 1e-4, "relative gradient error {rel}");
    }
}
