//! Small feed-forward policy network with a categorical head, plus the
//! matching value network used as the advantage baseline.
//!
//! Networks are plain `Vec<f64>` parameter vectors with hand-written
//! forward and backward passes; the sizes involved (tens of inputs, two
//! hidden layers of 32) do not justify a tensor library, and flat vectors
//! keep checkpoints and determinism trivial.

mod checkpoint;
mod train;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION,
};
pub use train::{
    policy_gradient_estimate, train_uniform, train_uniform_with_state, GradientStats,
    IterationStat, Rollout, RolloutStep, TrainSpec, TrainerState,
};

use crate::error::{Error, Result};
use crate::rng::child_rng;
use crate::space::UseCase;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_HIDDEN: [usize; 2] = [32, 32];

/// Layer widths for the fully-connected policy (hidden layers use tanh).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchDescriptor {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub n_actions: usize,
}

impl ArchDescriptor {
    pub fn new(input_dim: usize, n_actions: usize) -> Self {
        ArchDescriptor {
            input_dim,
            hidden: DEFAULT_HIDDEN.to_vec(),
            n_actions,
        }
    }

    /// All layer widths including input and output.
    pub fn dims(&self, output: usize) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden);
        dims.push(output);
        dims
    }

    pub fn policy_param_count(&self) -> usize {
        Mlp::new(self.dims(self.n_actions)).param_count()
    }

    pub fn value_param_count(&self) -> usize {
        Mlp::new(self.dims(1)).param_count()
    }
}

/// Fully-connected network with tanh hidden layers and a linear output.
#[derive(Debug, Clone)]
pub struct Mlp {
    dims: Vec<usize>,
}

impl Mlp {
    pub fn new(dims: Vec<usize>) -> Self {
        debug_assert!(dims.len() >= 2);
        Mlp { dims }
    }

    pub fn param_count(&self) -> usize {
        self.dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut params = Vec::with_capacity(self.param_count());
        for w in self.dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.random_range(-bound..bound));
            }
            params.extend(std::iter::repeat(0.0).take(fan_out));
        }
        params
    }

    /// Forward pass keeping every layer's activations for backprop.
    pub fn forward_cached(&self, params: &[f64], input: &[f64]) -> Vec<Vec<f64>> {
        debug_assert_eq!(params.len(), self.param_count());
        debug_assert_eq!(input.len(), self.dims[0]);
        let n_layers = self.dims.len() - 1;
        let mut acts = Vec::with_capacity(self.dims.len());
        acts.push(input.to_vec());
        let mut offset = 0;
        for (l, w) in self.dims.windows(2).enumerate() {
            let (din, dout) = (w[0], w[1]);
            let weights = &params[offset..offset + din * dout];
            let biases = &params[offset + din * dout..offset + din * dout + dout];
            offset += din * dout + dout;
            let prev = acts.last().unwrap();
            let mut out = vec![0.0; dout];
            for i in 0..dout {
                let row = &weights[i * din..(i + 1) * din];
                let mut z = biases[i];
                for (a, b) in row.iter().zip(prev) {
                    z += a * b;
                }
                out[i] = if l + 1 < n_layers { z.tanh() } else { z };
            }
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, params: &[f64], input: &[f64]) -> Vec<f64> {
        self.forward_cached(params, input).pop().unwrap()
    }

    /// Accumulate the parameter gradient of `delta_out . output` into
    /// `grad`, reusing activations from [`Mlp::forward_cached`].
    pub fn backward_into(
        &self,
        params: &[f64],
        acts: &[Vec<f64>],
        delta_out: &[f64],
        grad: &mut [f64],
    ) {
        debug_assert_eq!(grad.len(), self.param_count());
        let n_layers = self.dims.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut off = 0;
        for w in self.dims.windows(2) {
            offsets.push(off);
            off += w[0] * w[1] + w[1];
        }
        let mut delta = delta_out.to_vec();
        for l in (0..n_layers).rev() {
            let (din, dout) = (self.dims[l], self.dims[l + 1]);
            let base = offsets[l];
            let prev = &acts[l];
            for i in 0..dout {
                let di = delta[i];
                let row = &mut grad[base + i * din..base + (i + 1) * din];
                for (g, a) in row.iter_mut().zip(prev) {
                    *g += di * a;
                }
                grad[base + din * dout + i] += di;
            }
            if l > 0 {
                let weights = &params[base..base + din * dout];
                let mut next = vec![0.0; din];
                for (j, slot) in next.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for i in 0..dout {
                        acc += weights[i * din + j] * delta[i];
                    }
                    // tanh'(z) = 1 - a^2 with a = tanh(z).
                    *slot = acc * (1.0 - prev[j] * prev[j]);
                }
                delta = next;
            }
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Versioned parameters of one policy (and its value baseline) for a use
/// case.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySnapshot {
    pub version: u32,
    pub use_case: UseCase,
    pub arch: ArchDescriptor,
    pub iteration: u64,
    pub params: Vec<f64>,
    pub value_params: Vec<f64>,
}

impl PolicySnapshot {
    pub fn new_random(use_case: UseCase, arch: ArchDescriptor, seed: u64) -> Self {
        let policy_net = Mlp::new(arch.dims(arch.n_actions));
        let value_net = Mlp::new(arch.dims(1));
        let mut rng = child_rng(seed, &[0x70]);
        let params = policy_net.init_params(&mut rng);
        let value_params = value_net.init_params(&mut rng);
        PolicySnapshot {
            version: checkpoint::CHECKPOINT_VERSION,
            use_case,
            arch,
            iteration: 0,
            params,
            value_params,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.len() != self.arch.policy_param_count() {
            return Err(Error::Checkpoint(format!(
                "policy parameter count {} does not match architecture ({})",
                self.params.len(),
                self.arch.policy_param_count()
            )));
        }
        if self.value_params.len() != self.arch.value_param_count() {
            return Err(Error::Checkpoint("value parameter count mismatch".into()));
        }
        if self
            .params
            .iter()
            .chain(&self.value_params)
            .any(|p| !p.is_finite())
        {
            return Err(Error::Checkpoint("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn policy_net(&self) -> Mlp {
        Mlp::new(self.arch.dims(self.arch.n_actions))
    }

    pub fn value_net(&self) -> Mlp {
        Mlp::new(self.arch.dims(1))
    }

    pub fn logits(&self, features: &[f64]) -> Vec<f64> {
        self.policy_net().forward(&self.params, features)
    }

    pub fn action_probs(&self, features: &[f64]) -> Vec<f64> {
        softmax(&self.logits(features))
    }

    pub fn value(&self, features: &[f64]) -> f64 {
        self.value_net().forward(&self.value_params, features)[0]
    }
}

/// Sample (or argmax, when `greedy`) an action from the categorical head.
pub fn policy_act(
    snapshot: &PolicySnapshot,
    features: &[f64],
    rng: &mut ChaCha8Rng,
    greedy: bool,
) -> usize {
    let probs = snapshot.action_probs(features);
    if greedy {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, &p) in probs.iter().enumerate() {
            if p > best.0 {
                best = (p, i);
            }
        }
        return best.1;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
