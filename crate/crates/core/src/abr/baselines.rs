//! Rule-based ABR policies: buffer-based BBA and RobustMPC.

use super::{AbrDecider, AbrEnv, AbrState, REWARD_BITRATE, REWARD_CHANGE, REWARD_REBUF};

/// Buffer-based bitrate selection: lowest rate below the reservoir, highest
/// above reservoir + cushion, linear across the ladder in between.
#[derive(Debug, Clone)]
pub struct Bba {
    pub reservoir_s: f64,
    pub cushion_s: f64,
}

impl Bba {
    pub fn new(reservoir_s: f64, cushion_s: f64) -> Self {
        Bba {
            reservoir_s,
            cushion_s,
        }
    }

    /// Scale the reservoir and cushion to the environment's buffer cap so
    /// the full ladder stays reachable on tiny buffers.
    pub fn for_env(env: &AbrEnv) -> Self {
        Bba {
            reservoir_s: 0.1 * env.max_buffer_s,
            cushion_s: 0.7 * env.max_buffer_s,
        }
    }

    pub fn decide_for_buffer(&self, buffer_s: f64, n_bitrates: usize) -> usize {
        let top = n_bitrates - 1;
        if buffer_s <= self.reservoir_s {
            0
        } else if buffer_s >= self.reservoir_s + self.cushion_s {
            top
        } else {
            let frac = (buffer_s - self.reservoir_s) / self.cushion_s;
            ((frac * top as f64).floor() as usize).min(top)
        }
    }
}

impl AbrDecider for Bba {
    fn decide(&mut self, state: &AbrState, env: &AbrEnv) -> usize {
        self.decide_for_buffer(state.buffer_s, env.n_bitrates())
    }
}

/// RobustMPC: harmonic-mean throughput prediction discounted by the worst
/// recent prediction error, then exhaustive search over bitrate sequences.
#[derive(Debug, Clone)]
pub struct RobustMpc {
    pub horizon: usize,
    past_errors: Vec<f64>,
    last_prediction: Option<f64>,
}

const MPC_ERROR_WINDOW: usize = 5;

impl RobustMpc {
    pub fn new(horizon: usize) -> Self {
        RobustMpc {
            horizon: horizon.max(1),
            past_errors: Vec::new(),
            last_prediction: None,
        }
    }

    /// Harmonic mean of the last five throughput samples, discounted by
    /// (1 + max relative error of recent predictions).
    fn predict_throughput(&mut self, state: &AbrState) -> f64 {
        let tail: Vec<f64> = state
            .throughput_history
            .iter()
            .rev()
            .take(MPC_ERROR_WINDOW)
            .copied()
            .collect();
        let harmonic = tail.len() as f64 / tail.iter().map(|t| 1.0 / t.max(1e-9)).sum::<f64>();

        if let Some(pred) = self.last_prediction {
            let actual = *state.throughput_history.last().unwrap();
            if actual > 1e-9 {
                self.past_errors.push((pred - actual).abs() / actual);
                if self.past_errors.len() > MPC_ERROR_WINDOW {
                    self.past_errors.remove(0);
                }
            }
        }
        let max_err = self.past_errors.iter().copied().fold(0.0, f64::max);
        let robust = harmonic / (1.0 + max_err);
        self.last_prediction = Some(robust);
        robust
    }

    /// Best first action over all bitrate sequences of the given depth,
    /// simulating buffer evolution under the predicted throughput.
    fn search(
        env: &AbrEnv,
        chunk: usize,
        depth: usize,
        buffer: f64,
        last: usize,
        predicted: f64,
    ) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for b in 0..env.n_bitrates() {
            let download =
                env.chunk_megabits(chunk, b) / predicted.max(1e-9) + env.min_rtt_ms / 1000.0;
            let rebuffer = (download - buffer).max(0.0);
            let next_buffer =
                ((buffer - download).max(0.0) + env.chunk_length_s).min(env.max_buffer_s);
            let reward = REWARD_BITRATE * env.bitrates_mbps[b]
                + REWARD_REBUF * rebuffer
                + REWARD_CHANGE * (env.bitrates_mbps[b] - env.bitrates_mbps[last]).abs();
            let total = if depth > 1 && chunk + 1 < env.n_chunks() {
                reward
                    + Self::search(env, chunk + 1, depth - 1, next_buffer, b, predicted).0
            } else {
                reward
            };
            if total > best.0 {
                best = (total, b);
            }
        }
        best
    }
}

impl AbrDecider for RobustMpc {
    fn decide(&mut self, state: &AbrState, env: &AbrEnv) -> usize {
        let predicted = self.predict_throughput(state);
        let remaining = env.n_chunks() - state.next_chunk;
        let depth = self.horizon.min(remaining).max(1);
        Self::search(
            env,
            state.next_chunk,
            depth,
            state.buffer_s,
            state.last_bitrate,
            predicted,
        )
        .1
    }
}
