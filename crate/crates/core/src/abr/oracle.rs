//! Ground-truth-bandwidth oracle for ABR.
//!
//! The oracle plans over a quantized model of the episode: buffer levels
//! snap up to a grid after every chunk, and the trace clock is reconstructed
//! from the state as `chunk_index * chunk_length - buffer` (total stall time
//! is dropped from the clock, which is exact whenever the plan avoids
//! rebuffering). The quantized transition is deterministic per state, so the
//! dynamic program is exact for this model and small instances can be
//! checked against exhaustive enumeration of action sequences.

use super::{AbrEnv, REWARD_BITRATE, REWARD_CHANGE, REWARD_REBUF};

pub const DEFAULT_BUFFER_GRID_S: f64 = 0.1;

/// Quantized episode model shared by the dynamic program and by test-side
/// enumeration.
#[derive(Debug, Clone)]
pub struct QuantizedAbr<'a> {
    pub env: &'a AbrEnv,
    pub grid_s: f64,
    levels: usize,
}

impl<'a> QuantizedAbr<'a> {
    pub fn new(env: &'a AbrEnv, grid_s: f64) -> Self {
        let levels = (env.max_buffer_s / grid_s).floor().max(0.0) as usize;
        QuantizedAbr { env, grid_s, levels }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    fn snap_up(&self, buffer_s: f64) -> usize {
        let lvl = (buffer_s / self.grid_s - 1e-9).ceil().max(0.0) as usize;
        lvl.min(self.levels)
    }

    /// One chunk download in the quantized model; returns the next buffer
    /// level and the chunk reward. `last` is `None` for the first chunk,
    /// which pays no change penalty.
    pub fn step(
        &self,
        chunk: usize,
        level: usize,
        last: Option<usize>,
        action: usize,
    ) -> (usize, f64) {
        let env = self.env;
        let buffer = level as f64 * self.grid_s;
        let clock = (chunk as f64 * env.chunk_length_s - buffer).max(0.0);
        let download = env.trace.transmit_time(clock, env.chunk_megabits(chunk, action))
            + env.min_rtt_ms / 1000.0;
        let rebuffer = (download - buffer).max(0.0);
        let next_buffer =
            ((buffer - download).max(0.0) + env.chunk_length_s).min(env.max_buffer_s);
        let change = match last {
            Some(last) => (env.bitrates_mbps[action] - env.bitrates_mbps[last]).abs(),
            None => 0.0,
        };
        let reward = REWARD_BITRATE * env.bitrates_mbps[action]
            + REWARD_REBUF * rebuffer
            + REWARD_CHANGE * change;
        (self.snap_up(next_buffer), reward)
    }
}

/// Maximum mean chunk reward over all bitrate sequences of the quantized
/// model, by backward dynamic programming over (chunk, buffer level, last
/// bitrate).
pub fn abr_optimal(env: &AbrEnv, grid_s: f64) -> f64 {
    let model = QuantizedAbr::new(env, grid_s);
    let n_chunks = env.n_chunks();
    let n_rates = env.n_bitrates();
    let n_levels = model.levels() + 1;

    // value[level][last] for chunk j+1; start from the terminal slab.
    let mut next = vec![0.0f64; n_levels * n_rates];
    let mut cur = vec![0.0f64; n_levels * n_rates];
    for chunk in (1..n_chunks).rev() {
        for level in 0..n_levels {
            for last in 0..n_rates {
                let mut best = f64::NEG_INFINITY;
                for action in 0..n_rates {
                    let (next_level, reward) = model.step(chunk, level, Some(last), action);
                    let v = reward
                        + if chunk + 1 < n_chunks {
                            next[next_level * n_rates + action]
                        } else {
                            0.0
                        };
                    if v > best {
                        best = v;
                    }
                }
                cur[level * n_rates + last] = best;
            }
        }
        std::mem::swap(&mut next, &mut cur);
    }
    // The episode starts with an empty buffer and no previous chunk.
    let mut best = f64::NEG_INFINITY;
    for action in 0..n_rates {
        let (next_level, reward) = model.step(0, 0, None, action);
        let v = reward
            + if n_chunks > 1 {
                next[next_level * n_rates + action]
            } else {
                0.0
            };
        if v > best {
            best = v;
        }
    }
    best / n_chunks as f64
}
