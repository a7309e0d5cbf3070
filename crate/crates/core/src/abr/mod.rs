//! Chunk-level adaptive-bitrate streaming simulator.
//!
//! An episode downloads a fixed number of video chunks over a bandwidth
//! trace. Each step picks a bitrate for the next chunk; the download drains
//! the playback buffer, stalls when it empties, and the clock sleeps when
//! the buffer would overflow. Chunk reward follows the linear QoE form
//! `alpha * rebuffer + beta * bitrate + gamma * |bitrate change|`, averaged
//! over chunks.

mod baselines;
mod oracle;

pub use baselines::{Bba, RobustMpc};
pub use oracle::{abr_optimal, QuantizedAbr, DEFAULT_BUFFER_GRID_S};

use crate::error::{Error, Result};
use crate::rng::child_rng;
use crate::space::{AbrParams, EnvConfig};
use crate::trace::{gen_abr_trace, mix_recorded_trace, BandwidthTrace, TraceCorpus};
use rand::Rng;

/// Rebuffer coefficient (per second of stall).
pub const REWARD_REBUF: f64 = -10.0;
/// Bitrate coefficient (per Mbps).
pub const REWARD_BITRATE: f64 = 1.0;
/// Bitrate-change coefficient (per Mbps of |change|).
pub const REWARD_CHANGE: f64 = -1.0;

/// Default encoding ladder in Mbps.
pub const DEFAULT_LADDER: [f64; 6] = [0.3, 0.75, 1.2, 1.85, 2.85, 4.3];

/// Throughput-history length fed to policies, most recent last.
pub const HISTORY_LEN: usize = 8;

/// Deterministic per-chunk size variation around `bitrate * chunk_length`.
pub const CHUNK_SIZE_JITTER: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct AbrEnv {
    pub trace: BandwidthTrace,
    /// Strictly increasing encoding ladder in Mbps.
    pub bitrates_mbps: Vec<f64>,
    pub chunk_length_s: f64,
    pub max_buffer_s: f64,
    pub min_rtt_ms: f64,
    /// Bytes per (chunk, bitrate).
    pub chunk_sizes: Vec<Vec<f64>>,
    /// Wall-clock horizon after which the episode truncates (recorded
    /// traces end; synthetic traces extend indefinitely).
    pub hard_stop_s: f64,
}

impl AbrEnv {
    /// Build an environment from a config point and a seed. When a corpus
    /// and mixing weight are given, the bandwidth trace may be a recorded
    /// one; everything else still comes from the config.
    pub fn from_config(cfg: &EnvConfig, seed: u64, mix: Option<(&TraceCorpus, f64)>) -> Result<Self> {
        let p = AbrParams::from_config(cfg)?;
        let mut rng = child_rng(seed, &[0x41]);
        let (trace, hard_stop) = match mix {
            Some((corpus, w)) => {
                let t = mix_recorded_trace(cfg, corpus, w, p.video_length_s, &mut rng)?;
                let stop = if t.duration() < p.video_length_s {
                    t.duration()
                } else {
                    f64::INFINITY
                };
                (t, stop)
            }
            None => (gen_abr_trace(cfg, &mut rng)?, f64::INFINITY),
        };
        let n_chunks = ((p.video_length_s / p.chunk_length_s).round() as usize).max(1);
        let chunk_sizes = chunk_size_table(&DEFAULT_LADDER, p.chunk_length_s, n_chunks, seed);
        Ok(AbrEnv {
            trace,
            bitrates_mbps: DEFAULT_LADDER.to_vec(),
            chunk_length_s: p.chunk_length_s,
            max_buffer_s: p.max_buffer_s,
            min_rtt_ms: p.min_rtt_ms,
            chunk_sizes,
            hard_stop_s: hard_stop,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.bitrates_mbps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid_argument("ladder must be strictly increasing"));
        }
        if self.chunk_sizes.is_empty() {
            return Err(Error::invalid_argument("need at least one chunk"));
        }
        if self.chunk_sizes.iter().any(|c| c.len() != self.bitrates_mbps.len()) {
            return Err(Error::invalid_argument("chunk size table arity mismatch"));
        }
        Ok(())
    }

    pub fn n_chunks(&self) -> usize {
        self.chunk_sizes.len()
    }

    pub fn n_bitrates(&self) -> usize {
        self.bitrates_mbps.len()
    }

    pub fn chunk_megabits(&self, chunk: usize, bitrate: usize) -> f64 {
        self.chunk_sizes[chunk][bitrate] * 8.0 / 1e6
    }
}

/// Bytes per (chunk, bitrate): nominal `bitrate * chunk_length` with a
/// deterministic per-chunk factor in [1-jitter, 1+jitter].
pub fn chunk_size_table(
    ladder: &[f64],
    chunk_length_s: f64,
    n_chunks: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = child_rng(seed, &[0x43]);
    (0..n_chunks)
        .map(|_| {
            let factor = 1.0 + rng.random_range(-CHUNK_SIZE_JITTER..CHUNK_SIZE_JITTER);
            ladder
                .iter()
                .map(|br| br * 1e6 / 8.0 * chunk_length_s * factor)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AbrState {
    /// Measured download throughput of past chunks in Mbps, most recent last.
    pub throughput_history: Vec<f64>,
    pub buffer_s: f64,
    /// Index of the previously downloaded chunk's bitrate; the first chunk
    /// pays no change penalty and reports the lowest rung here.
    pub last_bitrate: usize,
    pub started: bool,
    pub next_chunk: usize,
    pub clock_s: f64,
    pub total_rebuffer_s: f64,
    pub total_sleep_s: f64,
    pub total_download_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbrStepResult {
    pub download_time_s: f64,
    pub rebuffer_s: f64,
    pub new_buffer_s: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AbrLogRow {
    pub chunk: usize,
    pub bitrate_index: usize,
    pub bitrate_mbps: f64,
    pub rebuffer_s: f64,
    pub buffer_s: f64,
    pub reward: f64,
}

/// Sequential episode state machine over an [`AbrEnv`].
#[derive(Debug, Clone)]
pub struct AbrSim {
    env: AbrEnv,
    state: AbrState,
    truncated: bool,
}

impl AbrSim {
    pub fn new(env: AbrEnv) -> Self {
        let state = AbrState {
            throughput_history: vec![env.bitrates_mbps[0]; HISTORY_LEN],
            buffer_s: 0.0,
            last_bitrate: 0,
            started: false,
            next_chunk: 0,
            clock_s: 0.0,
            total_rebuffer_s: 0.0,
            total_sleep_s: 0.0,
            total_download_s: 0.0,
        };
        AbrSim {
            env,
            state,
            truncated: false,
        }
    }

    pub fn env(&self) -> &AbrEnv {
        &self.env
    }

    pub fn state(&self) -> &AbrState {
        &self.state
    }

    pub fn done(&self) -> bool {
        self.truncated || self.state.next_chunk >= self.env.n_chunks()
    }

    #[cfg(test)]
    pub(crate) fn state_mut_for_tests(&mut self) -> &mut AbrState {
        &mut self.state
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Download the next chunk at `bitrate_index`.
    ///
    /// Returns `Err(InvalidArgument)` for a bad index and flags truncation
    /// when the recorded trace ran out before this chunk could start.
    pub fn step(&mut self, bitrate_index: usize) -> Result<AbrStepResult> {
        if self.done() {
            return Err(Error::invalid_argument("episode is over"));
        }
        if bitrate_index >= self.env.n_bitrates() {
            return Err(Error::invalid_argument(format!(
                "bitrate index {bitrate_index} out of range"
            )));
        }
        let s = &mut self.state;
        if s.clock_s >= self.env.hard_stop_s {
            self.truncated = true;
            return Err(Error::invalid_argument("trace exhausted"));
        }
        let chunk = s.next_chunk;
        let megabits = self.env.chunk_megabits(chunk, bitrate_index);
        let download = self.env.trace.transmit_time(s.clock_s, megabits)
            + self.env.min_rtt_ms / 1000.0;
        let rebuffer = (download - s.buffer_s).max(0.0);
        let drained = (s.buffer_s - download).max(0.0) + self.env.chunk_length_s;
        let sleep = (drained - self.env.max_buffer_s).max(0.0);
        let new_buffer = drained - sleep;

        let bitrate = self.env.bitrates_mbps[bitrate_index];
        let change = if s.started {
            (bitrate - self.env.bitrates_mbps[s.last_bitrate]).abs()
        } else {
            0.0
        };
        let reward = REWARD_BITRATE * bitrate + REWARD_REBUF * rebuffer + REWARD_CHANGE * change;

        s.clock_s += download + sleep;
        s.buffer_s = new_buffer;
        s.total_rebuffer_s += rebuffer;
        s.total_sleep_s += sleep;
        s.total_download_s += download;
        s.throughput_history.remove(0);
        s.throughput_history.push(megabits / download.max(1e-9));
        s.last_bitrate = bitrate_index;
        s.started = true;
        s.next_chunk += 1;

        Ok(AbrStepResult {
            download_time_s: download,
            rebuffer_s: rebuffer,
            new_buffer_s: new_buffer,
            reward,
        })
    }
}

/// Mean chunk reward for `(bitrate Mbps, rebuffer s, |change| Mbps)` rows.
pub fn abr_reward(chunks: &[(f64, f64, f64)]) -> Result<f64> {
    if chunks.is_empty() {
        return Err(Error::invalid_argument("reward over zero chunks"));
    }
    let sum: f64 = chunks
        .iter()
        .map(|&(br, rb, ch)| REWARD_BITRATE * br + REWARD_REBUF * rb + REWARD_CHANGE * ch)
        .sum();
    Ok(sum / chunks.len() as f64)
}

/// Chunk-by-chunk decision rule (rule-based baselines implement this).
pub trait AbrDecider {
    fn decide(&mut self, state: &AbrState, env: &AbrEnv) -> usize;
}

/// Run a full episode under a decision rule; returns the mean chunk reward
/// and per-chunk log rows.
pub fn run_abr_episode(env: AbrEnv, policy: &mut dyn AbrDecider) -> (f64, Vec<AbrLogRow>) {
    let mut sim = AbrSim::new(env);
    let mut rows = Vec::new();
    while !sim.done() {
        let idx = policy.decide(sim.state(), sim.env());
        let chunk = sim.state().next_chunk;
        match sim.step(idx) {
            Ok(res) => rows.push(AbrLogRow {
                chunk,
                bitrate_index: idx,
                bitrate_mbps: sim.env().bitrates_mbps[idx],
                rebuffer_s: res.rebuffer_s,
                buffer_s: res.new_buffer_s,
                reward: res.reward,
            }),
            Err(_) => break, // truncated
        }
    }
    let reward = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.reward).sum::<f64>() / rows.len() as f64
    };
    (reward, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::child_rng;
    use crate::space::UseCase;
    use proptest::prelude::*;

    pub(crate) fn test_env(
        bandwidth: f64,
        chunk_len: f64,
        max_buffer: f64,
        n_chunks: usize,
    ) -> AbrEnv {
        let ladder = DEFAULT_LADDER.to_vec();
        let chunk_sizes = (0..n_chunks)
            .map(|_| ladder.iter().map(|br| br * 1e6 / 8.0 * chunk_len).collect())
            .collect();
        AbrEnv {
            trace: BandwidthTrace::constant(bandwidth, 1e9),
            bitrates_mbps: ladder,
            chunk_length_s: chunk_len,
            max_buffer_s: max_buffer,
            min_rtt_ms: 0.0,
            chunk_sizes,
            hard_stop_s: f64::INFINITY,
        }
    }

    #[test]
    fn hand_integrated_step() {
        // Constant 1 Mbps, chunk of 4 Mbit, rtt 0, buffer preloaded to 4 s,
        // chunk length 4 s: download 4 s, no rebuffer, buffer back to 4 s.
        let mut env = test_env(1.0, 4.0, 10.0, 3);
        env.chunk_sizes = vec![vec![0.5e6; 6]; 3]; // 0.5 MB = 4 Mbit
        let mut sim = AbrSim::new(env);
        sim.state.buffer_s = 4.0;
        let res = sim.step(0).unwrap();
        assert!((res.download_time_s - 4.0).abs() < 1e-12);
        assert_eq!(res.rebuffer_s, 0.0);
        assert!((res.new_buffer_s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn empty_buffer_rebuffers_for_whole_download() {
        let env = test_env(2.0, 4.0, 30.0, 2);
        let mut sim = AbrSim::new(env);
        let res = sim.step(3).unwrap();
        assert!((res.rebuffer_s - res.download_time_s).abs() < 1e-12);
    }

    #[test]
    fn instant_download_fills_buffer_to_cap() {
        // Huge bandwidth and zero rtt: buffer grows by one chunk per step
        // until the cap, then the clock sleeps the excess.
        let env = test_env(1e9, 4.0, 6.0, 5);
        let mut sim = AbrSim::new(env);
        sim.step(0).unwrap();
        assert!((sim.state().buffer_s - 4.0).abs() < 1e-6);
        let res = sim.step(0).unwrap();
        assert!((res.new_buffer_s - 6.0).abs() < 1e-6);
        assert!(sim.state().total_sleep_s > 0.0);
    }

    #[test]
    fn wall_clock_equals_download_plus_sleep() {
        let cfg = EnvConfig {
            use_case: UseCase::Abr,
            values: vec![10.0, 4.0, 80.0, 80.0, 5.0, 4.0],
        };
        let env = AbrEnv::from_config(&cfg, 9, None).unwrap();
        let mut sim = AbrSim::new(env);
        let mut rng = child_rng(10, &[]);
        while !sim.done() {
            let a = rng.random_range(0..sim.env().n_bitrates());
            if sim.step(a).is_err() {
                break;
            }
        }
        let s = sim.state();
        assert!((s.clock_s - (s.total_download_s + s.total_sleep_s)).abs() < 1e-9);
    }

    #[test]
    fn reward_formula_matches_examples() {
        assert_eq!(abr_reward(&[(0.0, 0.0, 0.0)]).unwrap(), 0.0);
        let r = abr_reward(&[(1.0, 0.0, 0.0), (2.0, 0.5, 1.0)]).unwrap();
        assert!((r - (-1.5)).abs() < 1e-12);
        assert!(abr_reward(&[]).is_err());
    }

    #[test]
    fn truncation_on_short_recorded_trace() {
        let mut env = test_env(0.4, 4.0, 10.0, 50);
        env.hard_stop_s = 30.0;
        let mut sim = AbrSim::new(env);
        let mut steps = 0;
        while !sim.done() {
            if sim.step(5).is_err() {
                break;
            }
            steps += 1;
        }
        assert!(sim.truncated());
        assert!(steps > 0 && steps < 50);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn buffer_stays_in_bounds(seed in 0u64..1000) {
            let mut rng = child_rng(seed, &[1]);
            let cfg = EnvConfig {
                use_case: UseCase::Abr,
                values: vec![
                    rng.random_range(2.0..20.0),
                    rng.random_range(1.0..4.0),
                    rng.random_range(20.0..200.0),
                    rng.random_range(40.0..60.0),
                    rng.random_range(2.0..10.0),
                    rng.random_range(2.0..20.0),
                ],
            };
            let env = AbrEnv::from_config(&cfg, seed, None).unwrap();
            let max_buffer = env.max_buffer_s;
            let mut sim = AbrSim::new(env);
            while !sim.done() {
                let a = rng.random_range(0..sim.env().n_bitrates());
                match sim.step(a) {
                    Ok(res) => {
                        prop_assert!(res.rebuffer_s >= 0.0);
                        prop_assert!(res.new_buffer_s >= 0.0);
                        prop_assert!(res.new_buffer_s <= max_buffer + 1e-9);
                    }
                    Err(_) => break,
                }
            }
        }

        #[test]
        fn reward_is_linear_in_concatenation(
            a in proptest::collection::vec((0.0f64..5.0, 0.0f64..3.0, 0.0f64..4.0), 1..20),
            b in proptest::collection::vec((0.0f64..5.0, 0.0f64..3.0, 0.0f64..4.0), 1..20),
        ) {
            let ra = abr_reward(&a).unwrap();
            let rb = abr_reward(&b).unwrap();
            let mut joined = a.clone();
            joined.extend_from_slice(&b);
            let rj = abr_reward(&joined).unwrap();
            let lhs = rj * joined.len() as f64;
            let rhs = ra * a.len() as f64 + rb * b.len() as f64;
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
