//! Monitor-interval congestion-control simulator.
//!
//! A single bottleneck link serves fixed-size packets at the trace
//! bandwidth through a drop-tail queue, with independent random loss and
//! optional Gaussian delay noise. The sender paces packets at a fixed rate
//! within each monitor interval (MI) and adjusts the rate between MIs from
//! the previous interval's aggregate report. Packet latency counts waiting
//! time plus propagation, so an uncongested link reports exactly the
//! two-way propagation delay.

mod baselines;

pub use baselines::{BbrLike, CubicLike};

use crate::error::{Error, Result};
use crate::rng::child_rng;
use crate::space::EnvConfig;
use crate::trace::{gen_cc_trace, mix_recorded_trace, BandwidthTrace, CcSideChannel, TraceCorpus};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::VecDeque;

/// Throughput coefficient (per packet/s).
pub const REWARD_THROUGHPUT: f64 = 120.0;
/// Latency coefficient (per second of average RTT).
pub const REWARD_LATENCY: f64 = -1000.0;
/// Loss-rate coefficient (per unit fraction).
pub const REWARD_LOSS: f64 = -2000.0;

pub const PACKET_SIZE_BYTES: f64 = 1500.0;
/// Default episode length; the CC parameter tables do not include one.
pub const DEFAULT_EPISODE_S: f64 = 10.0;
/// Monitor interval = this factor times the smoothed RTT.
pub const MI_RTT_FACTOR: f64 = 1.0;
/// Sending-rate clamp in packets/s.
pub const MIN_RATE_PPS: f64 = 2.0;
pub const MAX_RATE_PPS: f64 = 20_000.0;

pub fn mbps_to_pps(mbps: f64) -> f64 {
    mbps * 1e6 / 8.0 / PACKET_SIZE_BYTES
}

const PACKET_MEGABITS: f64 = PACKET_SIZE_BYTES * 8.0 / 1e6;

#[derive(Debug, Clone)]
pub struct CcEnv {
    pub trace: BandwidthTrace,
    pub side: CcSideChannel,
    pub duration_s: f64,
}

impl CcEnv {
    pub fn from_config(
        cfg: &EnvConfig,
        seed: u64,
        duration_s: f64,
        mix: Option<(&TraceCorpus, f64)>,
    ) -> Result<Self> {
        let mut rng = child_rng(seed, &[0x51]);
        let (trace, side) = match mix {
            Some((corpus, w)) => {
                let side = CcSideChannel::from_config(cfg)?;
                let trace = mix_recorded_trace(cfg, corpus, w, duration_s, &mut rng)?;
                (trace, side)
            }
            None => gen_cc_trace(cfg, duration_s, &mut rng)?,
        };
        let duration_s = duration_s.min(trace.duration().max(0.1));
        Ok(CcEnv {
            trace,
            side,
            duration_s,
        })
    }

    pub fn min_rtt_s(&self) -> f64 {
        2.0 * self.side.one_way_latency_ms / 1000.0
    }
}

/// Aggregate statistics over one monitor interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorReport {
    pub duration_s: f64,
    /// Delivered packets per second.
    pub throughput_pps: f64,
    /// Average RTT of packets delivered in the interval, in seconds.
    pub avg_latency_s: f64,
    /// Lost fraction of packets sent in the interval.
    pub loss_rate: f64,
    /// avg_rtt / min_rtt - 1.
    pub rtt_inflation: f64,
    pub sending_rate_pps: f64,
    pub receiving_rate_pps: f64,
    pub min_rtt_s: f64,
    pub avg_rtt_s: f64,
}

/// Cumulative packet accounting for conservation checks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PacketCounters {
    pub sent: u64,
    pub delivered: u64,
    pub dropped_queue: u64,
    pub dropped_random: u64,
}

/// Sequential link + queue state across monitor intervals.
#[derive(Debug, Clone)]
pub struct CcSim {
    env: CcEnv,
    rng: ChaCha8Rng,
    clock_s: f64,
    next_send_s: f64,
    /// Service-start times of admitted packets that have not started yet.
    waiting: VecDeque<f64>,
    last_finish_s: f64,
    /// (bottleneck egress time, rtt) of admitted packets not yet counted.
    /// Counting by egress keeps per-window throughput under the fluid
    /// bound; delay noise only perturbs the RTT statistics.
    in_flight: Vec<(f64, f64)>,
    counters: PacketCounters,
    min_rtt_seen_s: f64,
    smoothed_rtt_s: f64,
}

impl CcSim {
    pub fn new(env: CcEnv, seed: u64) -> Self {
        let min_rtt = env.min_rtt_s();
        CcSim {
            env,
            rng: child_rng(seed, &[0x52]),
            clock_s: 0.0,
            next_send_s: 0.0,
            waiting: VecDeque::new(),
            last_finish_s: 0.0,
            in_flight: Vec::new(),
            counters: PacketCounters::default(),
            min_rtt_seen_s: min_rtt,
            smoothed_rtt_s: min_rtt,
        }
    }

    pub fn env(&self) -> &CcEnv {
        &self.env
    }

    pub fn clock_s(&self) -> f64 {
        self.clock_s
    }

    pub fn done(&self) -> bool {
        self.clock_s >= self.env.duration_s
    }

    pub fn counters(&self) -> PacketCounters {
        self.counters
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    /// Packets admitted and waiting for service (drop-tail bound).
    pub fn queue_occupancy(&self) -> usize {
        self.waiting.len()
    }

    pub fn smoothed_rtt_s(&self) -> f64 {
        self.smoothed_rtt_s
    }

    /// Monitor interval sized from the smoothed RTT.
    pub fn next_mi_length_s(&self) -> f64 {
        (MI_RTT_FACTOR * self.smoothed_rtt_s).max(1e-3)
    }

    /// Run one monitor interval at `sending_rate_pps` packets/s.
    pub fn step(&mut self, sending_rate_pps: f64, mi_length_s: f64) -> Result<MonitorReport> {
        if !(mi_length_s > 0.0) {
            return Err(Error::invalid_argument("mi_length must be > 0"));
        }
        let rate = sending_rate_pps.clamp(MIN_RATE_PPS, MAX_RATE_PPS);
        let t0 = self.clock_s;
        let t1 = (t0 + mi_length_s).min(self.env.duration_s);
        let one_way_s = self.env.side.one_way_latency_ms / 1000.0;
        let noise = if self.env.side.delay_noise_ms > 0.0 {
            Some(Normal::new(0.0, self.env.side.delay_noise_ms / 1000.0).unwrap())
        } else {
            None
        };

        let mut sent_in_mi = 0u64;
        let mut dropped_in_mi = 0u64;
        if self.next_send_s < t0 {
            self.next_send_s = t0;
        }
        while self.next_send_s < t1 {
            let s = self.next_send_s;
            self.next_send_s += 1.0 / rate;
            self.counters.sent += 1;
            sent_in_mi += 1;

            if self.env.side.loss_rate > 0.0 && self.rng.random::<f64>() < self.env.side.loss_rate
            {
                self.counters.dropped_random += 1;
                dropped_in_mi += 1;
                continue;
            }
            // Packets that started service by now have left the waiting room.
            while self.waiting.front().is_some_and(|&st| st <= s) {
                self.waiting.pop_front();
            }
            if self.waiting.len() >= self.env.side.queue_packets {
                self.counters.dropped_queue += 1;
                dropped_in_mi += 1;
                continue;
            }
            let start = self.last_finish_s.max(s);
            let finish = start + self.env.trace.transmit_time(start, PACKET_MEGABITS);
            self.last_finish_s = finish;
            self.waiting.push_back(start);

            let wait = start - s;
            let extra = noise
                .as_ref()
                .map(|n| n.sample(&mut self.rng).max(0.0))
                .unwrap_or(0.0);
            let rtt = 2.0 * one_way_s + wait + extra;
            self.in_flight.push((start, rtt));
        }

        // Deliveries that completed within this interval.
        let mut delivered = 0u64;
        let mut rtt_sum = 0.0;
        self.in_flight.retain(|&(at, rtt)| {
            if at <= t1 {
                delivered += 1;
                rtt_sum += rtt;
                false
            } else {
                true
            }
        });
        self.counters.delivered += delivered;

        let window = t1 - t0;
        let throughput = if window > 0.0 {
            delivered as f64 / window
        } else {
            0.0
        };
        let avg_rtt = if delivered > 0 {
            rtt_sum / delivered as f64
        } else {
            0.0
        };
        if delivered > 0 {
            self.min_rtt_seen_s = self.min_rtt_seen_s.min(avg_rtt);
            self.smoothed_rtt_s = 0.875 * self.smoothed_rtt_s + 0.125 * avg_rtt;
        }
        let min_rtt = self.min_rtt_seen_s;
        let inflation = if delivered > 0 && min_rtt > 0.0 {
            (avg_rtt / min_rtt - 1.0).max(0.0)
        } else {
            0.0
        };
        self.clock_s = t1;

        Ok(MonitorReport {
            duration_s: window,
            throughput_pps: throughput,
            avg_latency_s: avg_rtt,
            loss_rate: if sent_in_mi > 0 {
                dropped_in_mi as f64 / sent_in_mi as f64
            } else {
                0.0
            },
            rtt_inflation: inflation,
            sending_rate_pps: rate,
            receiving_rate_pps: throughput,
            min_rtt_s: min_rtt,
            avg_rtt_s: avg_rtt,
        })
    }
}

/// Mean MI reward: `a * throughput + b * latency + c * loss`.
pub fn cc_reward(reports: &[MonitorReport]) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::invalid_argument("reward over zero intervals"));
    }
    let sum: f64 = reports
        .iter()
        .map(|r| {
            REWARD_THROUGHPUT * r.throughput_pps
                + REWARD_LATENCY * r.avg_latency_s
                + REWARD_LOSS * r.loss_rate
        })
        .sum();
    Ok(sum / reports.len() as f64)
}

/// Per-MI sending-rate controller (rule-based baselines implement this).
pub trait CcPolicy {
    /// Called once at episode start with the handshake RTT.
    fn reset(&mut self, min_rtt_hint_s: f64);
    /// Next sending rate in packets/s given the previous MI's report.
    fn next_rate(&mut self, last: Option<&MonitorReport>) -> f64;
}

/// Apply a multiplicative rate action: `rate * (1 + delta)` upward,
/// `rate / (1 - delta)` downward, clamped.
pub fn apply_rate_delta(rate_pps: f64, delta: f64) -> f64 {
    let delta = delta.clamp(-0.5, 0.5);
    let next = if delta >= 0.0 {
        rate_pps * (1.0 + delta)
    } else {
        rate_pps / (1.0 - delta)
    };
    next.clamp(MIN_RATE_PPS, MAX_RATE_PPS)
}

/// Run monitor intervals until the trace duration is exhausted; returns the
/// mean MI reward and all reports.
pub fn cc_episode(env: CcEnv, policy: &mut dyn CcPolicy, seed: u64) -> (f64, Vec<MonitorReport>) {
    let mut sim = CcSim::new(env, seed);
    policy.reset(sim.env().min_rtt_s());
    let mut reports = Vec::new();
    let mut last: Option<MonitorReport> = None;
    while !sim.done() {
        let rate = policy.next_rate(last.as_ref());
        let mi = sim.next_mi_length_s();
        let report = sim.step(rate, mi).expect("mi length is positive");
        last = Some(report);
        reports.push(report);
    }
    let reward = if reports.is_empty() {
        0.0
    } else {
        cc_reward(&reports).unwrap()
    };
    (reward, reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn test_env(
        bandwidth_mbps: f64,
        one_way_ms: f64,
        queue: usize,
        loss: f64,
        duration: f64,
    ) -> CcEnv {
        CcEnv {
            trace: BandwidthTrace::constant(bandwidth_mbps, duration),
            side: CcSideChannel {
                one_way_latency_ms: one_way_ms,
                queue_packets: queue,
                loss_rate: loss,
                delay_noise_ms: 0.0,
            },
            duration_s: duration,
        }
    }

    #[test]
    fn uncongested_link_reports_propagation_delay_only() {
        let env = test_env(12.0, 40.0, 20, 0.0, 10.0);
        let mut sim = CcSim::new(env, 1);
        // 12 Mbps = 1000 pkt/s; send at 400 pkt/s.
        let mut report = sim.step(400.0, 1.0).unwrap();
        for _ in 0..5 {
            report = sim.step(400.0, 1.0).unwrap();
        }
        assert_eq!(report.loss_rate, 0.0);
        assert!((report.avg_latency_s - 0.080).abs() < 1e-9, "{report:?}");
        assert!((report.throughput_pps - 400.0).abs() < 2.0);
        assert!(report.rtt_inflation.abs() < 1e-9);
    }

    #[test]
    fn sustained_overload_converges_to_half_loss() {
        // Send at 2x bandwidth: the queue fills, then half of the sent
        // packets drop in steady state.
        let env = test_env(6.0, 10.0, 10, 0.0, 40.0);
        let pps = mbps_to_pps(6.0);
        let mut sim = CcSim::new(env, 2);
        let mut reports = Vec::new();
        while !sim.done() {
            reports.push(sim.step(2.0 * pps, 0.5).unwrap());
        }
        let tail = &reports[reports.len() / 2..];
        let loss: f64 = tail.iter().map(|r| r.loss_rate).sum::<f64>() / tail.len() as f64;
        assert!((loss - 0.5).abs() < 0.05 * 0.5 + 0.02, "loss {loss}");
        // Delivered rate tracks the link capacity.
        let tput: f64 =
            tail.iter().map(|r| r.throughput_pps).sum::<f64>() / tail.len() as f64;
        assert!((tput - pps).abs() / pps < 0.05, "tput {tput} vs {pps}");
    }

    #[test]
    fn total_random_loss_kills_throughput() {
        let env = test_env(6.0, 10.0, 10, 1.0, 5.0);
        let mut sim = CcSim::new(env, 3);
        let mut delivered = 0.0;
        while !sim.done() {
            delivered += sim.step(200.0, 0.5).unwrap().throughput_pps;
        }
        assert_eq!(delivered, 0.0);
        assert_eq!(sim.counters().delivered, 0);
        assert!(sim.counters().dropped_random > 0);
    }

    #[test]
    fn reward_formula_matches_example() {
        let zero = MonitorReport {
            duration_s: 1.0,
            throughput_pps: 0.0,
            avg_latency_s: 0.0,
            loss_rate: 0.0,
            rtt_inflation: 0.0,
            sending_rate_pps: 0.0,
            receiving_rate_pps: 0.0,
            min_rtt_s: 0.0,
            avg_rtt_s: 0.0,
        };
        assert_eq!(cc_reward(&[zero]).unwrap(), 0.0);
        let r = MonitorReport {
            throughput_pps: 100.0,
            avg_latency_s: 0.05,
            loss_rate: 0.01,
            ..zero
        };
        assert!((cc_reward(&[r]).unwrap() - 11930.0).abs() < 1e-9);
        assert!(cc_reward(&[]).is_err());
    }

    #[test]
    fn conservation_and_queue_bounds_hold() {
        let env = test_env(3.0, 20.0, 5, 0.02, 20.0);
        let mut sim = CcSim::new(env, 4);
        let mut rate = 50.0;
        while !sim.done() {
            let c = sim.counters();
            let balance = c.sent - c.delivered - c.dropped_queue - c.dropped_random;
            assert_eq!(balance, sim.in_flight() as u64);
            assert!(sim.queue_occupancy() <= 5);
            sim.step(rate, 0.3).unwrap();
            rate = (rate * 1.3).min(2000.0);
        }
    }

    #[test]
    fn throughput_bounded_by_link_capacity() {
        let env = test_env(2.0, 10.0, 50, 0.0, 15.0);
        let cap = mbps_to_pps(2.0);
        let mut sim = CcSim::new(env, 5);
        while !sim.done() {
            let r = sim.step(5.0 * cap, 0.5).unwrap();
            assert!(
                r.throughput_pps <= cap + 1.0 / r.duration_s.max(1e-9),
                "tput {} cap {cap}",
                r.throughput_pps
            );
        }
    }

    #[test]
    fn episode_is_seed_deterministic() {
        let env = test_env(4.0, 30.0, 8, 0.01, 6.0);
        struct Fixed(f64);
        impl CcPolicy for Fixed {
            fn reset(&mut self, _h: f64) {}
            fn next_rate(&mut self, _l: Option<&MonitorReport>) -> f64 {
                self.0
            }
        }
        let (r1, reps1) = cc_episode(env.clone(), &mut Fixed(180.0), 9);
        let (r2, reps2) = cc_episode(env, &mut Fixed(180.0), 9);
        assert_eq!(r1, r2);
        assert_eq!(reps1, reps2);
    }

    #[test]
    fn scripted_constant_rate_hand_check() {
        // 6 Mbps link (500 pkt/s), rate 250 pkt/s, no loss, no noise: every
        // MI after warmup delivers ~250 pkt/s at the propagation RTT.
        let env = test_env(6.0, 25.0, 20, 0.0, 8.0);
        struct Fixed(f64);
        impl CcPolicy for Fixed {
            fn reset(&mut self, _h: f64) {}
            fn next_rate(&mut self, _l: Option<&MonitorReport>) -> f64 {
                self.0
            }
        }
        let (reward, reports) = cc_episode(env, &mut Fixed(250.0), 10);
        let expect = REWARD_THROUGHPUT * 250.0 + REWARD_LATENCY * 0.05;
        assert!(
            (reward - expect).abs() / expect.abs() < 0.02,
            "reward {reward} expect {expect}"
        );
        assert!(reports.len() > 50);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn reward_linearity(
            a in proptest::collection::vec((0.0f64..1000.0, 0.0f64..1.0, 0.0f64..1.0), 1..10),
            b in proptest::collection::vec((0.0f64..1000.0, 0.0f64..1.0, 0.0f64..1.0), 1..10),
        ) {
            let mk = |rows: &[(f64, f64, f64)]| -> Vec<MonitorReport> {
                rows.iter()
                    .map(|&(t, l, p)| MonitorReport {
                        duration_s: 1.0,
                        throughput_pps: t,
                        avg_latency_s: l,
                        loss_rate: p,
                        rtt_inflation: 0.0,
                        sending_rate_pps: t,
                        receiving_rate_pps: t,
                        min_rtt_s: l,
                        avg_rtt_s: l,
                    })
                    .collect()
            };
            let ra = cc_reward(&mk(&a)).unwrap();
            let rb = cc_reward(&mk(&b)).unwrap();
            let mut joined = a.clone();
            joined.extend_from_slice(&b);
            let rj = cc_reward(&mk(&joined)).unwrap();
            let lhs = rj * joined.len() as f64;
            let rhs = ra * a.len() as f64 + rb * b.len() as f64;
            prop_assert!((lhs - rhs).abs() < 1e-6);
        }
    }
}
