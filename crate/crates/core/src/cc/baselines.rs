//! Rule-based congestion controllers adapted to the monitor-interval
//! interface. Fidelity to the kernel implementations is intentionally
//! loose; they are used as curriculum baselines, not as protocol models.

use super::{CcPolicy, MonitorReport, MAX_RATE_PPS, MIN_RATE_PPS};

const CUBIC_C: f64 = 0.4;
const CUBIC_BETA: f64 = 0.7;
const INITIAL_CWND: f64 = 10.0;

/// Cubic-style window growth driven by per-MI loss feedback: slow start
/// until the first loss, then `W(t) = C (t - K)^3 + W_max` with a 0.7
/// multiplicative decrease on loss. Sending rate is `cwnd / RTT`.
#[derive(Debug, Clone)]
pub struct CubicLike {
    cwnd: f64,
    ssthresh: f64,
    w_max: f64,
    epoch_s: f64,
    clock_s: f64,
    rtt_s: f64,
}

impl Default for CubicLike {
    fn default() -> Self {
        CubicLike {
            cwnd: INITIAL_CWND,
            ssthresh: f64::INFINITY,
            w_max: 0.0,
            epoch_s: 0.0,
            clock_s: 0.0,
            rtt_s: 0.1,
        }
    }
}

impl CubicLike {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cwnd(&self) -> f64 {
        self.cwnd
    }

    fn k(&self) -> f64 {
        (self.w_max * (1.0 - CUBIC_BETA) / CUBIC_C).cbrt()
    }

    /// Window update on one MI of feedback.
    pub fn on_report(&mut self, report: &MonitorReport) {
        self.clock_s += report.duration_s;
        if report.avg_rtt_s > 0.0 {
            self.rtt_s = report.avg_rtt_s;
        }
        if report.loss_rate > 0.0 {
            self.w_max = self.cwnd;
            self.cwnd = (self.cwnd * CUBIC_BETA).max(2.0);
            self.ssthresh = self.cwnd;
            self.epoch_s = self.clock_s;
        } else if self.cwnd < self.ssthresh {
            self.cwnd *= 2.0; // slow start, one doubling per RTT-sized MI
        } else {
            let t = self.clock_s - self.epoch_s;
            let target = CUBIC_C * (t - self.k()).powi(3) + self.w_max;
            self.cwnd = target.max(self.cwnd + 0.5); // at least Reno-ish probing
        }
        self.cwnd = self.cwnd.clamp(2.0, 1e7);
    }
}

impl CcPolicy for CubicLike {
    fn reset(&mut self, min_rtt_hint_s: f64) {
        *self = CubicLike::default();
        self.rtt_s = min_rtt_hint_s.max(1e-3);
    }

    fn next_rate(&mut self, last: Option<&MonitorReport>) -> f64 {
        if let Some(report) = last {
            self.on_report(report);
        }
        (self.cwnd / self.rtt_s).clamp(MIN_RATE_PPS, MAX_RATE_PPS)
    }
}

const BBR_STARTUP_GAIN: f64 = 2.885;
const BBR_CYCLE: [f64; 8] = [1.25, 0.75, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
const BBR_BW_WINDOW: usize = 10;
const BBR_PROBE_RTT_INTERVAL_S: f64 = 10.0;

/// BBR-flavored pacing: rate = (max delivered rate over a 10-MI window) x
/// a cyclic gain, with a startup phase until the bandwidth estimate
/// plateaus and a low-rate probe every 10 seconds to refresh min RTT.
#[derive(Debug, Clone)]
pub struct BbrLike {
    delivered_window: Vec<f64>,
    startup: bool,
    plateau_count: u32,
    prev_bw_estimate: f64,
    cycle_index: usize,
    clock_s: f64,
    last_probe_rtt_s: f64,
    probing_rtt: bool,
    min_rtt_s: f64,
}

impl Default for BbrLike {
    fn default() -> Self {
        BbrLike {
            delivered_window: Vec::new(),
            startup: true,
            plateau_count: 0,
            prev_bw_estimate: 0.0,
            cycle_index: 0,
            clock_s: 0.0,
            last_probe_rtt_s: 0.0,
            probing_rtt: false,
            min_rtt_s: 0.1,
        }
    }
}

impl BbrLike {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn in_startup(&self) -> bool {
        self.startup
    }

    pub fn bw_estimate_pps(&self) -> f64 {
        self.delivered_window.iter().copied().fold(0.0, f64::max)
    }
}

impl CcPolicy for BbrLike {
    fn reset(&mut self, min_rtt_hint_s: f64) {
        *self = BbrLike::default();
        self.min_rtt_s = min_rtt_hint_s.max(1e-3);
    }

    fn next_rate(&mut self, last: Option<&MonitorReport>) -> f64 {
        let Some(report) = last else {
            // No feedback yet: startup gain on a conservative base rate.
            return (BBR_STARTUP_GAIN * INITIAL_CWND / self.min_rtt_s)
                .clamp(MIN_RATE_PPS, MAX_RATE_PPS);
        };
        self.clock_s += report.duration_s;
        if report.min_rtt_s > 0.0 {
            self.min_rtt_s = report.min_rtt_s;
        }
        self.delivered_window.push(report.receiving_rate_pps);
        if self.delivered_window.len() > BBR_BW_WINDOW {
            self.delivered_window.remove(0);
        }
        let bw = self.bw_estimate_pps().max(MIN_RATE_PPS);

        if self.startup {
            if bw < 1.25 * self.prev_bw_estimate.max(1e-9) {
                self.plateau_count += 1;
            } else {
                self.plateau_count = 0;
            }
            self.prev_bw_estimate = bw;
            if self.plateau_count >= 3 {
                self.startup = false;
            } else {
                return (BBR_STARTUP_GAIN * bw).clamp(MIN_RATE_PPS, MAX_RATE_PPS);
            }
        }

        if self.probing_rtt {
            self.probing_rtt = false; // one low-rate MI is enough to drain
        } else if self.clock_s - self.last_probe_rtt_s >= BBR_PROBE_RTT_INTERVAL_S {
            self.last_probe_rtt_s = self.clock_s;
            self.probing_rtt = true;
            return (0.5 * bw).clamp(MIN_RATE_PPS, MAX_RATE_PPS);
        }

        let gain = BBR_CYCLE[self.cycle_index];
        self.cycle_index = (self.cycle_index + 1) % BBR_CYCLE.len();
        (gain * bw).clamp(MIN_RATE_PPS, MAX_RATE_PPS)
    }
}
