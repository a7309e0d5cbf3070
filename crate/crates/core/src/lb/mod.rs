//! Load-balancer queueing simulator.
//!
//! Jobs arrive on a trace; a policy assigns each to one of `m` servers that
//! drain their queues continuously at fixed service rates. A job's delay is
//! its completion time from arrival: (outstanding work on the chosen server
//! + its own size) / service rate. With some probability the per-server
//! queue ordering shown to the policy is permuted; this is observation
//! noise only and never changes the dynamics.

mod baselines;

pub use baselines::{Llf, Sjf};

use crate::error::{Error, Result};
use crate::rng::child_rng;
use crate::space::{EnvConfig, LbParams};
use crate::trace::{gen_lb_trace, JobTrace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Relative service rates of the default three-server fleet; the config's
/// scalar service-rate parameter scales the whole pattern.
pub const SERVER_RATE_PATTERN: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone)]
pub struct LbEnv {
    /// Work units per millisecond for each server.
    pub service_rates: Vec<f64>,
    pub jobs: JobTrace,
    pub queue_shuffle_prob: f64,
}

impl LbEnv {
    pub fn from_config(cfg: &EnvConfig, seed: u64) -> Result<Self> {
        let p = LbParams::from_config(cfg)?;
        let mut rng = child_rng(seed, &[0x61]);
        let jobs = gen_lb_trace(cfg, &mut rng)?;
        Ok(LbEnv {
            service_rates: SERVER_RATE_PATTERN
                .iter()
                .map(|r| r * p.service_rate)
                .collect(),
            jobs,
            queue_shuffle_prob: p.queue_shuffle_prob.clamp(0.0, 1.0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.service_rates.len() < 2 {
            return Err(Error::invalid_argument("need at least two servers"));
        }
        if self.service_rates.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::invalid_argument("service rates must be > 0"));
        }
        Ok(())
    }

    pub fn n_servers(&self) -> usize {
        self.service_rates.len()
    }
}

/// What the policy sees for one job: per-position outstanding work and
/// rates (possibly permuted together), the job size, and the inter-arrival
/// gap. The chosen position maps back to a real server inside the sim.
#[derive(Debug, Clone)]
pub struct LbObservation {
    pub works: Vec<f64>,
    pub rates: Vec<f64>,
    pub job_size: f64,
    pub interarrival_ms: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LbLogRow {
    pub job: usize,
    pub server: usize,
    pub delay_ms: f64,
}

/// Sequential event loop over one [`LbEnv`].
#[derive(Debug, Clone)]
pub struct LbSim {
    env: LbEnv,
    rng: ChaCha8Rng,
    outstanding: Vec<f64>,
    next_job: usize,
    /// Display position -> real server for the current observation.
    perm: Vec<usize>,
    last_arrival_ms: f64,
    delays: Vec<f64>,
}

impl LbSim {
    pub fn new(env: LbEnv, seed: u64) -> Self {
        let m = env.n_servers();
        let mut sim = LbSim {
            env,
            rng: child_rng(seed, &[0x62]),
            outstanding: vec![0.0; m],
            next_job: 0,
            perm: (0..m).collect(),
            last_arrival_ms: 0.0,
            delays: Vec::new(),
        };
        sim.roll_permutation();
        sim
    }

    pub fn env(&self) -> &LbEnv {
        &self.env
    }

    pub fn done(&self) -> bool {
        self.next_job >= self.env.jobs.len()
    }

    pub fn next_job(&self) -> usize {
        self.next_job
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn outstanding(&self) -> &[f64] {
        &self.outstanding
    }

    fn roll_permutation(&mut self) {
        let m = self.env.n_servers();
        self.perm = (0..m).collect();
        // One draw per observation keeps the stream deterministic even when
        // no shuffle happens.
        let u: f64 = self.rng.random();
        if u < self.env.queue_shuffle_prob {
            for i in (1..m).rev() {
                let j = self.rng.random_range(0..=i);
                self.perm.swap(i, j);
            }
        }
    }

    /// The observation for the next job.
    pub fn observe(&self) -> LbObservation {
        let (arrival, size) = self.env.jobs.arrivals()[self.next_job];
        LbObservation {
            works: self.perm.iter().map(|&s| self.outstanding[s]).collect(),
            rates: self.perm.iter().map(|&s| self.env.service_rates[s]).collect(),
            job_size: size,
            interarrival_ms: arrival - self.last_arrival_ms,
        }
    }

    /// Assign the next job to the server shown at `position`; returns the
    /// job's delay in milliseconds.
    pub fn step(&mut self, position: usize) -> Result<f64> {
        if self.done() {
            return Err(Error::invalid_argument("no jobs left"));
        }
        if position >= self.env.n_servers() {
            return Err(Error::invalid_argument(format!(
                "server position {position} out of range"
            )));
        }
        let server = self.perm[position];
        let (arrival, size) = self.env.jobs.arrivals()[self.next_job];
        let delay = (self.outstanding[server] + size) / self.env.service_rates[server];
        self.outstanding[server] += size;
        self.delays.push(delay);
        self.last_arrival_ms = arrival;
        self.next_job += 1;

        // Drain every queue up to the next arrival.
        if let Some(&(next_arrival, _)) = self.env.jobs.arrivals().get(self.next_job) {
            let dt = (next_arrival - arrival).max(0.0);
            for (work, rate) in self.outstanding.iter_mut().zip(&self.env.service_rates) {
                *work = (*work - rate * dt).max(0.0);
            }
        }
        self.roll_permutation();
        Ok(delay)
    }
}

/// Negative mean job delay in milliseconds.
pub fn lb_reward(delays: &[f64]) -> Result<f64> {
    if delays.is_empty() {
        return Err(Error::invalid_argument("reward over zero jobs"));
    }
    Ok(-delays.iter().sum::<f64>() / delays.len() as f64)
}

/// Server chooser over one observation.
pub trait LbDecider {
    fn decide(&mut self, obs: &LbObservation) -> usize;
}

pub fn run_lb_episode(env: LbEnv, policy: &mut dyn LbDecider, seed: u64) -> (f64, Vec<LbLogRow>) {
    let mut sim = LbSim::new(env, seed);
    let mut rows = Vec::new();
    while !sim.done() {
        let obs = sim.observe();
        let pos = policy.decide(&obs);
        let job = sim.next_job();
        let delay = sim.step(pos).expect("position validated by policies");
        rows.push(LbLogRow {
            job,
            server: pos,
            delay_ms: delay,
        });
    }
    let reward = lb_reward(sim.delays()).unwrap_or(0.0);
    (reward, rows)
}
