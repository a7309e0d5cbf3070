//! Rule-based server selection: least-load-first and shortest-job-first.

use super::{LbDecider, LbObservation};

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, v) in values.enumerate() {
        if v < best.0 {
            best = (v, i);
        }
    }
    best.1
}

/// Pick the server with the least outstanding work relative to its rate;
/// ties go to the lowest position.
#[derive(Debug, Clone, Copy, Default)]
pub struct Llf;

impl LbDecider for Llf {
    fn decide(&mut self, obs: &LbObservation) -> usize {
        argmin(obs.works.iter().zip(&obs.rates).map(|(w, r)| w / r))
    }
}

/// Pick the server that finishes this job first: (outstanding + job size)
/// over the rate; ties go to the lowest position.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sjf;

impl LbDecider for Sjf {
    fn decide(&mut self, obs: &LbObservation) -> usize {
        argmin(
            obs.works
                .iter()
                .zip(&obs.rates)
                .map(|(w, r)| (w + obs.job_size) / r),
        )
    }
}
