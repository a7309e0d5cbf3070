//! Bandwidth and workload traces: synthetic generators, the plain-text file
//! format, and mixing of recorded traces into config-driven training.
//!
//! Bandwidth traces are piecewise-constant step functions: the value at
//! `points[i].0 <= t < points[i+1].0` is `points[i].1`, the first value
//! extends to the left and the last value to the right. Generators are pure
//! functions of (config, RNG), so workers can generate concurrently without
//! shared state.

use crate::error::{Error, Result};
use crate::space::{AbrParams, CcParams, EnvConfig, LbParams, UseCase};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Pareto};
use std::io::Write;
use std::path::Path;

/// Floor for generated ABR bandwidth; the published table only bounds the
/// maximum.
pub const ABR_MIN_BANDWIDTH_MBPS: f64 = 0.2;

/// Pareto shape for LB job sizes; the scale is solved from the configured
/// mean size.
pub const LB_PARETO_SHAPE: f64 = 1.5;

/// Recorded traces match a config when their peak bandwidth is within this
/// relative tolerance of the config's max-bandwidth parameter.
pub const TRACE_MATCH_TOLERANCE: f64 = 0.2;

/// A timestamped bandwidth series in Mbps.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthTrace {
    points: Vec<(f64, f64)>,
    duration: f64,
}

impl BandwidthTrace {
    pub fn new(points: Vec<(f64, f64)>, duration: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid_argument("trace needs at least one point"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid_argument(
                    "trace timestamps must be strictly increasing",
                ));
            }
        }
        if points.iter().any(|&(t, bw)| !t.is_finite() || !(bw > 0.0)) {
            return Err(Error::invalid_argument("trace bandwidth must be > 0"));
        }
        Ok(BandwidthTrace { points, duration })
    }

    pub fn constant(bandwidth_mbps: f64, duration: f64) -> Self {
        BandwidthTrace::new(vec![(0.0, bandwidth_mbps)], duration).unwrap()
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn max_bandwidth(&self) -> f64 {
        self.points.iter().map(|&(_, bw)| bw).fold(f64::MIN, f64::max)
    }

    /// Bandwidth in Mbps at time `t` (first/last value extended outward).
    pub fn bandwidth_at(&self, t: f64) -> f64 {
        match self.points.binary_search_by(|&(pt, _)| pt.partial_cmp(&t).unwrap()) {
            Ok(i) => self.points[i].1,
            Err(0) => self.points[0].1,
            Err(i) => self.points[i - 1].1,
        }
    }

    /// Time to transfer `megabits` starting at `start`, integrating the
    /// step function. The last segment extends indefinitely, so transfers
    /// always finish.
    pub fn transmit_time(&self, start: f64, megabits: f64) -> f64 {
        debug_assert!(megabits >= 0.0);
        let mut remaining = megabits;
        let mut t = start;
        let mut idx = match self
            .points
            .binary_search_by(|&(pt, _)| pt.partial_cmp(&start).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        loop {
            let rate = self.points[idx].1;
            let seg_end = self.points.get(idx + 1).map(|&(pt, _)| pt);
            match seg_end {
                Some(end) if t < end => {
                    let cap = (end - t) * rate;
                    if cap >= remaining {
                        return t + remaining / rate - start;
                    }
                    remaining -= cap;
                    t = end;
                    idx += 1;
                }
                Some(_) => idx += 1,
                None => return t + remaining / rate - start,
            }
        }
    }
}

/// Timestamped job arrivals for the load balancer.
#[derive(Debug, Clone, PartialEq)]
pub struct JobTrace {
    arrivals: Vec<(f64, f64)>, // (arrival ms, size bytes)
}

impl JobTrace {
    pub fn new(arrivals: Vec<(f64, f64)>) -> Result<Self> {
        for w in arrivals.windows(2) {
            if w[1].0 < w[0].0 {
                return Err(Error::invalid_argument(
                    "job arrival times must be nondecreasing",
                ));
            }
        }
        if arrivals.iter().any(|&(t, s)| !t.is_finite() || !(s > 0.0)) {
            return Err(Error::invalid_argument("job sizes must be > 0"));
        }
        Ok(JobTrace { arrivals })
    }

    pub fn arrivals(&self) -> &[(f64, f64)] {
        &self.arrivals
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

/// Shared bandwidth-redraw logic: a new level every `change_interval` plus
/// jitter drawn from U[1, 3) seconds.
struct BandwidthProcess {
    min_bw: f64,
    max_bw: f64,
    change_interval: f64,
    current: f64,
    next_change: f64,
}

impl BandwidthProcess {
    fn new(min_bw: f64, max_bw: f64, change_interval: f64, rng: &mut ChaCha8Rng) -> Self {
        let current = draw_level(min_bw, max_bw, rng);
        let next_change = change_interval + rng.random_range(1.0..3.0);
        BandwidthProcess {
            min_bw,
            max_bw,
            change_interval,
            current,
            next_change,
        }
    }

    fn level_at(&mut self, t: f64, rng: &mut ChaCha8Rng) -> f64 {
        while t >= self.next_change {
            self.current = draw_level(self.min_bw, self.max_bw, rng);
            self.next_change += self.change_interval + rng.random_range(1.0..3.0);
        }
        self.current
    }
}

fn draw_level(min_bw: f64, max_bw: f64, rng: &mut ChaCha8Rng) -> f64 {
    if max_bw <= min_bw {
        max_bw
    } else {
        rng.random_range(min_bw..max_bw)
    }
}

/// Synthetic ABR bandwidth trace: ~1 s timestamps, each jittered by
/// U[-0.5, 0.5), levels redrawn from U[min_bw, max_bw).
pub fn synth_abr_trace(
    min_bw: f64,
    max_bw: f64,
    change_interval: f64,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> BandwidthTrace {
    let mut process = BandwidthProcess::new(min_bw, max_bw, change_interval, rng);
    let n = duration.ceil().max(1.0) as usize;
    let mut points = Vec::with_capacity(n + 1);
    points.push((0.0, process.current));
    for i in 1..=n {
        let t = i as f64 + rng.random_range(-0.5..0.5);
        let bw = process.level_at(t, rng);
        points.push((t, bw));
    }
    BandwidthTrace::new(points, duration).expect("generator keeps invariants")
}

/// ABR trace for a config; the minimum bandwidth is the documented floor.
pub fn gen_abr_trace(cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> Result<BandwidthTrace> {
    let p = AbrParams::from_config(cfg)?;
    Ok(synth_abr_trace(
        ABR_MIN_BANDWIDTH_MBPS.min(p.max_bandwidth_mbps),
        p.max_bandwidth_mbps,
        p.bw_change_interval_s,
        p.video_length_s,
        rng,
    ))
}

/// Link parameters that ride along with a CC bandwidth trace; they always
/// come from the config, never from a recorded trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcSideChannel {
    pub one_way_latency_ms: f64,
    pub queue_packets: usize,
    pub loss_rate: f64,
    pub delay_noise_ms: f64,
}

impl CcSideChannel {
    pub fn from_config(cfg: &EnvConfig) -> Result<Self> {
        let p = CcParams::from_config(cfg)?;
        Ok(CcSideChannel {
            one_way_latency_ms: p.min_rtt_ms / 2.0,
            queue_packets: (p.queue_packets.round() as usize).max(1),
            loss_rate: p.loss_rate.clamp(0.0, 1.0),
            delay_noise_ms: p.delay_noise_ms.max(0.0),
        })
    }
}

/// Synthetic CC bandwidth trace on a 0.1 s timestamp grid, levels drawn from
/// U[1, max_bw) Mbps (or pinned when max_bw <= 1).
pub fn synth_cc_trace(
    max_bw: f64,
    change_interval: f64,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> BandwidthTrace {
    const STEP: f64 = 0.1;
    let min_bw = 1.0f64.min(max_bw);
    let mut process = BandwidthProcess::new(min_bw, max_bw, change_interval.max(0.0), rng);
    let n = (duration / STEP).ceil().max(1.0) as usize;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * STEP;
        let bw = process.level_at(t, rng);
        points.push((t, bw));
    }
    BandwidthTrace::new(points, duration).expect("generator keeps invariants")
}

/// CC trace plus side-channel link parameters for a config.
pub fn gen_cc_trace(
    cfg: &EnvConfig,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(BandwidthTrace, CcSideChannel)> {
    let p = CcParams::from_config(cfg)?;
    let side = CcSideChannel::from_config(cfg)?;
    let trace = synth_cc_trace(p.max_bandwidth_mbps, p.bw_change_interval_s, duration, rng);
    Ok((trace, side))
}

/// LB workload: Poisson arrivals (exponential inter-arrival with mean
/// `job_interval_ms`) and Pareto job sizes with the configured mean.
pub fn gen_lb_trace(cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> Result<JobTrace> {
    let p = LbParams::from_config(cfg)?;
    let n = (p.num_jobs.round() as usize).max(1);
    let inter = Exp::new(1.0 / p.job_interval_ms)
        .map_err(|e| Error::invalid_argument(format!("job interval: {e}")))?;
    // Pareto mean = shape * scale / (shape - 1); solve scale for the mean.
    let scale = p.job_size_bytes * (LB_PARETO_SHAPE - 1.0) / LB_PARETO_SHAPE;
    let sizes = Pareto::new(scale, LB_PARETO_SHAPE)
        .map_err(|e| Error::invalid_argument(format!("job size: {e}")))?;
    let mut t = 0.0;
    let mut arrivals = Vec::with_capacity(n);
    for _ in 0..n {
        t += inter.sample(rng);
        arrivals.push((t, sizes.sample(rng)));
    }
    JobTrace::new(arrivals)
}

// ---------------------------------------------------------------------------
// Recorded trace corpus and mixing
// ---------------------------------------------------------------------------

/// A recorded bandwidth trace indexed by its bandwidth statistics.
#[derive(Debug, Clone)]
pub struct RecordedTrace {
    pub name: String,
    pub trace: BandwidthTrace,
    pub max_bandwidth: f64,
}

/// Library of recorded traces used for trace-driven environment mixing.
#[derive(Debug, Clone, Default)]
pub struct TraceCorpus {
    traces: Vec<RecordedTrace>,
}

impl TraceCorpus {
    pub fn new(traces: Vec<RecordedTrace>) -> Self {
        TraceCorpus { traces }
    }

    pub fn from_traces(named: Vec<(String, BandwidthTrace)>) -> Self {
        let traces = named
            .into_iter()
            .map(|(name, trace)| {
                let max_bandwidth = trace.max_bandwidth();
                RecordedTrace {
                    name,
                    trace,
                    max_bandwidth,
                }
            })
            .collect();
        TraceCorpus { traces }
    }

    /// Load every parseable bandwidth-trace file in `dir` (sorted by name).
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut names: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        names.sort();
        let mut traces = Vec::new();
        for path in names {
            let text = std::fs::read_to_string(&path)?;
            if let Ok(trace) = parse_bandwidth_trace(&text) {
                let max_bandwidth = trace.max_bandwidth();
                traces.push(RecordedTrace {
                    name: path.file_name().unwrap().to_string_lossy().into_owned(),
                    trace,
                    max_bandwidth,
                });
            }
        }
        Ok(TraceCorpus { traces })
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn traces(&self) -> &[RecordedTrace] {
        &self.traces
    }

    /// Recorded traces whose peak bandwidth lies within the matching
    /// tolerance of `max_bw`.
    pub fn matching(&self, max_bw: f64) -> Vec<&RecordedTrace> {
        self.traces
            .iter()
            .filter(|t| {
                t.max_bandwidth >= max_bw * (1.0 - TRACE_MATCH_TOLERANCE)
                    && t.max_bandwidth <= max_bw * (1.0 + TRACE_MATCH_TOLERANCE)
            })
            .collect()
    }
}

/// With probability `w_trace`, replay a recorded trace matching the config's
/// bandwidth parameter; otherwise (or when nothing matches) fall through to
/// the synthetic generator. CC side-channel parameters are unaffected.
pub fn mix_recorded_trace(
    cfg: &EnvConfig,
    corpus: &TraceCorpus,
    w_trace: f64,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> Result<BandwidthTrace> {
    let max_bw = match cfg.use_case {
        UseCase::Abr => AbrParams::from_config(cfg)?.max_bandwidth_mbps,
        UseCase::Cc => CcParams::from_config(cfg)?.max_bandwidth_mbps,
        UseCase::Lb => {
            return Err(Error::invalid_argument("LB has no bandwidth traces"));
        }
    };
    // Fixed draw order keeps (config, seed) -> trace deterministic whether or
    // not a recorded trace ends up matching.
    let u: f64 = rng.random();
    if u < w_trace && !corpus.is_empty() {
        let matches = corpus.matching(max_bw);
        if !matches.is_empty() {
            let pick = rng.random_range(0..matches.len());
            return Ok(matches[pick].trace.clone());
        }
    }
    match cfg.use_case {
        UseCase::Abr => gen_abr_trace(cfg, rng),
        UseCase::Cc => Ok(gen_cc_trace(cfg, duration, rng)?.0),
        UseCase::Lb => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

const BW_HEADER: &str = "timestamp_s,bandwidth_mbps";
const JOB_HEADER: &str = "arrival_ms,job_size_bytes";

/// Parse "timestamp_s,bandwidth_mbps" lines; a header line is optional.
pub fn parse_bandwidth_trace(text: &str) -> Result<BandwidthTrace> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
            continue;
        }
        let (t, bw) = parse_pair(line, i + 1)?;
        points.push((t, bw));
    }
    let duration = points.last().map(|&(t, _)| t).unwrap_or(0.0);
    BandwidthTrace::new(points, duration)
}

/// Parse "arrival_ms,job_size_bytes" lines; a header line is optional.
pub fn parse_job_trace(text: &str) -> Result<JobTrace> {
    let mut arrivals = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
            continue;
        }
        arrivals.push(parse_pair(line, i + 1)?);
    }
    JobTrace::new(arrivals)
}

fn parse_pair(line: &str, lineno: usize) -> Result<(f64, f64)> {
    let mut it = line.split(',');
    let a = it.next().and_then(|s| s.trim().parse::<f64>().ok());
    let b = it.next().and_then(|s| s.trim().parse::<f64>().ok());
    match (a, b, it.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(Error::TraceParse {
            line: lineno,
            reason: format!("expected `x,y`, got `{line}`"),
        }),
    }
}

pub fn write_bandwidth_trace(trace: &BandwidthTrace, mut w: impl Write) -> Result<()> {
    writeln!(w, "{BW_HEADER}")?;
    for &(t, bw) in trace.points() {
        writeln!(w, "{t},{bw}")?;
    }
    Ok(())
}

pub fn write_job_trace(trace: &JobTrace, mut w: impl Write) -> Result<()> {
    writeln!(w, "{JOB_HEADER}")?;
    for &(t, s) in trace.arrivals() {
        writeln!(w, "{t},{s}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::child_rng;
    use crate::space::{preset, PresetLevel};

    fn abr_cfg(values: [f64; 6]) -> EnvConfig {
        EnvConfig {
            use_case: UseCase::Abr,
            values: values.to_vec(),
        }
    }

    #[test]
    fn constant_band_when_min_equals_max() {
        let mut rng = child_rng(1, &[]);
        let trace = synth_abr_trace(5.0, 5.0, 3.0, 20.0, &mut rng);
        assert!(trace.points().iter().all(|&(_, bw)| bw == 5.0));
    }

    #[test]
    fn long_change_interval_yields_at_most_two_segments() {
        let mut rng = child_rng(2, &[]);
        let trace = synth_abr_trace(1.0, 10.0, 60.0, 30.0, &mut rng);
        let mut levels = vec![trace.points()[0].1];
        for &(_, bw) in trace.points() {
            if *levels.last().unwrap() != bw {
                levels.push(bw);
            }
        }
        assert!(levels.len() <= 2, "levels {levels:?}");
    }

    #[test]
    fn abr_trace_is_seed_deterministic() {
        let cfg = abr_cfg([60.0, 4.0, 80.0, 196.0, 5.0, 5.0]);
        let a = gen_abr_trace(&cfg, &mut child_rng(3, &[7])).unwrap();
        let b = gen_abr_trace(&cfg, &mut child_rng(3, &[7])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cc_trace_sits_on_tenth_second_grid() {
        let cfg = EnvConfig {
            use_case: UseCase::Cc,
            values: vec![12.0, 100.0, 2.0, 0.0, 10.0, 0.0],
        };
        let (trace, side) = gen_cc_trace(&cfg, 5.0, &mut child_rng(4, &[])).unwrap();
        assert_eq!(trace.points().len(), 50);
        for (i, &(t, bw)) in trace.points().iter().enumerate() {
            assert!((t - i as f64 * 0.1).abs() < 1e-12);
            assert!(bw >= 1.0 && bw <= 12.0);
        }
        assert_eq!(side.one_way_latency_ms, 50.0);
        assert_eq!(side.queue_packets, 10);
    }

    #[test]
    fn cc_trace_constant_when_max_bw_is_one() {
        let cfg = EnvConfig {
            use_case: UseCase::Cc,
            values: vec![1.0, 100.0, 0.5, 0.0, 10.0, 0.0],
        };
        let (trace, _) = gen_cc_trace(&cfg, 3.0, &mut child_rng(5, &[])).unwrap();
        assert!(trace.points().iter().all(|&(_, bw)| bw == 1.0));
    }

    #[test]
    fn lb_single_job() {
        let cfg = EnvConfig {
            use_case: UseCase::Lb,
            values: vec![1.0, 2000.0, 0.1, 1.0, 0.5],
        };
        let t = gen_lb_trace(&cfg, &mut child_rng(6, &[])).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn lb_interarrival_mean_matches_config() {
        let cfg = EnvConfig {
            use_case: UseCase::Lb,
            values: vec![1.0, 2000.0, 0.4, 100_000.0, 0.5],
        };
        let t = gen_lb_trace(&cfg, &mut child_rng(7, &[])).unwrap();
        let mean = t.arrivals().last().unwrap().0 / t.len() as f64;
        assert!((mean - 0.4).abs() / 0.4 < 0.02, "mean {mean}");
        let mean_size: f64 =
            t.arrivals().iter().map(|&(_, s)| s).sum::<f64>() / t.len() as f64;
        // Pareto(1.5) has infinite variance; allow a loose band on the mean.
        assert!((mean_size - 2000.0).abs() / 2000.0 < 0.25, "size {mean_size}");
    }

    #[test]
    fn lb_trace_is_seed_deterministic() {
        let cfg = EnvConfig {
            use_case: UseCase::Lb,
            values: vec![1.0, 500.0, 0.1, 50.0, 0.5],
        };
        let a = gen_lb_trace(&cfg, &mut child_rng(8, &[1])).unwrap();
        let b = gen_lb_trace(&cfg, &mut child_rng(8, &[1])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transmit_time_integrates_steps() {
        // 2 Mbps for 1 s, then 4 Mbps.
        let trace =
            BandwidthTrace::new(vec![(0.0, 2.0), (1.0, 4.0)], 10.0).unwrap();
        // 1 Mbit at 2 Mbps -> 0.5 s.
        assert!((trace.transmit_time(0.0, 1.0) - 0.5).abs() < 1e-12);
        // 4 Mbit: 2 Mbit in first second, 2 Mbit at 4 Mbps -> 1.5 s.
        assert!((trace.transmit_time(0.0, 4.0) - 1.5).abs() < 1e-12);
        // Starting inside the second segment.
        assert!((trace.transmit_time(2.0, 4.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixing_falls_through_when_corpus_empty_or_weight_zero() {
        let cfg = abr_cfg([60.0, 4.0, 80.0, 60.0, 5.0, 5.0]);
        let empty = TraceCorpus::default();
        let synth = gen_abr_trace(&cfg, &mut child_rng(9, &[0])).unwrap();
        let mixed =
            mix_recorded_trace(&cfg, &empty, 1.0, 30.0, &mut child_rng(9, &[0])).unwrap();
        // Same rng path modulo the mixing draw; just check it is synthetic-shaped.
        assert_eq!(mixed.points().len(), synth.points().len());

        let corpus = TraceCorpus::from_traces(vec![(
            "a".into(),
            BandwidthTrace::constant(5.0, 30.0),
        )]);
        let m0 = mix_recorded_trace(&cfg, &corpus, 0.0, 30.0, &mut child_rng(9, &[1])).unwrap();
        assert!(m0.points().len() > 1, "w=0 must stay synthetic");
    }

    #[test]
    fn mixing_prefers_matching_recorded_trace() {
        let cfg = abr_cfg([60.0, 4.0, 80.0, 60.0, 5.0, 5.0]);
        let rec = BandwidthTrace::constant(5.5, 30.0); // within 20% of 5
        let corpus = TraceCorpus::from_traces(vec![("rec".into(), rec.clone())]);
        let got = mix_recorded_trace(&cfg, &corpus, 1.0, 30.0, &mut child_rng(10, &[])).unwrap();
        assert_eq!(got, rec);

        // Out-of-tolerance corpus falls through to synthetic.
        let far = TraceCorpus::from_traces(vec![(
            "far".into(),
            BandwidthTrace::constant(50.0, 30.0),
        )]);
        let got = mix_recorded_trace(&cfg, &far, 1.0, 30.0, &mut child_rng(10, &[])).unwrap();
        assert!(got.points().len() > 1);
    }

    #[test]
    fn trace_files_round_trip() {
        let cfg = abr_cfg([60.0, 4.0, 80.0, 50.0, 5.0, 5.0]);
        let trace = gen_abr_trace(&cfg, &mut child_rng(11, &[])).unwrap();
        let mut buf = Vec::new();
        write_bandwidth_trace(&trace, &mut buf).unwrap();
        let parsed = parse_bandwidth_trace(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed.points(), trace.points());

        let headerless = "0.0,3.5\n1.0,4.5\n";
        let t = parse_bandwidth_trace(headerless).unwrap();
        assert_eq!(t.points().len(), 2);

        assert!(parse_bandwidth_trace("0.0,1.0\n0.0,2.0\n").is_err());
        assert!(parse_bandwidth_trace("nonsense\n0.0,oops\n").is_err());
    }

    #[test]
    fn job_files_round_trip() {
        let cfg = EnvConfig {
            use_case: UseCase::Lb,
            values: vec![1.0, 500.0, 0.1, 20.0, 0.5],
        };
        let trace = gen_lb_trace(&cfg, &mut child_rng(12, &[])).unwrap();
        let mut buf = Vec::new();
        write_job_trace(&trace, &mut buf).unwrap();
        let parsed = parse_job_trace(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed.arrivals().len(), trace.arrivals().len());
    }

    #[test]
    fn generated_traces_keep_invariants_for_random_configs() {
        let spaces = [
            preset(UseCase::Abr, PresetLevel::Rl3).space().unwrap(),
            preset(UseCase::Cc, PresetLevel::Rl3).space().unwrap(),
        ];
        let mut rng = child_rng(13, &[]);
        for round in 0..300 {
            for space in &spaces {
                let cfg = space.sample(&mut rng);
                let trace = match space.use_case {
                    UseCase::Abr => gen_abr_trace(&cfg, &mut child_rng(14, &[round])).unwrap(),
                    UseCase::Cc => {
                        gen_cc_trace(&cfg, 10.0, &mut child_rng(14, &[round]))
                            .unwrap()
                            .0
                    }
                    UseCase::Lb => unreachable!(),
                };
                for w in trace.points().windows(2) {
                    assert!(w[1].0 > w[0].0);
                }
                assert!(trace.points().iter().all(|&(_, bw)| bw > 0.0));
            }
        }
    }
}
