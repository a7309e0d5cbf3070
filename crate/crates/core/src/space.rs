//! Environment parameter spaces and training-configuration distributions.
//!
//! A use case (ABR, CC, LB) has a fixed list of environment parameters,
//! each with a box range. A point in the box is an [`EnvConfig`]; stochastic
//! environment instances are generated from a config plus a seed. Training
//! samples configs from a [`ConfigDistribution`]: a base uniform box plus a
//! weighted list of promoted configs that curricula append over time.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UseCase {
    Abr,
    Cc,
    Lb,
}

impl UseCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            UseCase::Abr => "abr",
            UseCase::Cc => "cc",
            UseCase::Lb => "lb",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "abr" => Ok(UseCase::Abr),
            "cc" => Ok(UseCase::Cc),
            "lb" => Ok(UseCase::Lb),
            other => Err(Error::invalid_argument(format!(
                "unknown use case `{other}` (expected abr, cc, or lb)"
            ))),
        }
    }
}

impl std::fmt::Display for UseCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

/// One environment parameter: a named box dimension.
///
/// Degenerate dimensions (`lo == hi`) are allowed and pin the parameter to a
/// single value; point configs emitted by searches round-trip through the
/// same schema this way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub unit: String,
    pub lo: f64,
    pub hi: f64,
    pub scale: Scale,
}

impl ParamSpec {
    pub fn new(name: &str, unit: &str, lo: f64, hi: f64, scale: Scale) -> Result<Self> {
        let spec = ParamSpec {
            name: name.to_string(),
            unit: unit.to_string(),
            lo,
            hi,
            scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo > self.hi {
            return Err(Error::invalid_config(
                &self.name,
                format!("invalid range [{}, {}]", self.lo, self.hi),
            ));
        }
        if self.scale == Scale::Log && self.lo <= 0.0 {
            return Err(Error::invalid_config(
                &self.name,
                "log scale requires lo > 0",
            ));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// Uniform sample over the range; log-scale dims sample uniformly in
    /// log space.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.is_degenerate() {
            return self.lo;
        }
        match self.scale {
            Scale::Linear => rng.random_range(self.lo..self.hi),
            Scale::Log => {
                let (a, b) = (self.lo.ln(), self.hi.ln());
                rng.random_range(a..b).exp()
            }
        }
    }

    /// Map a value into [0, 1] (log dims in log space). Degenerate dims map
    /// to 0.5.
    pub fn normalize(&self, v: f64) -> f64 {
        if self.is_degenerate() {
            return 0.5;
        }
        match self.scale {
            Scale::Linear => (v - self.lo) / (self.hi - self.lo),
            Scale::Log => (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln()),
        }
    }

    /// Inverse of [`ParamSpec::normalize`].
    pub fn denormalize(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if self.is_degenerate() {
            return self.lo;
        }
        let v = match self.scale {
            Scale::Linear => self.lo + u * (self.hi - self.lo),
            Scale::Log => (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp(),
        };
        // exp/ln round-tripping can land a hair outside the box.
        v.clamp(self.lo, self.hi)
    }
}

/// An ordered list of parameters for one use case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvSpace {
    pub use_case: UseCase,
    pub params: Vec<ParamSpec>,
}

impl EnvSpace {
    pub fn new(use_case: UseCase, params: Vec<ParamSpec>) -> Result<Self> {
        let space = EnvSpace { use_case, params };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = match self.use_case {
            UseCase::Abr => 6,
            UseCase::Cc => 6,
            UseCase::Lb => 5,
        };
        if self.params.len() != expected {
            return Err(Error::invalid_config(
                "params",
                format!(
                    "{} space needs {expected} parameters, got {}",
                    self.use_case,
                    self.params.len()
                ),
            ));
        }
        for p in &self.params {
            p.validate()?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn param(&self, name: &str) -> Option<(usize, &ParamSpec)> {
        self.params.iter().enumerate().find(|(_, p)| p.name == name)
    }

    pub fn contains(&self, config: &EnvConfig) -> bool {
        config.use_case == self.use_case
            && config.values.len() == self.params.len()
            && config
                .values
                .iter()
                .zip(&self.params)
                .all(|(v, p)| *v >= p.lo && *v <= p.hi)
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> EnvConfig {
        EnvConfig {
            use_case: self.use_case,
            values: self.params.iter().map(|p| p.sample(rng)).collect(),
        }
    }

    /// The config with every parameter at its preset default.
    pub fn default_config(&self, defaults: &[f64]) -> Result<EnvConfig> {
        if defaults.len() != self.params.len() {
            return Err(Error::invalid_argument("default vector length mismatch"));
        }
        Ok(EnvConfig {
            use_case: self.use_case,
            values: defaults.to_vec(),
        })
    }

    /// A copy of this space collapsed to the single point `config`.
    pub fn point_space(&self, config: &EnvConfig) -> EnvSpace {
        let params = self
            .params
            .iter()
            .zip(&config.values)
            .map(|(p, &v)| ParamSpec {
                name: p.name.clone(),
                unit: p.unit.clone(),
                lo: v,
                hi: v,
                scale: p.scale,
            })
            .collect();
        EnvSpace {
            use_case: self.use_case,
            params,
        }
    }
}

/// A point in an [`EnvSpace`]: one value per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub use_case: UseCase,
    pub values: Vec<f64>,
}

impl EnvConfig {
    pub fn new(space: &EnvSpace, values: Vec<f64>) -> Result<Self> {
        let config = EnvConfig {
            use_case: space.use_case,
            values,
        };
        if !space.contains(&config) {
            return Err(Error::invalid_argument(
                "config values outside the space box",
            ));
        }
        Ok(config)
    }
}

/// Weighted mixture over configs: a base uniform box plus promoted points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigDistribution {
    pub base_space: EnvSpace,
    pub promoted: Vec<(EnvConfig, f64)>,
    pub base_weight: f64,
}

impl ConfigDistribution {
    /// The uniform distribution over `space` (no promoted configs).
    pub fn uniform(space: EnvSpace) -> Self {
        ConfigDistribution {
            base_space: space,
            promoted: Vec::new(),
            base_weight: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base_space.validate()?;
        let mut sum = self.base_weight;
        if self.base_weight < 0.0 {
            return Err(Error::invalid_argument("base_weight < 0"));
        }
        for (cfg, w) in &self.promoted {
            if *w < 0.0 {
                return Err(Error::invalid_argument("promoted weight < 0"));
            }
            if cfg.use_case != self.base_space.use_case {
                return Err(Error::invalid_argument("promoted config use-case mismatch"));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid_argument(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    /// Multiply every existing weight by `1 - w` and append `(p_new, w)`.
    pub fn promote(&self, p_new: EnvConfig, w: f64) -> Result<ConfigDistribution> {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::invalid_argument(format!(
                "promotion weight {w} outside (0, 1)"
            )));
        }
        if p_new.use_case != self.base_space.use_case {
            return Err(Error::invalid_argument("promoted config use-case mismatch"));
        }
        let mut next = self.clone();
        next.base_weight *= 1.0 - w;
        for (_, pw) in &mut next.promoted {
            *pw *= 1.0 - w;
        }
        next.promoted.push((p_new, w));
        Ok(next)
    }

    /// Draw one config: the base box with probability `base_weight`,
    /// otherwise a promoted config proportional to its weight.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> EnvConfig {
        let u: f64 = rng.random();
        if u < self.base_weight || self.promoted.is_empty() {
            return self.base_space.sample(rng);
        }
        let mut acc = self.base_weight;
        for (cfg, w) in &self.promoted {
            acc += w;
            if u < acc {
                return cfg.clone();
            }
        }
        // Weights sum to 1 up to rounding; fall back to the last promoted.
        self.promoted.last().unwrap().0.clone()
    }
}

// ---------------------------------------------------------------------------
// Typed views of config dimensions
// ---------------------------------------------------------------------------

/// ABR config dimensions in table order.
#[derive(Debug, Clone, Copy)]
pub struct AbrParams {
    pub max_buffer_s: f64,
    pub chunk_length_s: f64,
    pub min_rtt_ms: f64,
    pub video_length_s: f64,
    pub bw_change_interval_s: f64,
    pub max_bandwidth_mbps: f64,
}

impl AbrParams {
    pub fn from_config(cfg: &EnvConfig) -> Result<Self> {
        if cfg.use_case != UseCase::Abr || cfg.values.len() != 6 {
            return Err(Error::invalid_argument("expected a 6-dim ABR config"));
        }
        let v = &cfg.values;
        Ok(AbrParams {
            max_buffer_s: v[0],
            chunk_length_s: v[1],
            min_rtt_ms: v[2],
            video_length_s: v[3],
            bw_change_interval_s: v[4],
            max_bandwidth_mbps: v[5],
        })
    }
}

/// CC config dimensions in table order.
#[derive(Debug, Clone, Copy)]
pub struct CcParams {
    pub max_bandwidth_mbps: f64,
    pub min_rtt_ms: f64,
    pub bw_change_interval_s: f64,
    pub loss_rate: f64,
    pub queue_packets: f64,
    pub delay_noise_ms: f64,
}

impl CcParams {
    pub fn from_config(cfg: &EnvConfig) -> Result<Self> {
        if cfg.use_case != UseCase::Cc || cfg.values.len() != 6 {
            return Err(Error::invalid_argument("expected a 6-dim CC config"));
        }
        let v = &cfg.values;
        Ok(CcParams {
            max_bandwidth_mbps: v[0],
            min_rtt_ms: v[1],
            bw_change_interval_s: v[2],
            loss_rate: v[3],
            queue_packets: v[4],
            delay_noise_ms: v[5],
        })
    }
}

/// LB config dimensions in table order.
#[derive(Debug, Clone, Copy)]
pub struct LbParams {
    pub service_rate: f64,
    pub job_size_bytes: f64,
    pub job_interval_ms: f64,
    pub num_jobs: f64,
    pub queue_shuffle_prob: f64,
}

impl LbParams {
    pub fn from_config(cfg: &EnvConfig) -> Result<Self> {
        if cfg.use_case != UseCase::Lb || cfg.values.len() != 5 {
            return Err(Error::invalid_argument("expected a 5-dim LB config"));
        }
        let v = &cfg.values;
        Ok(LbParams {
            service_rate: v[0],
            job_size_bytes: v[1],
            job_interval_ms: v[2],
            num_jobs: v[3],
            queue_shuffle_prob: v[4],
        })
    }
}

// ---------------------------------------------------------------------------
// Preset boxes
// ---------------------------------------------------------------------------

/// Nested preset boxes of increasing width used for training and testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetLevel {
    Rl1,
    Rl2,
    Rl3,
}

impl PresetLevel {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rl1" => Ok(PresetLevel::Rl1),
            "rl2" => Ok(PresetLevel::Rl2),
            "rl3" => Ok(PresetLevel::Rl3),
            other => Err(Error::invalid_argument(format!(
                "unknown preset `{other}` (expected rl1, rl2, or rl3)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetLevel::Rl1 => "rl1",
            PresetLevel::Rl2 => "rl2",
            PresetLevel::Rl3 => "rl3",
        }
    }
}

const PRESET_FILES: [(UseCase, PresetLevel, &str); 9] = [
    (UseCase::Abr, PresetLevel::Rl1, include_str!("../presets/abr_rl1.toml")),
    (UseCase::Abr, PresetLevel::Rl2, include_str!("../presets/abr_rl2.toml")),
    (UseCase::Abr, PresetLevel::Rl3, include_str!("../presets/abr_rl3.toml")),
    (UseCase::Cc, PresetLevel::Rl1, include_str!("../presets/cc_rl1.toml")),
    (UseCase::Cc, PresetLevel::Rl2, include_str!("../presets/cc_rl2.toml")),
    (UseCase::Cc, PresetLevel::Rl3, include_str!("../presets/cc_rl3.toml")),
    (UseCase::Lb, PresetLevel::Rl1, include_str!("../presets/lb_rl1.toml")),
    (UseCase::Lb, PresetLevel::Rl2, include_str!("../presets/lb_rl2.toml")),
    (UseCase::Lb, PresetLevel::Rl3, include_str!("../presets/lb_rl3.toml")),
];

/// A parameter space plus the per-parameter default point, as stored in the
/// space files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    pub version: u32,
    pub use_case: UseCase,
    #[serde(rename = "param")]
    pub params: Vec<SpaceFileParam>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFileParam {
    pub name: String,
    pub unit: String,
    pub lo: f64,
    pub hi: f64,
    pub scale: Scale,
    pub default: f64,
}

pub const SPACE_FILE_VERSION: u32 = 1;

impl SpaceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: SpaceFile = toml::from_str(text)
            .map_err(|e| Error::invalid_config("space file", e.to_string()))?;
        if file.version != SPACE_FILE_VERSION {
            return Err(Error::invalid_config(
                "version",
                format!("unsupported space file version {}", file.version),
            ));
        }
        file.space()?; // validates ranges and arity
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("space file serializes")
    }

    pub fn space(&self) -> Result<EnvSpace> {
        EnvSpace::new(
            self.use_case,
            self.params
                .iter()
                .map(|p| ParamSpec {
                    name: p.name.clone(),
                    unit: p.unit.clone(),
                    lo: p.lo,
                    hi: p.hi,
                    scale: p.scale,
                })
                .collect(),
        )
    }

    pub fn defaults(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.default).collect()
    }

    pub fn default_config(&self) -> Result<EnvConfig> {
        self.space()?.default_config(&self.defaults())
    }

    /// A space file pinning every parameter to `config` (defaults follow).
    pub fn point(space: &EnvSpace, config: &EnvConfig) -> SpaceFile {
        SpaceFile {
            version: SPACE_FILE_VERSION,
            use_case: space.use_case,
            params: space
                .params
                .iter()
                .zip(&config.values)
                .map(|(p, &v)| SpaceFileParam {
                    name: p.name.clone(),
                    unit: p.unit.clone(),
                    lo: v,
                    hi: v,
                    scale: p.scale,
                    default: v,
                })
                .collect(),
        }
    }
}

/// Built-in preset space file for a use case and level.
pub fn preset(use_case: UseCase, level: PresetLevel) -> SpaceFile {
    let text = PRESET_FILES
        .iter()
        .find(|(u, l, _)| *u == use_case && *l == level)
        .map(|(_, _, t)| *t)
        .expect("all presets are bundled");
    SpaceFile::parse(text).expect("bundled presets are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::child_rng;
    use proptest::prelude::*;

    fn abr_rl3() -> EnvSpace {
        preset(UseCase::Abr, PresetLevel::Rl3).space().unwrap()
    }

    #[test]
    fn presets_parse_and_validate() {
        for uc in [UseCase::Abr, UseCase::Cc, UseCase::Lb] {
            for lvl in [PresetLevel::Rl1, PresetLevel::Rl2, PresetLevel::Rl3] {
                let file = preset(uc, lvl);
                let space = file.space().unwrap();
                assert_eq!(space.use_case, uc);
                let dflt = file.default_config().unwrap();
                assert_eq!(dflt.values.len(), space.dim());
            }
        }
    }

    #[test]
    fn preset_values_match_published_tables() {
        // ABR box rows: (name, rl1, rl2, rl3, default)
        let abr: [(&str, [f64; 2], [f64; 2], [f64; 2], f64); 6] = [
            ("max_playback_buffer_s", [2.0, 10.0], [2.0, 50.0], [2.0, 100.0], 60.0),
            ("chunk_length_s", [1.0, 4.0], [1.0, 6.0], [1.0, 10.0], 4.0),
            ("min_rtt_ms", [20.0, 30.0], [20.0, 220.0], [20.0, 1000.0], 80.0),
            ("video_length_s", [40.0, 45.0], [40.0, 200.0], [40.0, 400.0], 196.0),
            ("bw_change_interval_s", [2.0, 2.0], [2.0, 20.0], [2.0, 100.0], 5.0),
            ("max_bandwidth_mbps", [2.0, 5.0], [2.0, 100.0], [2.0, 1000.0], 5.0),
        ];
        let cc: [(&str, [f64; 2], [f64; 2], [f64; 2], f64); 6] = [
            ("max_bandwidth_mbps", [0.5, 7.0], [0.4, 14.0], [0.1, 100.0], 3.16),
            ("min_rtt_ms", [205.0, 250.0], [156.0, 288.0], [10.0, 400.0], 100.0),
            ("bw_change_interval_s", [11.0, 13.0], [3.0, 13.0], [0.0, 30.0], 7.5),
            ("loss_rate", [0.01, 0.014], [0.007, 0.02], [0.0, 0.05], 0.0),
            ("queue_packets", [2.0, 6.0], [2.0, 11.0], [2.0, 200.0], 10.0),
            ("delay_noise_ms", [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], 0.0),
        ];
        let lb: [(&str, [f64; 2], [f64; 2], [f64; 2], f64); 5] = [
            ("service_rate", [0.1, 2.0], [0.1, 5.0], [0.1, 10.0], 1.0),
            ("job_size_bytes", [100.0, 200.0], [100.0, 1000.0], [1.0, 10000.0], 2000.0),
            ("job_interval_ms", [0.01, 0.05], [0.01, 0.1], [0.1, 1.0], 0.1),
            ("num_jobs", [10.0, 100.0], [10.0, 1000.0], [10.0, 5000.0], 2000.0),
            ("queue_shuffle_prob", [0.1, 0.2], [0.1, 0.5], [0.1, 1.0], 0.5),
        ];

        let check = |uc: UseCase, rows: &[(&str, [f64; 2], [f64; 2], [f64; 2], f64)]| {
            for (idx, lvl) in [PresetLevel::Rl1, PresetLevel::Rl2, PresetLevel::Rl3]
                .into_iter()
                .enumerate()
            {
                let file = preset(uc, lvl);
                assert_eq!(file.params.len(), rows.len(), "{uc} {lvl:?} arity");
                for (p, row) in file.params.iter().zip(rows) {
                    let range = match idx {
                        0 => row.1,
                        1 => row.2,
                        _ => row.3,
                    };
                    assert_eq!(p.name, row.0, "{uc} param name");
                    assert_eq!([p.lo, p.hi], range, "{uc} {lvl:?} {}", row.0);
                    assert_eq!(p.default, row.4, "{uc} default {}", row.0);
                }
            }
        };
        check(UseCase::Abr, &abr);
        check(UseCase::Cc, &cc);
        check(UseCase::Lb, &lb);
    }

    #[test]
    fn degenerate_box_samples_unique_point() {
        let file = preset(UseCase::Abr, PresetLevel::Rl3);
        let space = file.space().unwrap();
        let point = file.default_config().unwrap();
        let collapsed = space.point_space(&point);
        let dist = ConfigDistribution::uniform(collapsed);
        let mut rng = child_rng(1, &[]);
        for _ in 0..50 {
            assert_eq!(dist.sample(&mut rng), point);
        }
    }

    #[test]
    fn pure_promoted_distribution_always_returns_it() {
        let space = abr_rl3();
        let p = space.sample(&mut child_rng(2, &[]));
        let dist = ConfigDistribution {
            base_space: space,
            promoted: vec![(p.clone(), 1.0)],
            base_weight: 0.0,
        };
        dist.validate().unwrap();
        let mut rng = child_rng(3, &[]);
        for _ in 0..50 {
            assert_eq!(dist.sample(&mut rng), p);
        }
    }

    #[test]
    fn promoted_frequency_matches_weight() {
        let space = abr_rl3();
        let p = space.sample(&mut child_rng(4, &[]));
        let dist = ConfigDistribution::uniform(space)
            .promote(p.clone(), 0.3)
            .unwrap();
        let mut rng = child_rng(5, &[]);
        let n = 100_000;
        let hits = (0..n).filter(|_| dist.sample(&mut rng) == p).count();
        let freq = hits as f64 / n as f64;
        // Binomial sd at n=1e5 is ~0.0014; 0.01 is a ~7-sigma band.
        assert!((freq - 0.3).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn promote_reweights_exactly() {
        let space = abr_rl3();
        let mut rng = child_rng(6, &[]);
        let p1 = space.sample(&mut rng);
        let p2 = space.sample(&mut rng);
        let d0 = ConfigDistribution::uniform(space);
        let d1 = d0.promote(p1, 0.3).unwrap();
        assert!((d1.base_weight - 0.7).abs() < 1e-12);
        assert!((d1.promoted[0].1 - 0.3).abs() < 1e-12);
        let d2 = d1.promote(p2, 0.3).unwrap();
        assert!((d2.base_weight - 0.49).abs() < 1e-12);
        assert!((d2.promoted[0].1 - 0.21).abs() < 1e-12);
        assert!((d2.promoted[1].1 - 0.30).abs() < 1e-12);
        d2.validate().unwrap();
    }

    #[test]
    fn nine_promotions_leave_base_at_point_seven_to_the_ninth() {
        let space = abr_rl3();
        let mut rng = child_rng(7, &[]);
        let mut dist = ConfigDistribution::uniform(space.clone());
        for r in 1..=9 {
            let p = space.sample(&mut rng);
            dist = dist.promote(p, 0.3).unwrap();
            assert!((dist.base_weight - 0.7f64.powi(r)).abs() < WEIGHT_SUM_TOL);
        }
        assert!((dist.base_weight - 0.040353607).abs() < 1e-8);
    }

    #[test]
    fn promote_rejects_out_of_range_weight() {
        let dist = ConfigDistribution::uniform(abr_rl3());
        let p = abr_rl3().sample(&mut child_rng(8, &[]));
        assert!(dist.promote(p.clone(), 0.0).is_err());
        assert!(dist.promote(p.clone(), 1.0).is_err());
        assert!(dist.promote(p, -0.2).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let space = abr_rl3();
        let dist = ConfigDistribution::uniform(space.clone())
            .promote(space.sample(&mut child_rng(9, &[])), 0.3)
            .unwrap();
        let a: Vec<EnvConfig> = {
            let mut rng = child_rng(10, &[1]);
            (0..20).map(|_| dist.sample(&mut rng)).collect()
        };
        let b: Vec<EnvConfig> = {
            let mut rng = child_rng(10, &[1]);
            (0..20).map(|_| dist.sample(&mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn log_dim_samples_uniform_in_log_space() {
        // Kolmogorov-Smirnov against U[0,1] after log transform.
        let spec = ParamSpec::new("bw", "Mbps", 2.0, 1000.0, Scale::Log).unwrap();
        let mut rng = child_rng(11, &[]);
        let n = 10_000;
        let mut u: Vec<f64> = (0..n).map(|_| spec.normalize(spec.sample(&mut rng))).collect();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (i, &x) in u.iter().enumerate() {
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((x - lo).abs()).max((hi - x).abs());
        }
        // Critical value at alpha=0.01: 1.628 / sqrt(n).
        assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn space_file_round_trips() {
        let file = preset(UseCase::Cc, PresetLevel::Rl2);
        let text = file.to_toml();
        let re = SpaceFile::parse(&text).unwrap();
        assert_eq!(re.space().unwrap().params.len(), 6);
        assert_eq!(re.defaults(), file.defaults());
    }

    #[test]
    fn param_spec_rejects_bad_ranges() {
        assert!(ParamSpec::new("x", "", 2.0, 1.0, Scale::Linear).is_err());
        assert!(ParamSpec::new("x", "", 0.0, 1.0, Scale::Log).is_err());
        assert!(ParamSpec::new("x", "", -1.0, 1.0, Scale::Log).is_err());
        assert!(ParamSpec::new("x", "", 1.0, 1.0, Scale::Linear).is_ok());
    }

    proptest! {
        #[test]
        fn promote_preserves_weight_sum(ws in proptest::collection::vec(0.01f64..0.99, 1..20)) {
            let space = abr_rl3();
            let mut rng = child_rng(12, &[]);
            let mut dist = ConfigDistribution::uniform(space.clone());
            for w in ws {
                dist = dist.promote(space.sample(&mut rng), w).unwrap();
                let sum: f64 = dist.base_weight + dist.promoted.iter().map(|(_, w)| w).sum::<f64>();
                prop_assert!((sum - 1.0).abs() < WEIGHT_SUM_TOL);
                dist.validate().unwrap();
            }
        }

        #[test]
        fn normalize_round_trips(u in 0.0f64..=1.0) {
            let lin = ParamSpec::new("a", "", 3.0, 17.0, Scale::Linear).unwrap();
            let log = ParamSpec::new("b", "", 0.5, 800.0, Scale::Log).unwrap();
            for spec in [&lin, &log] {
                let v = spec.denormalize(u);
                prop_assert!(v >= spec.lo && v <= spec.hi);
                prop_assert!((spec.normalize(v) - u).abs() < 1e-9);
            }
        }
    }
}
