//! Run-configuration file: a versioned, human-editable TOML schema that
//! pins everything a training run needs.

use crate::{CliError, CliResult};
use netcl_core::curriculum::{CurriculumMode, CurriculumSpec};
use netcl_core::policy::TrainSpec;
use netcl_core::rollout::{RuleKind, UseCaseFactory};
use netcl_core::space::{preset, PresetLevel, SpaceFile};
use netcl_core::trace::TraceCorpus;
use netcl_core::UseCase;
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const RUN_CONFIG_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub version: u32,
    pub use_case: String,
    pub curriculum: String,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub space_file: Option<PathBuf>,
    #[serde(default)]
    pub baseline: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub train: Option<TrainSection>,
    #[serde(default)]
    pub curriculum_spec: Option<CurriculumSection>,
    #[serde(default)]
    pub trace_mix: Option<TraceMixSection>,
    #[serde(default)]
    pub cc: Option<CcSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub k_configs: Option<usize>,
    pub n_envs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub value_learning_rate: Option<f64>,
    pub entropy_weight: Option<f64>,
    pub gamma: Option<f64>,
    /// Total iterations for uniform training.
    pub iterations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumSection {
    pub rounds: Option<usize>,
    pub iters_per_round: Option<usize>,
    pub promote_weight: Option<f64>,
    pub bo_trials: Option<usize>,
    pub gap_episodes: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMixSection {
    pub dir: PathBuf,
    pub weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcSection {
    pub episode_duration_s: f64,
}

/// Everything `train` needs, resolved and validated.
pub struct ResolvedRun {
    pub use_case: UseCase,
    pub mode: CurriculumMode,
    pub space_file: SpaceFile,
    pub baseline: RuleKind,
    pub train_spec: TrainSpec,
    pub curriculum_spec: CurriculumSpec,
    pub factory: UseCaseFactory,
    pub out_dir: PathBuf,
    pub seed: u64,
}

fn usage(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("config field `{field}`: {reason}"))
}

impl RunConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let file: RunConfigFile =
            toml::from_str(&text).map_err(|e| CliError::usage(format!("config: {e}")))?;
        if file.version != RUN_CONFIG_VERSION {
            return Err(usage(
                "version",
                format!("unsupported run-config version {}", file.version),
            ));
        }
        Ok(file)
    }

    pub fn resolve(self, config_dir: &Path) -> CliResult<ResolvedRun> {
        let use_case = UseCase::parse(&self.use_case).map_err(|e| usage("use_case", e))?;
        let mode = CurriculumMode::parse(&self.curriculum).map_err(|e| usage("curriculum", e))?;

        let space_file = load_space(
            use_case,
            self.preset.as_deref(),
            self.space_file
                .as_ref()
                .map(|p| rebase(config_dir, p))
                .as_deref(),
        )?;

        let baseline = match &self.baseline {
            Some(name) => RuleKind::parse(name).map_err(|e| usage("baseline", e))?,
            None => RuleKind::default_for(use_case),
        };
        baseline
            .check_use_case(use_case)
            .map_err(|e| usage("baseline", e))?;
        if mode == CurriculumMode::Cl3 && use_case != UseCase::Abr {
            return Err(usage("curriculum", "cl3 is only available for abr"));
        }

        let defaults = TrainSpec::default();
        let train = self.train.as_ref();
        if mode == CurriculumMode::Uniform
            && train.and_then(|t| t.iterations).is_none()
        {
            return Err(usage(
                "train.iterations",
                "required for curriculum = \"uniform\"",
            ));
        }
        if mode != CurriculumMode::Uniform && self.curriculum_spec.is_none() {
            return Err(usage(
                "curriculum_spec",
                format!("section required for curriculum = \"{}\"", mode.as_str()),
            ));
        }
        let seed = self.seed.unwrap_or(0);
        let train_spec = TrainSpec {
            k_configs: train.and_then(|t| t.k_configs).unwrap_or(defaults.k_configs),
            n_envs: train.and_then(|t| t.n_envs).unwrap_or(defaults.n_envs),
            learning_rate: train
                .and_then(|t| t.learning_rate)
                .unwrap_or(defaults.learning_rate),
            value_learning_rate: train
                .and_then(|t| t.value_learning_rate)
                .unwrap_or(defaults.value_learning_rate),
            entropy_weight: train
                .and_then(|t| t.entropy_weight)
                .unwrap_or(defaults.entropy_weight),
            gamma: train.and_then(|t| t.gamma).unwrap_or(defaults.gamma),
            iterations: train.and_then(|t| t.iterations).unwrap_or(0),
            seed,
            normalize_advantages: defaults.normalize_advantages,
        };
        train_spec
            .validate()
            .map_err(|e| usage("train", e))?;

        let cdefaults = CurriculumSpec::default();
        let c = self.curriculum_spec.as_ref();
        let curriculum_spec = CurriculumSpec {
            rounds: c.and_then(|c| c.rounds).unwrap_or(cdefaults.rounds),
            iters_per_round: c
                .and_then(|c| c.iters_per_round)
                .unwrap_or(cdefaults.iters_per_round),
            promote_weight: c
                .and_then(|c| c.promote_weight)
                .unwrap_or(cdefaults.promote_weight),
            bo_trials: c.and_then(|c| c.bo_trials).unwrap_or(cdefaults.bo_trials),
            gap_episodes: c
                .and_then(|c| c.gap_episodes)
                .unwrap_or(cdefaults.gap_episodes),
        };

        let mut factory = UseCaseFactory::new(use_case);
        if let Some(cc) = &self.cc {
            if !(cc.episode_duration_s > 0.0) {
                return Err(usage("cc.episode_duration_s", "must be > 0"));
            }
            factory.cc_duration_s = cc.episode_duration_s;
        }
        if let Some(mix) = &self.trace_mix {
            if use_case == UseCase::Lb {
                return Err(usage("trace_mix", "lb has no bandwidth traces"));
            }
            if !(0.0..=1.0).contains(&mix.weight) {
                return Err(usage("trace_mix.weight", "must be in [0, 1]"));
            }
            let dir = rebase(config_dir, &mix.dir);
            let corpus = TraceCorpus::load_dir(&dir)
                .map_err(|e| usage("trace_mix.dir", format!("{}: {e}", dir.display())))?;
            factory = factory.with_corpus(corpus, mix.weight);
        }

        let out_dir = self
            .out_dir
            .map(|p| rebase(config_dir, &p))
            .unwrap_or_else(|| PathBuf::from("netcl-out"));

        Ok(ResolvedRun {
            use_case,
            mode,
            space_file,
            baseline,
            train_spec,
            curriculum_spec,
            factory,
            out_dir,
            seed,
        })
    }
}

fn rebase(dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

/// Resolve a space from `--preset`/`--space-file` style inputs; defaults to
/// the rl3 preset.
pub fn load_space(
    use_case: UseCase,
    preset_name: Option<&str>,
    space_path: Option<&Path>,
) -> CliResult<SpaceFile> {
    let file = match (preset_name, space_path) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage("give either a preset or a space file, not both"));
        }
        (Some(name), None) => {
            let level = PresetLevel::parse(name).map_err(|e| CliError::usage(e.to_string()))?;
            preset(use_case, level)
        }
        (None, Some(path)) => {
            let file = SpaceFile::load(path)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            if file.use_case != use_case {
                return Err(CliError::usage(format!(
                    "space file is for {}, expected {use_case}",
                    file.use_case
                )));
            }
            file
        }
        (None, None) => preset(use_case, PresetLevel::Rl3),
    };
    Ok(file)
}
