// Scratch: single-config CC fine-tuning behavior from a mid-training
// snapshot.

use netcl_core::policy::{train_uniform, PolicySnapshot, TrainSpec};
use netcl_core::rollout::{arch_for, evaluate, PolicyRef, UseCaseFactory};
use netcl_core::space::{preset, PresetLevel};
use netcl_core::{ConfigDistribution, EnvConfig, UseCase};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let ent: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let factory = UseCaseFactory::new(UseCase::Cc);
    let space = preset(UseCase::Cc, PresetLevel::Rl3).space().unwrap();
    let snapshot = PolicySnapshot::new_random(UseCase::Cc, arch_for(UseCase::Cc), 42);
    let pre_spec = TrainSpec {
        iterations: 40,
        learning_rate: 0.01,
        entropy_weight: 0.05,
        seed: 42,
        ..TrainSpec::default()
    };
    let dist = ConfigDistribution::uniform(space.clone());
    let (mid, _) = train_uniform(&dist, &snapshot, &pre_spec, &factory).unwrap();

    // A few fixed configs across the load spectrum.
    let configs = [
        vec![32.7, 373.88, 11.3, 0.02, 3.08, 0.0],
        vec![3.0, 200.0, 10.0, 0.01, 10.0, 0.0],
        vec![80.0, 50.0, 2.0, 0.03, 150.0, 0.0],
    ];
    for values in configs {
        let cfg = EnvConfig {
            use_case: UseCase::Cc,
            values,
        };
        let point = ConfigDistribution {
            base_space: space.point_space(&cfg),
            promoted: vec![(cfg.clone(), 1.0)],
            base_weight: 0.0,
        };
        let tune = TrainSpec {
            iterations: 60,
            learning_rate: lr,
            entropy_weight: ent,
            seed: 7,
            ..TrainSpec::default()
        };
        let (tuned, curve) = train_uniform(&point, &mid, &tune, &factory).unwrap();
        let before = evaluate(&PolicyRef::Rl(&mid), &factory, &[cfg.clone()], 10, 9).unwrap()[0];
        let after = evaluate(&PolicyRef::Rl(&tuned), &factory, &[cfg.clone()], 10, 9).unwrap()[0];
        println!(
            "cfg {:?}: before {before:>10.1} after {after:>10.1} (train curve {:.1} -> {:.1})",
            cfg.values,
            curve.first().unwrap().mean_reward,
            curve.last().unwrap().mean_reward
        );
    }
}
