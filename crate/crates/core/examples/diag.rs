// Scratch diagnostic (not part of the deliverable): train on a single ABR
// config and watch the curve.

use netcl_core::policy::{train_uniform, PolicySnapshot, TrainSpec};
use netcl_core::rollout::{arch_for, evaluate, PolicyRef, RuleKind, UseCaseFactory};
use netcl_core::space::{preset, PresetLevel};
use netcl_core::{ConfigDistribution, EnvConfig, UseCase};

fn main() {
    let factory = UseCaseFactory::new(UseCase::Abr);
    let space = preset(UseCase::Abr, PresetLevel::Rl3).space().unwrap();
    let cfg = EnvConfig {
        use_case: UseCase::Abr,
        values: vec![31.21, 1.0, 20.0, 265.34, 100.0, 1000.0],
    };
    let snapshot = PolicySnapshot::new_random(UseCase::Abr, arch_for(UseCase::Abr), 0);
    let dist = ConfigDistribution {
        base_space: space.point_space(&cfg),
        promoted: vec![(cfg.clone(), 1.0)],
        base_weight: 0.0,
    };
    let spec = TrainSpec {
        iterations: 40,
        seed: 1,
        ..TrainSpec::default()
    };
    let (out, curve) = train_uniform(&dist, &snapshot, &spec, &factory).unwrap();
    for c in curve.iter().step_by(4) {
        println!("iter {:>3}  mean {:>8.3}  std {:>7.3}", c.iteration, c.mean_reward, c.reward_std);
    }
    let rl = evaluate(&PolicyRef::Rl(&out), &factory, &[cfg.clone()], 10, 7).unwrap()[0];
    let rule = evaluate(&PolicyRef::Rule(RuleKind::Mpc), &factory, &[cfg], 10, 7).unwrap()[0];
    println!("greedy rl {rl:.3} vs mpc {rule:.3}");
}
