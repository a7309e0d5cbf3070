// Scratch diagnostic: does mixture training learn a promoted config?

use netcl_core::policy::{train_uniform, PolicySnapshot, TrainSpec};
use netcl_core::rollout::{arch_for, evaluate, PolicyRef, UseCaseFactory};
use netcl_core::space::{preset, PresetLevel};
use netcl_core::{ConfigDistribution, EnvConfig, UseCase};

fn main() {
    let factory = UseCaseFactory::new(UseCase::Abr);
    let space = preset(UseCase::Abr, PresetLevel::Rl3).space().unwrap();
    let easy = EnvConfig {
        use_case: UseCase::Abr,
        values: vec![31.21, 1.0, 20.0, 265.34, 100.0, 1000.0],
    };
    let cata = EnvConfig {
        use_case: UseCase::Abr,
        values: vec![2.0, 10.0, 1000.0, 86.65, 100.0, 2.0],
    };
    let snapshot = PolicySnapshot::new_random(UseCase::Abr, arch_for(UseCase::Abr), 0);
    let spec = TrainSpec {
        iterations: 22,
        seed: 1,
        ..TrainSpec::default()
    };

    for (name, promoted) in [
        ("easy@0.3", vec![(easy.clone(), 0.3)]),
        ("cata@0.3", vec![(cata.clone(), 0.3)]),
        ("cata+easy", vec![(cata.clone(), 0.21), (easy.clone(), 0.3)]),
    ] {
        let base_weight = 1.0 - promoted.iter().map(|(_, w)| w).sum::<f64>();
        let dist = ConfigDistribution {
            base_space: space.clone(),
            promoted,
            base_weight,
        };
        let (out, curve) = train_uniform(&dist, &snapshot, &spec, &factory).unwrap();
        let on_easy = evaluate(&PolicyRef::Rl(&out), &factory, &[easy.clone()], 5, 7).unwrap()[0];
        let on_cata = evaluate(&PolicyRef::Rl(&out), &factory, &[cata.clone()], 5, 7).unwrap()[0];
        let box_dist = ConfigDistribution::uniform(space.clone());
        let mut box_rng = netcl_core::rng::child_rng(9, &[]);
        let box_cfgs: Vec<EnvConfig> = (0..50).map(|_| box_dist.sample(&mut box_rng)).collect();
        let on_box = evaluate(&PolicyRef::Rl(&out), &factory, &box_cfgs, 1, 11)
            .unwrap()
            .iter()
            .sum::<f64>()
            / 50.0;
        println!(
            "{name:>10}: curve tail {:>8.3} | greedy easy {:>8.3} cata {:>8.3} box {:>8.3}",
            curve.last().unwrap().mean_reward,
            on_easy,
            on_cata,
            on_box
        );
    }
}
