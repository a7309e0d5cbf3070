// Scratch diagnostic: evaluate the genet policy after each round prefix.

use netcl_core::curriculum::{genet_train_baseline, CurriculumSpec};
use netcl_core::eval::asymptotic_eval;
use netcl_core::policy::{PolicySnapshot, TrainSpec};
use netcl_core::rollout::{arch_for, PolicyRef, RuleKind, UseCaseFactory};
use netcl_core::space::{preset, PresetLevel};
use netcl_core::{ConfigDistribution, UseCase};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let use_case = UseCase::parse(args.get(1).map(|s| s.as_str()).unwrap_or("abr")).unwrap();
    let iters_per_round: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(22);
    let factory = UseCaseFactory::new(use_case);
    let space = preset(use_case, PresetLevel::Rl3).space().unwrap();
    let rule = RuleKind::default_for(use_case);
    let snapshot = PolicySnapshot::new_random(use_case, arch_for(use_case), 0);
    let spec = TrainSpec {
        seed: 0,
        ..TrainSpec::default()
    };
    let dist = ConfigDistribution::uniform(space.clone());
    for rounds in [1usize, 3, 5, 7, 9] {
        let cur = CurriculumSpec {
            rounds,
            iters_per_round,
            ..CurriculumSpec::default()
        };
        let (snap, log) =
            genet_train_baseline(&space, &snapshot, &spec, &cur, &factory, rule).unwrap();
        let report =
            asymptotic_eval(&[PolicyRef::Rl(&snap)], &factory, &dist, 100, 777).unwrap();
        println!(
            "rounds {rounds}: test mean {:>8.3}  last-gap {:>8.3}",
            report.policies[0].mean,
            log.rounds.last().unwrap().selected.gap.mean
        );
    }
}
