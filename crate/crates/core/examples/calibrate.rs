// Scratch calibration harness (not part of the deliverable).
// Usage: cargo run --release -p netcl-core --example calibrate -- <abr|cc|lb> [iters]

use netcl_core::curriculum::{genet_train_baseline, CurriculumSpec};
use netcl_core::eval::{asymptotic_eval, paired_diff_ci};
use netcl_core::policy::{train_uniform, PolicySnapshot, TrainSpec};
use netcl_core::rollout::{arch_for, PolicyRef, RuleKind, UseCaseFactory};
use netcl_core::space::{preset, PresetLevel};
use netcl_core::{ConfigDistribution, UseCase};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let use_case = UseCase::parse(args.get(1).map(|s| s.as_str()).unwrap_or("abr")).unwrap();
    let iters: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(90);
    let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0);
    let lr: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let entropy: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(0.05);

    let factory = UseCaseFactory::new(use_case);
    let space = preset(use_case, PresetLevel::Rl3).space().unwrap();
    let rule = RuleKind::default_for(use_case);
    let snapshot = PolicySnapshot::new_random(use_case, arch_for(use_case), seed);
    let spec = TrainSpec {
        iterations: iters,
        seed,
        learning_rate: lr,
        entropy_weight: entropy,
        ..TrainSpec::default()
    };

    let t0 = Instant::now();
    let dist = ConfigDistribution::uniform(space.clone());
    let (uniform, curve) = train_uniform(&dist, &snapshot, &spec, &factory).unwrap();
    println!(
        "uniform: {} iters in {:.1?}; curve head {:.3} tail {:.3}",
        iters,
        t0.elapsed(),
        curve.first().map(|c| c.mean_reward).unwrap_or(f64::NAN),
        curve.last().map(|c| c.mean_reward).unwrap_or(f64::NAN),
    );

    let rounds: usize = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(9);
    let cur = CurriculumSpec {
        rounds,
        iters_per_round: iters / rounds,
        ..CurriculumSpec::default()
    };
    let t1 = Instant::now();
    let (genet, log) =
        genet_train_baseline(&space, &snapshot, &spec, &cur, &factory, rule).unwrap();
    println!("genet: {rounds} rounds in {:.1?}", t1.elapsed());
    for r in &log.rounds {
        println!(
            "  round {}: gap {:.3} +- {:.3} at {:?}",
            r.round,
            r.selected.gap.mean,
            r.selected.gap.std,
            r.selected
                .config
                .values
                .iter()
                .map(|v| (v * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        );
    }

    let t2 = Instant::now();
    let policies = [
        PolicyRef::Rl(&uniform),
        PolicyRef::Rl(&genet),
        PolicyRef::Rule(rule),
    ];
    let report = asymptotic_eval(&policies, &factory, &dist, 200, 777).unwrap();
    println!("eval in {:.1?}", t2.elapsed());
    let names = ["uniform", "genet", "rule"];
    for (p, name) in report.policies.iter().zip(names) {
        println!(
            "  {name:>8}: mean {:.4} ci [{:.4}, {:.4}]",
            p.mean, p.ci_lo, p.ci_hi
        );
    }
    let (diff, hw) = paired_diff_ci(
        &report.policies[1].per_env,
        &report.policies[0].per_env,
        0.90,
        42,
    );
    println!(
        "  genet - uniform: {:.4} (ci half-width {:.4}) -> {}",
        diff,
        hw,
        if diff > hw { "PASS" } else { "fail" }
    );
    println!(
        "  frac genet>rule {:.3} vs uniform>rule {:.3}",
        report.fraction_better[1][2], report.fraction_better[0][2]
    );
}
