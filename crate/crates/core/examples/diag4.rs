// Scratch calibration for the BO-efficiency and gap-improvement checks.

use netcl_core::curriculum::{bo_search, gap_improvement_scan, random_search, BaselineGapOracle};
use netcl_core::policy::{train_uniform, PolicySnapshot, TrainSpec};
use netcl_core::rng::child_seed;
use netcl_core::rollout::{arch_for, RuleKind, UseCaseFactory};
use netcl_core::space::{preset, PresetLevel};
use netcl_core::{ConfigDistribution, UseCase};
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "bo".into());
    match which.as_str() {
        "bo" => bo_efficiency(),
        "scan" => scan(),
        _ => panic!("bo|scan"),
    }
}

fn mid_snapshot(
    use_case: UseCase,
    iters: usize,
    lr: f64,
    ent: f64,
) -> (PolicySnapshot, UseCaseFactory) {
    let factory = UseCaseFactory::new(use_case);
    let space = preset(use_case, PresetLevel::Rl3).space().unwrap();
    let snapshot = PolicySnapshot::new_random(use_case, arch_for(use_case), 42);
    let spec = TrainSpec {
        iterations: iters,
        learning_rate: lr,
        entropy_weight: ent,
        seed: 42,
        ..TrainSpec::default()
    };
    let dist = ConfigDistribution::uniform(space);
    let (snap, _) = train_uniform(&dist, &snapshot, &spec, &factory).unwrap();
    (snap, factory)
}

fn bo_efficiency() {
    let use_case = match std::env::args().nth(2).as_deref() {
        Some("cc") => UseCase::Cc,
        _ => UseCase::Abr,
    };
    let t0 = Instant::now();
    let (snap, factory) = match use_case {
        UseCase::Abr => mid_snapshot(UseCase::Abr, 40, 0.003, 0.05),
        UseCase::Cc => mid_snapshot(UseCase::Cc, 30, 0.01, 0.05),
        _ => unreachable!(),
    };
    println!("mid-training snapshot in {:.1?}", t0.elapsed());
    let space = preset(use_case, PresetLevel::Rl3).space().unwrap();
    let oracle = BaselineGapOracle {
        rl: &snap,
        rule: RuleKind::default_for(use_case),
        factory: &factory,
        k: 10,
    };
    let mut wins = 0;
    for seed in 0..10u64 {
        let t = Instant::now();
        let bo = bo_search(&space, &oracle, 15, child_seed(1000, &[seed, 0])).unwrap();
        let rand = random_search(&space, &oracle, 100, child_seed(1000, &[seed, 1])).unwrap();
        let (b, r) = (bo.best().gap.mean, rand.best().gap.mean);
        let ok = b >= 0.9 * r;
        if ok {
            wins += 1;
        }
        println!(
            "seed {seed}: bo15 {b:>9.3} vs rand100 {r:>9.3} -> {} ({:.1?})",
            if ok { "ok" } else { "MISS" },
            t.elapsed()
        );
    }
    println!("wins {wins}/10, total {:.1?}", t0.elapsed());
}

fn scan() {
    // Longer episodes: steady-state behavior dominates ramp-up.
    let cc_duration = 30.0;
    // args: scan <lr> <ent> <n_configs> <snapshot_iters> <tune_iters>
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.003);
    let ent: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let n: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(30);
    let snap_iters: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(30);
    let tune_iters: usize = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(20);
    let genet_mid = args.get(7).map(|s| s == "genet").unwrap_or(false);
    let t0 = Instant::now();
    let (snap, factory) = if genet_mid {
        // Intermediate model from curriculum training instead of uniform.
        use netcl_core::curriculum::{genet_train_baseline, CurriculumSpec};
        let mut factory = UseCaseFactory::new(UseCase::Cc); factory.cc_duration_s = cc_duration;
        let space = preset(UseCase::Cc, PresetLevel::Rl3).space().unwrap();
        let snapshot = PolicySnapshot::new_random(UseCase::Cc, arch_for(UseCase::Cc), 42);
        let spec = TrainSpec {
            learning_rate: 0.01,
            entropy_weight: 0.05,
            seed: 42,
            ..TrainSpec::default()
        };
        let cur = CurriculumSpec {
            rounds: snap_iters / 10,
            iters_per_round: 10,
            ..CurriculumSpec::default()
        };
        let (snap, _) =
            genet_train_baseline(&space, &snapshot, &spec, &cur, &factory, RuleKind::Bbr)
                .unwrap();
        (snap, factory)
    } else {
        { let (s, mut f) = mid_snapshot(UseCase::Cc, snap_iters, 0.01, 0.05); f.cc_duration_s = cc_duration; (s, f) }
    };
    println!("mid-training CC snapshot in {:.1?}", t0.elapsed());
    let space = preset(UseCase::Cc, PresetLevel::Rl3).space().unwrap();
    let spec = TrainSpec {
        learning_rate: lr,
        entropy_weight: ent,
        ..TrainSpec::default()
    };
    let result =
        gap_improvement_scan(&space, &snap, RuleKind::Bbr, &factory, n, tune_iters, &spec, std::env::args().nth(8).and_then(|s| s.parse().ok()).unwrap_or(2024))
            .unwrap();
    let mut sorted = result.rows.clone(); sorted.sort_by(|a, b| b.gap.partial_cmp(&a.gap).unwrap()); for row in sorted.iter().take(8) {
        println!("gap {:>12.1}  improvement {:>12.1}  cfg {:?}", row.gap, row.improvement, row.config.values.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>());
    }
    println!("spearman {:.3} in {:.1?}", result.spearman, t0.elapsed());
}
