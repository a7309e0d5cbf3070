//! Fuzzed invariant suites for the three simulators and the distribution
//! algebra: many short random episodes under random policies, checking the
//! conservation laws that the step logic must never violate.

use netcl_core::cc::{CcEnv, CcSim};
use netcl_core::lb::{lb_reward, LbEnv, LbSim};
use netcl_core::rng::{child_rng, child_seed};
use netcl_core::space::{preset, PresetLevel};
use netcl_core::trace::{BandwidthTrace, CcSideChannel, JobTrace};
use netcl_core::{abr, ConfigDistribution, EnvConfig, UseCase};
use rand::Rng;

const EPISODES: u64 = 10_000;

#[test]
fn abr_buffer_bounds_and_clock_identity() {
    for ep in 0..EPISODES {
        let mut rng = child_rng(0xA11CE, &[ep]);
        let cfg = EnvConfig {
            use_case: UseCase::Abr,
            values: vec![
                rng.random_range(2.0..40.0),   // max buffer
                rng.random_range(1.0..6.0),    // chunk length
                rng.random_range(20.0..500.0), // min rtt
                rng.random_range(8.0..30.0),   // video length (short for speed)
                rng.random_range(2.0..20.0),   // bw change interval
                rng.random_range(2.0..200.0),  // max bw
            ],
        };
        let env = abr::AbrEnv::from_config(&cfg, ep, None).unwrap();
        let max_buffer = env.max_buffer_s;
        let mut sim = abr::AbrSim::new(env);
        while !sim.done() {
            let action = rng.random_range(0..sim.env().n_bitrates());
            match sim.step(action) {
                Ok(res) => {
                    assert!(res.rebuffer_s >= 0.0);
                    assert!(
                        res.new_buffer_s >= 0.0 && res.new_buffer_s <= max_buffer + 1e-9,
                        "buffer {} outside [0, {max_buffer}]",
                        res.new_buffer_s
                    );
                }
                Err(_) => break,
            }
        }
        let s = sim.state();
        assert!(
            (s.clock_s - (s.total_download_s + s.total_sleep_s)).abs() < 1e-6,
            "episode wall-clock must equal downloads plus sleeps"
        );
    }
}

#[test]
fn cc_packet_conservation_and_queue_bounds() {
    for ep in 0..EPISODES {
        let mut rng = child_rng(0xCC, &[ep]);
        let queue = rng.random_range(1..64usize);
        let bw = rng.random_range(0.5..20.0);
        let env = CcEnv {
            trace: BandwidthTrace::constant(bw, 4.0),
            side: CcSideChannel {
                one_way_latency_ms: rng.random_range(5.0..200.0),
                queue_packets: queue,
                loss_rate: rng.random_range(0.0..0.3),
                delay_noise_ms: if ep % 3 == 0 {
                    rng.random_range(0.0..20.0)
                } else {
                    0.0
                },
            },
            duration_s: rng.random_range(0.5..2.5),
        };
        let cap_pps = netcl_core::cc::mbps_to_pps(bw);
        let mut sim = CcSim::new(env, ep);
        while !sim.done() {
            let rate = rng.random_range(2.0..4.0 * cap_pps);
            let mi = rng.random_range(0.05..0.4);
            let report = sim.step(rate, mi).unwrap();
            let c = sim.counters();
            assert_eq!(
                c.sent,
                c.delivered + c.dropped_queue + c.dropped_random + sim.in_flight() as u64,
                "packet conservation"
            );
            assert!(sim.queue_occupancy() <= queue, "queue bound");
            assert!(report.loss_rate >= 0.0 && report.loss_rate <= 1.0);
            // Fluid bound with one packet of slack per window.
            assert!(
                report.throughput_pps
                    <= cap_pps + 1.0 / report.duration_s.max(1e-9) + 1e-9,
                "throughput {} exceeds capacity {cap_pps}",
                report.throughput_pps
            );
            if report.throughput_pps > 0.0 {
                assert!(report.min_rtt_s <= report.avg_rtt_s + 1e-12);
            }
        }
    }
}

#[test]
fn lb_work_conservation() {
    for ep in 0..EPISODES {
        let mut rng = child_rng(0x1B, &[ep]);
        let m = 3usize;
        let rates: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..4.0)).collect();
        let n_jobs = rng.random_range(1..60usize);
        let mut t = 0.0;
        let jobs: Vec<(f64, f64)> = (0..n_jobs)
            .map(|_| {
                t += rng.random_range(0.0..3.0);
                (t, rng.random_range(1.0..5000.0))
            })
            .collect();
        let env = LbEnv {
            service_rates: rates.clone(),
            jobs: JobTrace::new(jobs.clone()).unwrap(),
            queue_shuffle_prob: rng.random_range(0.0..1.0),
        };
        let mut sim = LbSim::new(env, ep);
        let mut chosen = Vec::new();
        while !sim.done() {
            let obs = sim.observe();
            assert!(obs.works.iter().all(|&w| w >= 0.0), "outstanding work >= 0");
            let pos = rng.random_range(0..m);
            // Record the real server behind the shuffled position by
            // matching the observed (work, rate) pair.
            let key = (obs.works[pos], obs.rates[pos]);
            chosen.push(key);
            sim.step(pos).unwrap();
        }
        // Work conservation: recompute every delay from the observation
        // snapshot that the simulator exposed at assignment time.
        let recomputed: Vec<f64> = chosen
            .iter()
            .zip(&jobs)
            .map(|((work, rate), &(_, size))| (work + size) / rate)
            .collect();
        for (a, b) in sim.delays().iter().zip(&recomputed) {
            assert!((a - b).abs() < 1e-9, "incremental {a} vs recomputed {b}");
        }
        let reward = lb_reward(sim.delays()).unwrap();
        let mean = sim.delays().iter().sum::<f64>() / sim.delays().len() as f64;
        assert!((reward + mean).abs() < 1e-12);
    }
}

#[test]
fn distribution_base_weight_decays_exactly() {
    let space = preset(UseCase::Abr, PresetLevel::Rl3).space().unwrap();
    let mut rng = child_rng(7, &[]);
    let mut dist = ConfigDistribution::uniform(space.clone());
    for r in 1..=9 {
        dist = dist.promote(space.sample(&mut rng), 0.3).unwrap();
        assert!(
            (dist.base_weight - 0.7f64.powi(r)).abs() < 1e-9,
            "round {r}: base weight {}",
            dist.base_weight
        );
        dist.validate().unwrap();
    }
}

#[test]
fn generated_traces_hold_invariants_across_configs() {
    let abr_space = preset(UseCase::Abr, PresetLevel::Rl3).space().unwrap();
    let cc_space = preset(UseCase::Cc, PresetLevel::Rl3).space().unwrap();
    let lb_space = preset(UseCase::Lb, PresetLevel::Rl3).space().unwrap();
    let mut rng = child_rng(0x7ACE, &[]);
    for i in 0..EPISODES {
        let seed = child_seed(0x7ACE, &[1, i]);
        match i % 3 {
            0 => {
                let mut cfg = abr_space.sample(&mut rng);
                cfg.values[3] = cfg.values[3].min(60.0); // short videos for speed
                let trace =
                    netcl_core::trace::gen_abr_trace(&cfg, &mut child_rng(seed, &[])).unwrap();
                assert!(trace.points().windows(2).all(|w| w[1].0 > w[0].0));
                assert!(trace.points().iter().all(|&(_, bw)| bw > 0.0));
            }
            1 => {
                let cfg = cc_space.sample(&mut rng);
                let (trace, _) =
                    netcl_core::trace::gen_cc_trace(&cfg, 5.0, &mut child_rng(seed, &[]))
                        .unwrap();
                assert!(trace.points().windows(2).all(|w| w[1].0 > w[0].0));
                assert!(trace.points().iter().all(|&(_, bw)| bw > 0.0));
            }
            _ => {
                let mut cfg = lb_space.sample(&mut rng);
                cfg.values[3] = cfg.values[3].min(200.0); // few jobs for speed
                let trace =
                    netcl_core::trace::gen_lb_trace(&cfg, &mut child_rng(seed, &[])).unwrap();
                assert!(trace.arrivals().windows(2).all(|w| w[1].0 >= w[0].0));
                assert!(trace.arrivals().iter().all(|&(_, s)| s > 0.0));
            }
        }
    }
}
