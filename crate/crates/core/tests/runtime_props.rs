mod common;

use common::*;
use driftskip::experiment::accounting_matches;
use driftskip::noise::{generate_trace, DriftEpisode, EpisodeShape, NoiseConfig};
use driftskip::runtime::{run_experiment, Controller, ControllerConfig, Decision, RunRecord};
use proptest::prelude::*;

fn scripted(horizon: usize, episodes: Vec<DriftEpisode>) -> driftskip::noise::DriftTrace {
    generate_trace(&NoiseConfig::scripted(horizon, episodes)).unwrap()
}

fn stepped() -> driftskip::noise::DriftTrace {
    scripted(
        400,
        vec![
            DriftEpisode::new(EpisodeShape::Step, 20, 15, 1.5),
            DriftEpisode::new(EpisodeShape::Spike, 60, 3, -2.0),
            DriftEpisode::new(EpisodeShape::Step, 90, 10, -1.0),
        ],
    )
}

fn assert_sound(record: &RunRecord) {
    for j in &record.jobs {
        let Some(det) = j.detection else {
            assert_eq!(j.decision, Decision::Accept, "job {} has no detection", j.job);
            continue;
        };
        let (d, ef, gf, g) = recompute_detection(j);
        assert!((d - det.d).abs() < 1e-12 && (ef - det.ef).abs() < 1e-12);
        assert!((gf - det.gf).abs() < 1e-12 && (g - det.g).abs() < 1e-12);
        let agree = g * gf > 0.0;
        assert_eq!(agree, j.decision == Decision::Accept, "job {}: G={g} Gf={gf}", j.job);
    }
}

#[test]
fn decisions_follow_logged_signs() {
    for k in 1..=3 {
        let s = setup(heh_like(), 2, exact(ControllerConfig::multi_reference(k, 0.8)), stepped(), 120, 3);
        let r = run_experiment(&s).unwrap();
        assert!(r.summary.skips > 0, "K={k}: the scripted steps should cause skips");
        assert_sound(&r);
    }
}

#[test]
fn skips_only_where_reference_drift_differs() {
    let trace = stepped();
    let s = setup(heh_like(), 2, exact(ControllerConfig::multi_reference(2, 0.8)), trace.clone(), 120, 9);
    let r = run_experiment(&s).unwrap();
    let refs = reference_jobs(&r, 2);
    for (j, jobs) in r.jobs.iter().zip(&refs) {
        if j.decision == Decision::Reschedule {
            let here = trace.offsets[j.job];
            assert!(
                jobs.iter().any(|&rj| trace.offsets[rj] != here),
                "job {} skipped with every reference under the same drift",
                j.job
            );
        }
    }
}

#[test]
fn skipped_jobs_neither_run_stage2_nor_advance() {
    let s = setup(heh_like(), 2, exact(ControllerConfig::multi_reference(2, 0.8)), stepped(), 120, 4);
    let r = run_experiment(&s).unwrap();
    let mut iteration = 0;
    for j in &r.jobs {
        assert_eq!(j.iteration, iteration);
        match j.decision {
            Decision::Accept => {
                assert!(j.energy.is_some() && j.s2_circuits == r.summary.minor_count * 2);
                iteration += 1;
            }
            Decision::Reschedule => assert!(j.energy.is_none() && j.e_minor.is_none() && j.s2_circuits == 0),
        }
    }
    assert_eq!(iteration, r.summary.accepted);
}

#[test]
fn reschedule_reissues_the_same_pair() {
    let trace = scripted(60, vec![DriftEpisode::new(EpisodeShape::Step, 8, 40, 3.0)]);
    let s = setup(heh_like(), 2, exact(ControllerConfig::multi_reference(2, 0.8).with_sigma(1000)), trace, 40, 2);
    let mut ctl = Controller::new(&s).unwrap();
    let mut last_pair = None;
    let mut repeats = 0;
    for job in 0..30 {
        let before = ctl.optimizer().theta().clone();
        let pair = ctl.optimizer().clone().ask();
        let e = ctl.step(job).unwrap();
        if e.decision == Decision::Reschedule {
            assert_eq!(ctl.optimizer().theta(), &before);
            if let Some(p) = &last_pair {
                assert_eq!(p, &pair);
                repeats += 1;
            }
            last_pair = Some(pair);
        } else {
            last_pair = None;
        }
    }
    assert!(repeats > 0);
}

#[test]
fn window_written_only_on_accept_or_refresh() {
    for sigma in [1, 2, 5] {
        let s = setup(
            heh_like(),
            2,
            exact(ControllerConfig::multi_reference(3, 0.8).with_sigma(sigma)),
            stepped(),
            120,
            6,
        );
        let r = run_experiment(&s).unwrap();
        for pair in r.jobs.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert!(b.recorded_energies.len() <= 3);
            let expected: Vec<f64> = match (a.decision, a.refreshed) {
                (Decision::Accept, _) => std::iter::once(a.e_prime)
                    .chain(a.recorded_energies.iter().copied())
                    .take(3)
                    .collect(),
                (Decision::Reschedule, true) => a.reference_energies.clone(),
                (Decision::Reschedule, false) => a.recorded_energies.clone(),
            };
            assert_eq!(b.recorded_energies, expected, "sigma {sigma}, job {}", b.job);
            if a.decision == Decision::Accept {
                assert_eq!(b.reference_iterations[0], a.iteration);
            }
        }
    }
}

#[test]
fn refresh_happens_every_sigma_skips() {
    let trace = scripted(200, vec![DriftEpisode::new(EpisodeShape::Step, 10, 150, 2.0)]);
    let s = setup(heh_like(), 2, exact(ControllerConfig::multi_reference(2, 0.8).with_sigma(3)), trace, 60, 8);
    let r = run_experiment(&s).unwrap();
    let mut run = 0;
    for j in &r.jobs {
        match j.decision {
            Decision::Accept => run = 0,
            Decision::Reschedule => {
                run += 1;
                assert_eq!(j.refreshed, run % 3 == 0, "job {}", j.job);
            }
        }
    }
    assert_eq!(r.summary.refreshes, r.jobs.iter().filter(|j| j.refreshed).count());
    assert_eq!(r.summary.accepted, 60, "a long step must be waited out by refreshing");
}

#[test]
fn drift_free_multi_reference_tracks_baseline() {
    for seed in [1, 2, 3] {
        let base = run_experiment(&setup(heh_like(), 2, exact(ControllerConfig::baseline()), quiet(200), 80, seed)).unwrap();
        for cfg in [ControllerConfig::multi_reference(2, 0.8), ControllerConfig::single_reference()] {
            let r = run_experiment(&setup(heh_like(), 2, exact(cfg), quiet(200), 80, seed)).unwrap();
            assert_eq!(r.summary.skips, 0);
            assert_eq!(r.summary.fingerprint, base.summary.fingerprint);
            for (a, b) in r.jobs.iter().zip(&base.jobs) {
                assert!((a.energy.unwrap() - b.energy.unwrap()).abs() < 1e-12);
            }
            for (a, b) in r.summary.final_theta.as_slice().iter().zip(base.summary.final_theta.as_slice()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn k_sweep_cost_is_linear() {
    let h = heh_like();
    for k in 1..=4 {
        let s = setup(h.clone(), 1, ControllerConfig::multi_reference(k, 0.8).with_shots(driftskip::engine::Shots::Count(64)), quiet(50), 20, 1);
        let r = run_experiment(&s).unwrap();
        let full = r.jobs.iter().find(|j| j.window_size == k).unwrap();
        assert_eq!(full.s1_circuits, (1 + k) * 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn accounting_closes_for_any_controller(
        kind in 0usize..3,
        k in 1usize..=4,
        th_p in prop::sample::select(vec![0.5, 0.8, 0.95, 1.0]),
        sigma in 1usize..6,
        seed in 0u64..1000,
        noisy in any::<bool>(),
    ) {
        let base = match kind {
            0 => ControllerConfig::baseline(),
            1 => ControllerConfig::single_reference(),
            _ => ControllerConfig::multi_reference(k, th_p),
        };
        let c = base.with_sigma(sigma).with_shots(driftskip::engine::Shots::Count(256));
        let trace = if noisy {
            generate_trace(&NoiseConfig {
                seed,
                spike: Some(driftskip::noise::EpisodeProcess { rate: 0.05, magnitude: [0.5, 2.0], duration: [1, 6] }),
                ..NoiseConfig::quiet(300)
            })
            .unwrap()
        } else {
            quiet(300)
        };
        let r = run_experiment(&setup(heh_like(), 1, c.clone(), trace, 40, seed)).unwrap();
        prop_assert!(accounting_matches(&r));
        let refs = c.effective_reference_count();
        for j in &r.jobs {
            prop_assert!(j.window_size <= refs);
            prop_assert_eq!(j.s1_circuits, (1 + j.window_size) * r.summary.prime_count * 2);
        }
        prop_assert_eq!(r.summary.prime_count + r.summary.minor_count, 4);
    }
}
