//! The detection arithmetic on hand-picked numbers, then a controller
//! stepping through a scripted drift step job by job.

use driftskip::engine::{AnsatzKind, AnsatzSpec, Shots};
use driftskip::noise::{generate_trace, DriftEpisode, EpisodeShape, NoiseConfig};
use driftskip::pauli::parse_hamiltonian;
use driftskip::runtime::{detect_drift, single_reference_detect, Controller, ControllerConfig, RunSetup, Tolerance};
use driftskip::spsa::SpsaConfig;

fn main() {
    let r = detect_drift(&[1.0], &[-0.5], -0.45, &[-0.3], Tolerance::None).unwrap();
    println!("one reference:  {r:?}");
    let q = single_reference_detect(-0.5, -0.45, -0.3, Tolerance::None);
    println!("single-ref fn:  {q:?}");
    let r = detect_drift(&[0.5, 0.5], &[-0.5, -0.4], -0.55, &[-0.45, -0.35], Tolerance::None).unwrap();
    println!("two references: {r:?}");

    let trace = generate_trace(&NoiseConfig::scripted(
        60,
        vec![
            DriftEpisode::new(EpisodeShape::Step, 12, 30, 0.8),
            DriftEpisode::new(EpisodeShape::Spike, 45, 4, -1.0),
        ],
    ))
    .unwrap();
    let setup = RunSetup {
        hamiltonian: parse_hamiltonian(include_str!("../data/heh_like.txt")).unwrap(),
        ansatz: AnsatzSpec::new(AnsatzKind::Ra, 4, 2),
        trace,
        controller: ControllerConfig::multi_reference(2, 0.8)
            .with_shots(Shots::Exact)
            .with_sigma(3),
        spsa: SpsaConfig { seed: 8, ..Default::default() },
        budget: 40,
        seed: 8,
        initial_theta: None,
    };
    let mut ctl = Controller::new(&setup).unwrap();
    println!("prime terms {:?}, minor terms {:?}", ctl.prime_indices(), ctl.minor_indices());
    for job in 0..60 {
        let e = ctl.step(job).unwrap();
        let (g, gf) = e.detection.map_or((f64::NAN, f64::NAN), |d| (d.g, d.gf));
        println!(
            "job {job:>2} it {:>2} offset {:+.2} G {g:+.4} Gf {gf:+.4} {:<10} s1 {} s2 {}{}",
            e.iteration,
            e.offset,
            e.decision.as_str(),
            e.s1_circuits,
            e.s2_circuits,
            if e.refreshed { "  (references refreshed)" } else { "" }
        );
    }
}
