//! Baseline, single-reference and multi-reference controllers on seeded drift
//! traces of the HeH-like Hamiltonian. Pass a trace count as the first argument
//! (default 20).

use driftskip::engine::{AnsatzKind, AnsatzSpec, Shots};
use driftskip::experiment::compare_records;
use driftskip::noise::{generate_trace, EpisodeProcess, NoiseConfig};
use driftskip::pauli::parse_hamiltonian;
use driftskip::runtime::{run_experiment, ControllerConfig, RunSetup};
use driftskip::spsa::SpsaConfig;
use rayon::prelude::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() {
    let traces: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let h = parse_hamiltonian(include_str!("../data/heh_like.txt")).unwrap();
    let shots = Shots::Count(8192);
    let controllers = [
        ControllerConfig::baseline().with_shots(shots),
        ControllerConfig::single_reference().with_shots(shots),
        ControllerConfig::multi_reference(1, 1.0).with_shots(shots),
        ControllerConfig::multi_reference(2, 0.8).with_shots(shots),
    ];
    let labels = ["baseline", "single_ref", "multi K=1 th=1.0", "multi K=2 th=0.8"];

    let errors: Vec<Vec<f64>> = (0..traces)
        .into_par_iter()
        .map(|seed| {
            let process = |rate, duration| EpisodeProcess { rate, magnitude: [1.0, 2.0], duration };
            let trace = generate_trace(&NoiseConfig {
                seed: 100 + seed,
                circuit_sensitivity_std: 1.0,
                spike: Some(process(0.01, [2, 8])),
                step: Some(process(0.005, [5, 20])),
                ..NoiseConfig::quiet(1000)
            })
            .unwrap();
            let records: Vec<_> = controllers
                .iter()
                .map(|c| {
                    run_experiment(&RunSetup {
                        hamiltonian: h.clone(),
                        ansatz: AnsatzSpec::new(AnsatzKind::Ra, 4, 2),
                        trace: trace.clone(),
                        controller: c.clone(),
                        spsa: SpsaConfig { seed, ..Default::default() },
                        budget: 350,
                        seed,
                        initial_theta: None,
                    })
                    .unwrap()
                })
                .collect();
            let report = compare_records(&records).unwrap();
            report.entries.iter().map(|e| e.error.unwrap()).collect()
        })
        .collect();

    println!("median |E_final - E_ground| over {traces} traces");
    for (i, label) in labels.iter().enumerate() {
        println!("  {label:<18} {:.4}", median(errors.iter().map(|e| e[i]).collect()));
    }
}
