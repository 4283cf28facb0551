//! Builds an ansatz, measures every term exactly and with shots, and checks
//! the variational energy against the dense ground energy.

use driftskip::engine::{build_ansatz, hamiltonian_energy, simulate, AnsatzKind, AnsatzSpec, Shots};
use driftskip::pauli::parse_hamiltonian;
use driftskip::spectrum::ground_state_energy;
use driftskip::spsa::random_initial_point;

fn main() {
    let h = parse_hamiltonian(include_str!("../data/heh_like.txt")).unwrap();
    let spec = AnsatzSpec::new(AnsatzKind::Su2, h.qubit_count(), 2);
    let circuit = build_ansatz(&spec).unwrap();
    println!(
        "SU2 ansatz: {} gates, {} parameters, {} entanglers",
        circuit.gates().len(),
        circuit.parameter_count(),
        circuit.entangling_count()
    );

    let theta = random_initial_point(spec.parameter_count(), 4);
    let state = simulate(&circuit, &theta).unwrap();
    println!("norm² = {:.15}", state.norm_sqr());
    for term in h.terms() {
        let exact = state.expectation(&term.string).unwrap();
        let sampled = state.measure(&term.string, Shots::Count(8192), 1).unwrap();
        println!("  <{}> exact {exact:+.5}  8192 shots {sampled:+.5}", term.string);
    }

    let exact = hamiltonian_energy(&circuit, &theta, h.terms(), Shots::Exact, 0).unwrap();
    let shots = hamiltonian_energy(&circuit, &theta, h.terms(), Shots::Count(8192), 2).unwrap();
    let ground = ground_state_energy(&h).unwrap();
    println!("energy exact {exact:.6}, sampled {shots:.6}, ground {ground:.6}");
}
