//! Drives SPSA by hand: ask for the perturbation pair, evaluate it, tell the energies.

use driftskip::engine::{build_ansatz, hamiltonian_energy, AnsatzKind, AnsatzSpec, ParameterVector, Shots};
use driftskip::pauli::parse_hamiltonian;
use driftskip::spectrum::ground_state_energy;
use driftskip::spsa::{random_initial_point, Spsa, SpsaConfig};

fn main() {
    let h = parse_hamiltonian(include_str!("../data/eq11.txt")).unwrap();
    let spec = AnsatzSpec::new(AnsatzKind::Ra, 2, 2);
    let circuit = build_ansatz(&spec).unwrap();
    let energy = |theta: &ParameterVector| hamiltonian_energy(&circuit, theta, h.terms(), Shots::Exact, 0).unwrap();

    let mut spsa = Spsa::new(
        SpsaConfig { seed: 3, ..Default::default() },
        random_initial_point(spec.parameter_count(), 3),
    )
    .unwrap();

    // A rescheduled job asks again and gets the very same pair.
    let first = spsa.ask();
    assert_eq!(spsa.ask(), first);

    for k in 0..400 {
        let (plus, minus) = spsa.ask();
        spsa.tell(energy(&plus), energy(&minus)).unwrap();
        if k % 50 == 0 {
            println!("k {k:>3}: E = {:.6}", energy(spsa.theta()));
        }
    }
    println!(
        "final E = {:.6}, ground = {:.6}",
        energy(spsa.theta()),
        ground_state_energy(&h).unwrap()
    );
}
