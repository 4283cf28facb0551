//! Prime/minor partitions of the bundled Hamiltonians at several thresholds.

use driftskip::pauli::{parse_hamiltonian, partition_prime_minor};

fn main() {
    let files = [
        ("eq11", include_str!("../data/eq11.txt")),
        ("heh_like", include_str!("../data/heh_like.txt")),
        ("lih_like", include_str!("../data/lih_like.txt")),
        ("hf_like", include_str!("../data/hf_like.txt")),
    ];
    for (name, text) in files {
        let h = parse_hamiltonian(text).expect("bundled file parses");
        println!(
            "{name}: {} qubits, {} observables, identity offset {}",
            h.qubit_count(),
            h.observable_count(),
            h.identity_offset()
        );
        for th_p in [0.5, 0.7, 0.8, 0.9, 1.0] {
            let p = partition_prime_minor(&h, th_p).unwrap();
            println!(
                "  th_p {th_p:.1}: {:>3} prime / {:>3} minor, prime share {:.4}",
                p.prime.len(),
                p.minor.len(),
                p.prime_share()
            );
        }
    }

    let h = parse_hamiltonian(include_str!("../data/eq11.txt")).unwrap();
    let p = partition_prime_minor(&h, 0.8).unwrap();
    let names: Vec<String> = p.prime.iter().map(|t| t.string.to_string()).collect();
    println!("eq11 prime subset at 0.8: {names:?}");
}
