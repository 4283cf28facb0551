//! Sweeps the bundled H2-style bond-length family through the config-driven
//! sweep command and prints each final energy next to its exact ground energy.

use std::path::Path;

use driftskip::experiment::{cmd_sweep, ExperimentConfig};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/h2_bond_sweep.toml");
    let mut cfg = ExperimentConfig::load(&path).unwrap();
    cfg.out_dir = None;
    let report = cmd_sweep(&cfg).unwrap();
    println!("{:<10} {:>12} {:>12} {:>10}", "file", "final", "ground", "error");
    for row in report.rows {
        let g = row.ground_energy.unwrap();
        println!(
            "{:<10} {:>12.6} {:>12.6} {:>10.2e}",
            row.value,
            row.final_ideal_energy,
            g,
            (row.final_ideal_energy - g).abs()
        );
    }
}
