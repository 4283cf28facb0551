//! Drift traces: a noisy batch-mean series, scripted episodes, and a save/load round trip.

use driftskip::noise::{generate_trace, load_trace, save_trace, DriftEpisode, EpisodeShape, NoiseConfig};

fn main() {
    // Per-job Gaussian wander around an expectation of -0.62.
    let cfg = NoiseConfig {
        seed: 2,
        baseline_std: 0.07,
        energy_scale: 0.62,
        ..NoiseConfig::quiet(100)
    };
    let trace = generate_trace(&cfg).unwrap();
    let batch: Vec<f64> = trace.offsets.iter().map(|o| -0.62 + o * cfg.energy_scale).collect();
    let mean = batch.iter().sum::<f64>() / batch.len() as f64;
    let (lo, hi) = batch
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    println!("100 batches: mean {mean:.3}, range {:.3}", hi - lo);

    let scripted = NoiseConfig::scripted(
        40,
        vec![
            DriftEpisode::new(EpisodeShape::Step, 5, 6, 0.3),
            DriftEpisode::new(EpisodeShape::Spike, 15, 5, -0.5),
            DriftEpisode::new(EpisodeShape::Ramp, 25, 5, 0.4),
            DriftEpisode::new(EpisodeShape::RandomWalk, 32, 8, 0.2),
        ],
    );
    let trace = generate_trace(&scripted).unwrap();
    for (job, o) in trace.offsets.iter().enumerate() {
        let bar = "#".repeat((o.abs() * 40.0).round() as usize);
        println!("job {job:>2} {o:+.3} {}{bar}", if *o < 0.0 { "-" } else { "+" });
    }

    let dir = std::env::temp_dir().join(format!("driftskip-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trace.json");
    save_trace(&trace, &path).unwrap();
    let back = load_trace(&path).unwrap();
    println!("round trip equal: {}", back == trace);
    std::fs::remove_dir_all(dir).ok();
}
