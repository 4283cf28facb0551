use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use driftskip::experiment::{
    cmd_compare, cmd_gen_noise, cmd_report, cmd_run, cmd_sweep, ComparisonReport, ExperimentConfig, ExperimentError,
    Overrides,
};

#[derive(Parser)]
#[command(version, about = "Drift-aware VQE runs on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Analytic expectations for every controller.
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    #[arg(long)]
    shots: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured controller; writes run_*.json and jobs_*.csv.
    Run(Common),
    /// Run the controllers on one shared trace and compare them.
    Compare(Common),
    /// One run per value of the configured sweep axis.
    Sweep(Common),
    /// Generate a drift trace from a noise config.
    GenNoise {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute a comparison from saved run records or directories of them.
    Report {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        records: Vec<PathBuf>,
    },
}

fn load(c: &Common) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    cfg.apply(&Overrides {
        seed: c.seed,
        out_dir: c.out.clone(),
        exact: c.exact,
        shots: c.shots,
    });
    Ok(cfg)
}

fn print_report(r: &ComparisonReport) {
    println!("controller         error        Q    vs-ref  skips  circuits");
    for e in &r.entries {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{:<16} {:>8} {:>8} {:>8} {:>6} {:>9}",
            e.controller,
            f(e.error),
            f(e.q),
            f(e.improvement),
            e.skips,
            e.total_circuits
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(c) => load(&c).and_then(|cfg| cmd_run(&cfg)).map(|records| {
            for r in records {
                let s = r.summary;
                println!(
                    "{}: {} accepted in {} jobs, final ideal energy {:.6}, circuits {}",
                    s.controller, s.accepted, s.jobs, s.final_ideal_energy, s.total_circuits
                );
            }
        }),
        Command::Compare(c) => load(&c).and_then(|cfg| cmd_compare(&cfg)).map(|r| print_report(&r)),
        Command::Sweep(c) => load(&c).and_then(|cfg| cmd_sweep(&cfg)).map(|r| {
            for row in r.rows {
                println!(
                    "{:>10}  prime {:>3}  s1/job {:>4}  final {:.6}  ground {}",
                    row.value,
                    row.prime_count,
                    row.s1_per_job,
                    row.final_ideal_energy,
                    row.ground_energy.map_or("-".into(), |g| format!("{g:.6}"))
                );
            }
        }),
        Command::GenNoise { config, out } => cmd_gen_noise(&config, &out).map(|t| {
            println!("{} offsets, {} episodes -> {}", t.offsets.len(), t.episodes.len(), out.display());
        }),
        Command::Report { out, records } => cmd_report(&records, out.as_deref()).map(|r| print_report(&r)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
