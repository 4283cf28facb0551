//! Config-driven runs, comparisons, sweeps and reports, with their file outputs.

mod config;
mod report;

pub use config::{ExperimentConfig, OptimizerSection, Overrides, SweepAxis, SweepSection};
pub use report::{
    accounting_matches, compare_records, progress_quality, write_jobs_csv, ComparisonEntry, ComparisonReport,
    CSV_HEADER,
};

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::AnsatzSpec;
use crate::noise::{generate_trace, save_trace, DriftTrace, NoiseConfig};
use crate::runtime::{run_experiment, ControllerKind, RunRecord, RunSetup, RuntimeError};
use crate::spectrum::ground_state_energy;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error("run {run:?} failed: {source}")]
    Run { run: String, source: RuntimeError },

    #[error("refusing to compare: {0}")]
    Mismatch(String),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// File-safe, unique names for a list of labels (`baseline`, `baseline_2`, ...).
pub fn unique_names(labels: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    labels
        .into_iter()
        .map(|l| {
            let base: String = l
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
                .collect();
            let mut name = base.clone();
            let mut n = 2;
            while !seen.insert(name.clone()) {
                name = format!("{base}_{n}");
                n += 1;
            }
            name
        })
        .collect()
}

fn run_all(setups: &[RunSetup]) -> Result<Vec<RunRecord>, ExperimentError> {
    let names = unique_names(setups.iter().map(|s| s.controller.name()));
    setups
        .par_iter()
        .zip(names.par_iter())
        .map(|(s, name)| {
            run_experiment(s).map_err(|source| ExperimentError::Run {
                run: name.clone(),
                source,
            })
        })
        .collect()
}

fn out_dir(cfg: &ExperimentConfig) -> Result<Option<&Path>, ExperimentError> {
    match cfg.out_dir.as_deref() {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            Ok(Some(dir))
        }
        None => Ok(None),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Writes `run_<name>.json` and `jobs_<name>.csv` for each record.
pub fn write_records(records: &[RunRecord], dir: &Path) -> Result<Vec<String>, ExperimentError> {
    let names = unique_names(records.iter().map(|r| r.summary.controller.clone()));
    for (r, name) in records.iter().zip(&names) {
        write_json(r, &dir.join(format!("run_{name}.json")))?;
        let csv_path = dir.join(format!("jobs_{name}.csv"));
        let file = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
        write_jobs_csv(r, std::io::BufWriter::new(file))?;
    }
    Ok(names)
}

/// Runs every configured controller on the shared setup.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, ExperimentError> {
    let records = run_all(&cfg.setups()?)?;
    if let Some(dir) = out_dir(cfg)? {
        write_records(&records, dir)?;
    }
    Ok(records)
}

/// Runs every controller and compares them against the first.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<ComparisonReport, ExperimentError> {
    if cfg.controllers.len() < 2 {
        return Err(ExperimentError::Invalid {
            field: "controllers".into(),
            message: "compare needs at least two controllers".into(),
        });
    }
    let records = run_all(&cfg.setups()?)?;
    let report = compare_records(&records)?;
    if let Some(dir) = out_dir(cfg)? {
        write_records(&records, dir)?;
        write_json(&report, &dir.join("comparison.json"))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    /// Axis value as written: a number, or the Hamiltonian file name.
    pub value: String,
    pub controller: String,
    pub reference_count: usize,
    pub th_p: f64,
    pub prime_count: usize,
    pub minor_count: usize,
    /// S1 circuits of a job whose window is full.
    pub s1_per_job: usize,
    pub s1_circuits: usize,
    pub s2_circuits: usize,
    pub accepted: usize,
    pub skips: usize,
    pub final_ideal_energy: f64,
    pub ground_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

/// One run per axis value with the first configured controller; seeds and
/// trace are shared across the axis.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<SweepReport, ExperimentError> {
    let sweep = cfg.sweep.clone().ok_or_else(|| ExperimentError::Invalid {
        field: "sweep".into(),
        message: "missing [sweep] section".into(),
    })?;
    let template = cfg.setups()?.remove(0);
    if sweep.axis != SweepAxis::Hamiltonian && template.controller.kind != ControllerKind::MultiReference {
        return Err(ExperimentError::Invalid {
            field: "controllers[0].kind".into(),
            message: "th_p and k sweeps need a multi_reference controller first".into(),
        });
    }

    let mut cases: Vec<(String, RunSetup)> = Vec::new();
    match sweep.axis {
        SweepAxis::ThP | SweepAxis::K => {
            for &v in &sweep.values {
                let mut s = template.clone();
                if sweep.axis == SweepAxis::ThP {
                    s.controller.th_p = v;
                } else {
                    s.controller.reference_count = v as usize;
                    s.controller.weights = None;
                }
                cases.push((v.to_string(), s));
            }
        }
        SweepAxis::Hamiltonian => {
            for path in &sweep.hamiltonians {
                let h = ExperimentConfig::load_hamiltonian(path)?;
                let mut s = template.clone();
                s.ansatz = AnsatzSpec::new(template.ansatz.kind, h.qubit_count(), template.ansatz.reps);
                if s.initial_theta.as_ref().is_some_and(|t| t.len() != s.ansatz.parameter_count()) {
                    s.initial_theta = None;
                }
                s.hamiltonian = h;
                let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
                cases.push((name, s));
            }
        }
    }

    let rows = cases
        .par_iter()
        .map(|(value, s)| {
            let r = run_experiment(s).map_err(|source| ExperimentError::Run {
                run: format!("{:?}={value}", sweep.axis),
                source,
            })?;
            let ground = match r.summary.ground_energy {
                Some(g) => Some(g),
                None => ground_state_energy(&s.hamiltonian).ok(),
            };
            let m = &r.summary;
            Ok(SweepRow {
                axis: sweep.axis,
                value: value.clone(),
                controller: m.controller.clone(),
                reference_count: m.reference_count,
                th_p: m.th_p,
                prime_count: m.prime_count,
                minor_count: m.minor_count,
                s1_per_job: (1 + m.reference_count) * m.prime_count * 2,
                s1_circuits: m.s1_circuits,
                s2_circuits: m.s2_circuits,
                accepted: m.accepted,
                skips: m.skips,
                final_ideal_energy: m.final_ideal_energy,
                ground_energy: ground,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let report = SweepReport { axis: sweep.axis, rows };

    if let Some(dir) = out_dir(cfg)? {
        write_json(&report, &dir.join("sweep.json"))?;
        let path = dir.join("sweep.csv");
        let mut w = csv::Writer::from_path(&path)?;
        for row in &report.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    Ok(report)
}

/// Reads a noise config (TOML, or JSON by extension) and writes the trace.
pub fn cmd_gen_noise(config: &Path, out: &Path) -> Result<DriftTrace, ExperimentError> {
    let text = fs::read_to_string(config).map_err(io_err(config))?;
    let parse_err = |message: String| ExperimentError::Parse {
        path: config.to_path_buf(),
        message,
    };
    let cfg: NoiseConfig = if config.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?
    } else {
        toml::from_str(&text).map_err(|e| parse_err(e.to_string()))?
    };
    let trace = generate_trace(&cfg).map_err(|e| parse_err(e.to_string()))?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    save_trace(&trace, out).map_err(|e| ExperimentError::Parse {
        path: out.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(trace)
}

/// Expands directories to their `run_*.json` files, sorted by name.
pub fn collect_record_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(io_err(p))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("run_") && n.ends_with(".json"))
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn load_record(path: &Path) -> Result<RunRecord, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| ExperimentError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Recomputes a comparison from saved run records.
pub fn cmd_report(inputs: &[PathBuf], out: Option<&Path>) -> Result<ComparisonReport, ExperimentError> {
    let records = collect_record_paths(inputs)?
        .iter()
        .map(|p| load_record(p))
        .collect::<Result<Vec<_>, _>>()?;
    let report = compare_records(&records)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_json(&report, &dir.join("report.json"))?;
    }
    Ok(report)
}
