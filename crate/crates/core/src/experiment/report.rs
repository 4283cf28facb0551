use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::runtime::{ControllerKind, Decision, RunRecord};

/// Fixed header of the per-job CSV.
pub const CSV_HEADER: [&str; 12] = [
    "job",
    "iteration",
    "controller",
    "energy",
    "D",
    "Ef",
    "Gf",
    "G",
    "decision",
    "s1_circuits",
    "s2_circuits",
    "offset",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per job. Rescheduled jobs leave `energy` empty; jobs without a
/// detection step leave `D`, `Ef`, `Gf`, `G` empty.
pub fn write_jobs_csv<W: Write>(record: &RunRecord, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for j in &record.jobs {
        let d = j.detection;
        w.write_record([
            j.job.to_string(),
            j.iteration.to_string(),
            j.controller.clone(),
            opt(j.energy),
            opt(d.map(|d| d.d)),
            opt(d.map(|d| d.ef)),
            opt(d.map(|d| d.gf)),
            opt(d.map(|d| d.g)),
            j.decision.as_str().to_string(),
            j.s1_circuits.to_string(),
            j.s2_circuits.to_string(),
            j.offset.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Normalized progress toward the ground energy: 1 means the run ended on
/// the ground state, 0 means it ended where it started.
pub fn progress_quality(first: f64, last: f64, ground: f64) -> Option<f64> {
    let span = first - ground;
    (span.abs() > 1e-12).then(|| (first - last) / span)
}

/// Circuit totals recomputed from the job entries alone.
pub fn accounting_matches(record: &RunRecord) -> bool {
    let s = &record.summary;
    let s1: usize = record
        .jobs
        .iter()
        .map(|j| {
            let refs = if s.kind == ControllerKind::Baseline { 0 } else { j.window_size };
            (1 + refs) * s.prime_count * 2
        })
        .sum();
    let accepted = record.jobs.iter().filter(|j| j.decision == Decision::Accept).count();
    let per_job_ok = record.jobs.iter().all(|j| match j.decision {
        Decision::Accept => j.s2_circuits == s.minor_count * 2,
        Decision::Reschedule => j.s2_circuits == 0,
    });
    per_job_ok
        && accepted == s.accepted
        && s1 == s.s1_circuits
        && s.s2_circuits == accepted * s.minor_count * 2
        && s.total_circuits == s.s1_circuits + s.s2_circuits
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub controller: String,
    pub kind: ControllerKind,
    pub reference_count: usize,
    pub th_p: f64,
    pub first_ideal_energy: f64,
    pub final_ideal_energy: f64,
    pub final_energy: Option<f64>,
    pub ground_energy: Option<f64>,
    /// |final ideal − ground|.
    pub error: Option<f64>,
    pub q: Option<f64>,
    /// Q of this run over Q of the first run.
    pub improvement: Option<f64>,
    pub accepted: usize,
    pub jobs: usize,
    pub skips: usize,
    pub refreshes: usize,
    pub s1_circuits: usize,
    pub s2_circuits: usize,
    pub total_circuits: usize,
    pub accounting_ok: bool,
    pub trace_exhausted: bool,
    /// Noise-free energy of each accepted iteration.
    pub energy_series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub fingerprint: String,
    pub reference: String,
    pub entries: Vec<ComparisonEntry>,
}

/// Builds the comparison from run records only. Runs must share a setup
/// fingerprint; the first record is the reference for improvement factors.
pub fn compare_records(records: &[RunRecord]) -> Result<ComparisonReport, ExperimentError> {
    let first = records
        .first()
        .ok_or_else(|| ExperimentError::Mismatch("no runs to compare".into()))?;
    let fingerprint = &first.summary.fingerprint;
    if let Some(odd) = records.iter().find(|r| &r.summary.fingerprint != fingerprint) {
        return Err(ExperimentError::Mismatch(format!(
            "run {:?} does not share the Hamiltonian, ansatz, seed and trace of run {:?}",
            odd.summary.controller, first.summary.controller
        )));
    }
    let q_of = |r: &RunRecord| {
        let s = &r.summary;
        s.ground_energy
            .and_then(|g| progress_quality(s.first_ideal_energy, s.final_ideal_energy, g))
    };
    let q_ref = q_of(first);
    let entries = records
        .iter()
        .map(|r| {
            let s = &r.summary;
            let q = q_of(r);
            let improvement = match (q, q_ref) {
                (Some(a), Some(b)) if b > 0.0 => Some(a / b),
                _ => None,
            };
            ComparisonEntry {
                controller: s.controller.clone(),
                kind: s.kind,
                reference_count: s.reference_count,
                th_p: s.th_p,
                first_ideal_energy: s.first_ideal_energy,
                final_ideal_energy: s.final_ideal_energy,
                final_energy: s.final_energy,
                ground_energy: s.ground_energy,
                error: s.ground_energy.map(|g| (s.final_ideal_energy - g).abs()),
                q,
                improvement,
                accepted: s.accepted,
                jobs: s.jobs,
                skips: s.skips,
                refreshes: s.refreshes,
                s1_circuits: s.s1_circuits,
                s2_circuits: s.s2_circuits,
                total_circuits: s.total_circuits,
                accounting_ok: accounting_matches(r),
                trace_exhausted: s.trace_exhausted,
                energy_series: r.jobs.iter().filter_map(|j| j.ideal_energy).collect(),
            }
        })
        .collect();
    Ok(ComparisonReport {
        fingerprint: fingerprint.clone(),
        reference: first.summary.controller.clone(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_endpoints() {
        assert_eq!(progress_quality(-1.0, -2.0, -2.0), Some(1.0));
        assert_eq!(progress_quality(-1.0, -1.0, -2.0), Some(0.0));
        assert_eq!(progress_quality(-1.0, -1.5, -2.0), Some(0.5));
        assert_eq!(progress_quality(-2.0, -2.0, -2.0), None);
    }

    #[test]
    fn empty_comparison_refused() {
        assert!(compare_records(&[]).is_err());
    }
}
