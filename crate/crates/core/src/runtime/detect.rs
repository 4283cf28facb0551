use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::RuntimeError;
use crate::engine::ParameterVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Reschedule,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Accept => "accept",
            Decision::Reschedule => "reschedule",
        }
    }
}

/// Optional magnitude check layered on the sign test.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", content = "fraction", rename_all = "snake_case")]
pub enum Tolerance {
    /// Accept iff `G · Gf > 0`.
    #[default]
    None,
    /// Sign agreement and `|Gf − G| ≤ fraction · |G|`.
    Gate(f64),
    /// Sign agreement, or a drift estimate within `fraction` of the
    /// weighted reference energy's magnitude.
    Relax(f64),
}

impl Tolerance {
    /// `reference` is the weighted recorded energy the gains are measured from.
    pub fn decide(self, g: f64, gf: f64, reference: f64) -> Decision {
        let agree = g * gf > 0.0;
        // Gf − G is minus the drift estimate.
        let drift = (gf - g).abs();
        let ok = match self {
            Tolerance::None => agree,
            Tolerance::Gate(f) => agree && drift <= f * g.abs(),
            Tolerance::Relax(f) => agree || drift <= f * reference.abs(),
        };
        if ok {
            Decision::Accept
        } else {
            Decision::Reschedule
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub d: f64,
    pub ef: f64,
    pub gf: f64,
    pub g: f64,
    pub decision: Decision,
}

/// Weighted multi-reference drift estimate and the sign test.
///
/// `recorded[n]` is the prime energy stored when reference `n` was accepted,
/// `reruns[n]` the same circuits executed in the current job.
pub fn detect_drift(
    weights: &[f64],
    recorded: &[f64],
    e_current: f64,
    reruns: &[f64],
    tolerance: Tolerance,
) -> Result<DetectionResult, RuntimeError> {
    if weights.len() != recorded.len() || reruns.len() != recorded.len() {
        return Err(RuntimeError::Protocol(format!(
            "detection needs matching lengths, got {} weights, {} recorded, {} reruns",
            weights.len(),
            recorded.len(),
            reruns.len()
        )));
    }
    if recorded.is_empty() {
        return Err(RuntimeError::Protocol("detection on an empty window".into()));
    }
    let mut d = 0.0;
    let mut reference = 0.0;
    for ((c, e), er) in weights.iter().zip(recorded).zip(reruns) {
        d += c * (er - e);
        reference += c * e;
    }
    let ef = e_current - d;
    let gf = ef - reference;
    let g = e_current - reference;
    Ok(DetectionResult {
        d,
        ef,
        gf,
        g,
        decision: tolerance.decide(g, gf, reference),
    })
}

/// Single-reference detection on full-Hamiltonian energies.
pub fn single_reference_detect(
    recorded_prev: f64,
    e_current: f64,
    rerun_prev: f64,
    tolerance: Tolerance,
) -> DetectionResult {
    let n = rerun_prev - recorded_prev;
    let ef = e_current - n;
    let gf = ef - recorded_prev;
    let g = e_current - recorded_prev;
    DetectionResult {
        d: n,
        ef,
        gf,
        g,
        decision: tolerance.decide(g, gf, recorded_prev),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub iteration: usize,
    pub theta_plus: ParameterVector,
    pub theta_minus: ParameterVector,
    pub recorded_prime_energy: f64,
    /// Job in which `recorded_prime_energy` was measured.
    pub recorded_job: usize,
}

/// Most-recent-first ring of accepted iterations used as drift references.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceWindow {
    records: VecDeque<ReferenceRecord>,
    capacity: usize,
    weights: Option<Vec<f64>>,
}

impl ReferenceWindow {
    /// Equal weights over however many records are present.
    pub fn new(capacity: usize) -> Result<Self, RuntimeError> {
        Self::build(capacity, None)
    }

    /// Fixed weights, most recent first. While the window is still filling,
    /// the leading weights are renormalized.
    pub fn with_weights(weights: Vec<f64>) -> Result<Self, RuntimeError> {
        Self::build(weights.len(), Some(weights))
    }

    fn build(capacity: usize, weights: Option<Vec<f64>>) -> Result<Self, RuntimeError> {
        if capacity == 0 {
            return Err(RuntimeError::Config("reference count must be >= 1".into()));
        }
        if let Some(w) = &weights {
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(RuntimeError::Config("reference weights must be positive".into()));
            }
        }
        Ok(Self {
            records: VecDeque::with_capacity(capacity),
            capacity,
            weights,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl ExactSizeIterator<Item = &ReferenceRecord> {
        self.records.iter()
    }

    /// Normalized weights for the records currently held.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.records.len();
        match &self.weights {
            None => vec![1.0 / n as f64; n],
            Some(w) => {
                let head = &w[..n];
                let sum: f64 = head.iter().sum();
                head.iter().map(|x| x / sum).collect()
            }
        }
    }

    pub fn recorded(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.recorded_prime_energy).collect()
    }

    /// Adds the newest record, evicting the oldest beyond capacity.
    pub fn push(&mut self, record: ReferenceRecord) {
        self.records.push_front(record);
        self.records.truncate(self.capacity);
    }

    /// Replaces every recorded energy with its rerun from `job`.
    pub fn refresh(&mut self, reruns: &[f64], job: usize) -> Result<(), RuntimeError> {
        if reruns.len() != self.records.len() {
            return Err(RuntimeError::Protocol(format!(
                "refresh with {} energies for {} references",
                reruns.len(),
                self.records.len()
            )));
        }
        for (r, &e) in self.records.iter_mut().zip(reruns) {
            r.recorded_prime_energy = e;
            r.recorded_job = job;
        }
        Ok(())
    }

    pub fn detect(&self, e_current: f64, reruns: &[f64], tolerance: Tolerance) -> Result<DetectionResult, RuntimeError> {
        detect_drift(&self.weights(), &self.recorded(), e_current, reruns, tolerance)
    }
}
