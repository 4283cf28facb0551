//! Staged job execution with reference-based drift detection.
//!
//! Every job runs stage S1 (the prime subset at the current perturbation pair,
//! plus reruns of the reference iterations' prime subsets), decides whether the
//! job was hit by drift, and only on acceptance runs stage S2 (the minor subset)
//! and tells the optimizer.

mod detect;
mod run;

pub use detect::{
    detect_drift, single_reference_detect, Decision, DetectionResult, ReferenceRecord, ReferenceWindow,
    Tolerance,
};
pub use run::{run_experiment, Controller, JobEntry, RunRecord, RunSetup, RunSummary, Stage1, Stage2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, Shots};
use crate::noise::NoiseError;
use crate::pauli::PauliError;
use crate::spsa::OptimizerError;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid run configuration: {0}")]
    Config(String),

    #[error("controller protocol violation: {0}")]
    Protocol(String),

    #[error(transparent)]
    Engine(#[from] EngineError),

    #[error(transparent)]
    Noise(#[from] NoiseError),

    #[error(transparent)]
    Pauli(#[from] PauliError),

    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// Every job is accepted; the full Hamiltonian is measured each time.
    Baseline,
    /// One reference, full Hamiltonian, no subsetting.
    SingleReference,
    /// `K` weighted references on the prime subset, minor subset deferred to S2.
    MultiReference,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Baseline => "baseline",
            ControllerKind::SingleReference => "single_reference",
            ControllerKind::MultiReference => "multi_reference",
        }
    }
}

fn default_k() -> usize {
    3
}
fn default_th_p() -> f64 {
    0.8
}
fn default_sigma() -> usize {
    5
}
fn default_shots() -> Shots {
    Shots::Count(8192)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub kind: ControllerKind,
    /// Number of references `K`. Forced to 1 for `single_reference`.
    #[serde(default = "default_k", alias = "k")]
    pub reference_count: usize,
    /// Prime threshold. Forced to 1.0 for `baseline` and `single_reference`.
    #[serde(default = "default_th_p")]
    pub th_p: f64,
    /// Consecutive reschedules before the references are refreshed.
    #[serde(default = "default_sigma")]
    pub sigma: usize,
    #[serde(default = "default_shots")]
    pub shots: Shots,
    /// Reference weights, most recent first; equal weights when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerance: Tolerance,
    /// Display name in reports; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ControllerConfig {
    pub fn new(kind: ControllerKind) -> Self {
        Self {
            kind,
            reference_count: default_k(),
            th_p: default_th_p(),
            sigma: default_sigma(),
            shots: default_shots(),
            weights: None,
            tolerance: Tolerance::None,
            label: None,
        }
    }

    pub fn baseline() -> Self {
        Self::new(ControllerKind::Baseline)
    }

    pub fn single_reference() -> Self {
        Self::new(ControllerKind::SingleReference)
    }

    pub fn multi_reference(k: usize, th_p: f64) -> Self {
        Self {
            reference_count: k,
            th_p,
            ..Self::new(ControllerKind::MultiReference)
        }
    }

    pub fn with_shots(mut self, shots: Shots) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_sigma(mut self, sigma: usize) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.as_str().to_string())
    }

    /// `K` actually used by the controller (0 for the baseline).
    pub fn effective_reference_count(&self) -> usize {
        match self.kind {
            ControllerKind::Baseline => 0,
            ControllerKind::SingleReference => 1,
            ControllerKind::MultiReference => self.reference_count,
        }
    }

    pub fn effective_th_p(&self) -> f64 {
        match self.kind {
            ControllerKind::MultiReference => self.th_p,
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        let bad = |m: String| Err(RuntimeError::Config(m));
        if self.reference_count == 0 {
            return bad("reference_count must be >= 1".into());
        }
        if self.sigma == 0 {
            return bad("sigma must be >= 1".into());
        }
        if !(self.th_p > 0.0 && self.th_p <= 1.0) {
            return bad(format!("th_p must lie in (0, 1], got {}", self.th_p));
        }
        if self.shots == Shots::Count(0) {
            return bad("shots must be positive".into());
        }
        if let Some(w) = &self.weights {
            let k = self.effective_reference_count();
            if self.kind == ControllerKind::MultiReference && w.len() != k {
                return bad(format!("expected {k} weights, got {}", w.len()));
            }
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return bad("weights must be positive".into());
            }
        }
        match self.tolerance {
            Tolerance::Gate(f) | Tolerance::Relax(f) if !(f.is_finite() && f >= 0.0) => {
                bad(format!("tolerance fraction must be >= 0, got {f}"))
            }
            _ => Ok(()),
        }
    }
}
