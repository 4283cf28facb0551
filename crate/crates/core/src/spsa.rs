//! SPSA with an ask/tell interface.
//!
//! The caller asks for a perturbation pair `θ ± c_k·Δ`, evaluates both points
//! however it likes, and tells the two energies back. Asking again before
//! telling re-issues the same pair, which is how a rescheduled job repeats
//! identical circuits.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::ParameterVector;
use crate::seed::derive_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("tell called without an outstanding ask")]
    TellWithoutAsk,

    #[error("invalid SPSA config: {0}")]
    Config(String),

    #[error("told energies must be finite, got ({0}, {1})")]
    NonFinite(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaConfig {
    pub a0: f64,
    pub alpha: f64,
    pub c0: f64,
    pub gamma: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            a0: 0.2,
            alpha: 0.602,
            c0: 0.1,
            gamma: 0.101,
            max_iterations: 10_000,
            seed: 0,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let err = |m: &str| Err(OptimizerError::Config(m.into()));
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return err("a0 must be positive");
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return err("c0 must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return err("alpha must lie in (0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return err("gamma must lie in (0, 1]");
        }
        if self.max_iterations == 0 {
            return err("max_iterations must be >= 1");
        }
        Ok(())
    }

    /// Learning rate `a0 / (k+1)^alpha`.
    pub fn gain(&self, k: usize) -> f64 {
        self.a0 / ((k + 1) as f64).powf(self.alpha)
    }

    /// Perturbation size `c0 / (k+1)^gamma`.
    pub fn perturbation(&self, k: usize) -> f64 {
        self.c0 / ((k + 1) as f64).powf(self.gamma)
    }
}

/// Uniform starting angles in `[-π, π)`.
pub fn random_initial_point(parameter_count: usize, seed: u64) -> ParameterVector {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x1417]));
    (0..parameter_count)
        .map(|_| rng.random_range(-PI..PI))
        .collect::<Vec<_>>()
        .into()
}

#[derive(Debug, Clone)]
pub struct Spsa {
    config: SpsaConfig,
    theta: ParameterVector,
    k: usize,
    pending: Option<Vec<f64>>,
    rng: ChaCha8Rng,
    history: Vec<f64>,
}

impl Spsa {
    pub fn new(config: SpsaConfig, theta0: ParameterVector) -> Result<Self, OptimizerError> {
        config.validate()?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            theta: theta0,
            k: 0,
            pending: None,
            history: Vec::new(),
        })
    }

    pub fn config(&self) -> &SpsaConfig {
        &self.config
    }

    pub fn theta(&self) -> &ParameterVector {
        &self.theta
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn has_pending(&self) -> bool {
        self.pending.is_some()
    }

    /// Mean of each told pair, in tell order.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn is_done(&self) -> bool {
        self.k >= self.config.max_iterations
    }

    /// The perturbation pair for the current iteration. Draws a fresh
    /// Rademacher direction unless one is already outstanding.
    pub fn ask(&mut self) -> (ParameterVector, ParameterVector) {
        if self.pending.is_none() {
            let delta = (0..self.theta.len())
                .map(|_| if self.rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            self.pending = Some(delta);
        }
        let delta = self.pending.as_ref().expect("set above");
        let ck = self.config.perturbation(self.k);
        let shifted = |sign: f64| -> ParameterVector {
            self.theta
                .as_slice()
                .iter()
                .zip(delta)
                .map(|(t, d)| t + sign * ck * d)
                .collect::<Vec<_>>()
                .into()
        };
        (shifted(1.0), shifted(-1.0))
    }

    /// Applies `θ ← θ − a_k · (e₊ − e₋) / (2 c_k Δ)` and advances `k`.
    pub fn tell(&mut self, e_plus: f64, e_minus: f64) -> Result<(), OptimizerError> {
        if !(e_plus.is_finite() && e_minus.is_finite()) {
            return Err(OptimizerError::NonFinite(e_plus, e_minus));
        }
        let delta = self.pending.take().ok_or(OptimizerError::TellWithoutAsk)?;
        let ak = self.config.gain(self.k);
        let ck = self.config.perturbation(self.k);
        let diff = e_plus - e_minus;
        for (t, d) in self.theta.0.iter_mut().zip(&delta) {
            *t -= ak * diff / (2.0 * ck * d);
        }
        self.k += 1;
        self.history.push(0.5 * (e_plus + e_minus));
        Ok(())
    }
}
