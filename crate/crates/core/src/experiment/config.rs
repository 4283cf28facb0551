use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::engine::{AnsatzSpec, ParameterVector, Shots};
use crate::noise::{generate_trace, load_trace, DriftTrace, NoiseConfig};
use crate::pauli::{parse_hamiltonian, Hamiltonian};
use crate::runtime::{ControllerConfig, RunSetup};
use crate::spsa::SpsaConfig;

/// SPSA gains; the seed always comes from the experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub a0: f64,
    pub alpha: f64,
    pub c0: f64,
    pub gamma: f64,
    pub max_iterations: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = SpsaConfig::default();
        Self {
            a0: d.a0,
            alpha: d.alpha,
            c0: d.c0,
            gamma: d.gamma,
            max_iterations: d.max_iterations,
        }
    }
}

impl OptimizerSection {
    pub fn to_spsa(self, seed: u64) -> SpsaConfig {
        SpsaConfig {
            a0: self.a0,
            alpha: self.alpha,
            c0: self.c0,
            gamma: self.gamma,
            max_iterations: self.max_iterations,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    ThP,
    K,
    Hamiltonian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    /// Values for the `th_p` and `k` axes.
    #[serde(default)]
    pub values: Vec<f64>,
    /// Hamiltonian files for the `hamiltonian` axis.
    #[serde(default)]
    pub hamiltonians: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Accepted iterations per run.
    pub budget: usize,
    pub hamiltonian: PathBuf,
    pub ansatz: AnsatzSpec,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    /// Inline drift model; mutually exclusive with `trace`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    /// Saved drift trace to replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    pub controllers: Vec<ControllerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Command-line overrides applied after loading.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub exact: bool,
    pub shots: Option<u32>,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    /// Reads a TOML (or `.json`) config; relative paths inside it are taken
    /// relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parsed: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| ExperimentError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?
        } else {
            toml::from_str(&text).map_err(|e| ExperimentError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(parsed.rebased(base))
    }

    /// Parses TOML text, resolving relative paths against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ExperimentError> {
        let parsed: Self = toml::from_str(text).map_err(|e| ExperimentError::Parse {
            path: base.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(parsed.rebased(base))
    }

    fn rebased(mut self, base: &Path) -> Self {
        self.hamiltonian = resolve(base, &self.hamiltonian);
        self.trace = self.trace.map(|t| resolve(base, &t));
        self.out_dir = self.out_dir.map(|o| resolve(base, &o));
        if let Some(s) = &mut self.sweep {
            s.hamiltonians = s.hamiltonians.iter().map(|h| resolve(base, h)).collect();
        }
        self
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(out) = &o.out_dir {
            self.out_dir = Some(out.clone());
        }
        let shots = if o.exact {
            Some(Shots::Exact)
        } else {
            o.shots.map(Shots::Count)
        };
        if let Some(shots) = shots {
            for c in &mut self.controllers {
                c.shots = shots;
            }
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.budget == 0 {
            return Err(invalid("budget", "must be >= 1"));
        }
        if self.controllers.is_empty() {
            return Err(invalid("controllers", "at least one controller is required"));
        }
        for (i, c) in self.controllers.iter().enumerate() {
            c.validate()
                .map_err(|e| invalid(format!("controllers[{i}]"), e.to_string()))?;
        }
        if self.noise.is_some() && self.trace.is_some() {
            return Err(invalid("trace", "give either [noise] or trace, not both"));
        }
        if let Some(n) = &self.noise {
            n.validate().map_err(|e| invalid("noise", e.to_string()))?;
        }
        self.optimizer
            .to_spsa(self.seed)
            .validate()
            .map_err(|e| invalid("optimizer", e.to_string()))?;
        if let Some(t) = &self.initial_theta {
            if t.len() != self.ansatz.parameter_count() {
                return Err(invalid(
                    "initial_theta",
                    format!("has {} entries, ansatz needs {}", t.len(), self.ansatz.parameter_count()),
                ));
            }
        }
        if let Some(s) = &self.sweep {
            match s.axis {
                SweepAxis::ThP | SweepAxis::K if s.values.is_empty() => {
                    return Err(invalid("sweep.values", "empty"));
                }
                SweepAxis::Hamiltonian if s.hamiltonians.is_empty() => {
                    return Err(invalid("sweep.hamiltonians", "empty"));
                }
                SweepAxis::ThP => {
                    if let Some(v) = s.values.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
                        return Err(invalid("sweep.values", format!("th_p {v} outside (0, 1]")));
                    }
                }
                SweepAxis::K => {
                    if let Some(v) = s.values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0)) {
                        return Err(invalid("sweep.values", format!("K {v} is not a positive integer")));
                    }
                }
                SweepAxis::Hamiltonian => {}
            }
        }
        Ok(())
    }

    pub fn load_hamiltonian(path: &Path) -> Result<Hamiltonian, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        parse_hamiltonian(&text).map_err(|e| ExperimentError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// The drift trace every run shares. Without a noise source the trace is
    /// drift-free and long enough for heavy rescheduling.
    pub fn drift_trace(&self) -> Result<DriftTrace, ExperimentError> {
        if let Some(path) = &self.trace {
            return load_trace(path).map_err(|e| ExperimentError::Parse {
                path: path.clone(),
                message: e.to_string(),
            });
        }
        let cfg = self
            .noise
            .clone()
            .unwrap_or_else(|| NoiseConfig::quiet(10 * self.budget + 10));
        generate_trace(&cfg).map_err(|e| invalid("noise", e.to_string()))
    }

    /// One setup per controller, all sharing Hamiltonian, trace and seeds.
    pub fn setups(&self) -> Result<Vec<RunSetup>, ExperimentError> {
        self.validate()?;
        let hamiltonian = Self::load_hamiltonian(&self.hamiltonian)?;
        let trace = self.drift_trace()?;
        Ok(self
            .controllers
            .iter()
            .map(|c| RunSetup {
                hamiltonian: hamiltonian.clone(),
                ansatz: self.ansatz,
                trace: trace.clone(),
                controller: c.clone(),
                spsa: self.optimizer.to_spsa(self.seed),
                budget: self.budget,
                seed: self.seed,
                initial_theta: self.initial_theta.clone().map(ParameterVector::from),
            })
            .collect())
    }
}
