//! Seeded per-job drift traces.
//!
//! A trace is a list of additive offsets, one per job, expressed as a fraction
//! of a configured energy scale. Offsets are the sum of a mild Gaussian
//! baseline jitter and any number of episodes (steps, spikes, ramps and
//! random walks). The same offset shifts every circuit executed in a job
//! unless per-circuit heterogeneity is switched on.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("invalid noise config: {0}")]
    Config(String),

    #[error("job {job} is beyond the trace horizon of {horizon}")]
    JobOutOfRange { job: usize, horizon: usize },

    #[error("malformed trace file: {0}")]
    Format(String),

    #[error("trace I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeShape {
    /// Constant offset for the whole duration.
    Step,
    /// Full magnitude at onset, decaying linearly over the duration.
    Spike,
    /// Rising linearly to full magnitude at the last job.
    Ramp,
    /// Gaussian random walk whose endpoint spread is about `magnitude`.
    RandomWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftEpisode {
    pub start_job: usize,
    pub duration_jobs: usize,
    pub magnitude: f64,
    pub shape: EpisodeShape,
}

impl DriftEpisode {
    pub fn new(shape: EpisodeShape, start_job: usize, duration_jobs: usize, magnitude: f64) -> Self {
        Self {
            start_job,
            duration_jobs,
            magnitude,
            shape,
        }
    }

    fn validate(&self) -> Result<(), NoiseError> {
        if self.duration_jobs == 0 {
            return Err(NoiseError::Config("episode duration must be >= 1".into()));
        }
        if !self.magnitude.is_finite() {
            return Err(NoiseError::Config("episode magnitude must be finite".into()));
        }
        Ok(())
    }

    /// Offsets contributed at jobs `start_job..start_job + duration_jobs`.
    fn contributions(&self, trace_seed: u64) -> Vec<f64> {
        let d = self.duration_jobs;
        let m = self.magnitude;
        match self.shape {
            EpisodeShape::Step => vec![m; d],
            EpisodeShape::Spike => (0..d).map(|t| m * (1.0 - t as f64 / d as f64)).collect(),
            EpisodeShape::Ramp => (0..d).map(|t| m * (t + 1) as f64 / d as f64).collect(),
            EpisodeShape::RandomWalk => {
                // Keyed by the episode itself so a walk replays identically
                // whatever other episodes share the trace.
                let seed = derive_seed(
                    trace_seed,
                    &[3, self.start_job as u64, d as u64, m.to_bits()],
                );
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let step = m / (d as f64).sqrt();
                let mut level = 0.0;
                (0..d)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        level += step * z;
                        level
                    })
                    .collect()
            }
        }
    }
}

/// Random episode generator for one shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeProcess {
    /// Per-job probability that an episode starts.
    pub rate: f64,
    /// Inclusive |magnitude| range; the sign is drawn uniformly.
    pub magnitude: [f64; 2],
    /// Inclusive duration range in jobs.
    pub duration: [usize; 2],
}

impl EpisodeProcess {
    fn validate(&self, name: &str) -> Result<(), NoiseError> {
        let bad = |m: &str| Err(NoiseError::Config(format!("{name}: {m}")));
        if !(0.0..=1.0).contains(&self.rate) {
            return bad("rate must lie in [0, 1]");
        }
        let [lo, hi] = self.magnitude;
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
            return bad("magnitude range must be finite, non-negative and ordered");
        }
        let [dlo, dhi] = self.duration;
        if dlo == 0 || dlo > dhi {
            return bad("duration range must be ordered with minimum >= 1");
        }
        Ok(())
    }
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub horizon_jobs: usize,
    pub seed: u64,
    #[serde(default)]
    pub baseline_std: f64,
    /// Offsets are multiplied by this to become energies.
    #[serde(default = "default_scale")]
    pub energy_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<EpisodeProcess>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spike: Option<EpisodeProcess>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<EpisodeProcess>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_walk: Option<EpisodeProcess>,
    /// Fixed episodes added on top of the generated ones.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub episodes: Vec<DriftEpisode>,
    /// Independent per-circuit jitter, as a fraction of the energy scale.
    #[serde(default)]
    pub circuit_jitter_std: f64,
    /// Relative spread of each circuit's sensitivity to the job offset.
    #[serde(default)]
    pub circuit_sensitivity_std: f64,
}

impl NoiseConfig {
    /// Drift-free configuration.
    pub fn quiet(horizon_jobs: usize) -> Self {
        Self {
            horizon_jobs,
            seed: 0,
            baseline_std: 0.0,
            energy_scale: 1.0,
            step: None,
            spike: None,
            ramp: None,
            random_walk: None,
            episodes: Vec::new(),
            circuit_jitter_std: 0.0,
            circuit_sensitivity_std: 0.0,
        }
    }

    /// Only the given episodes, no jitter.
    pub fn scripted(horizon_jobs: usize, episodes: Vec<DriftEpisode>) -> Self {
        Self {
            episodes,
            ..Self::quiet(horizon_jobs)
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if self.horizon_jobs == 0 {
            return Err(NoiseError::Config("horizon_jobs must be >= 1".into()));
        }
        for (name, v) in [
            ("baseline_std", self.baseline_std),
            ("circuit_jitter_std", self.circuit_jitter_std),
            ("circuit_sensitivity_std", self.circuit_sensitivity_std),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(NoiseError::Config(format!("{name} must be finite and >= 0")));
            }
        }
        if !(self.energy_scale.is_finite() && self.energy_scale > 0.0) {
            return Err(NoiseError::Config("energy_scale must be positive".into()));
        }
        for (name, p) in self.processes() {
            if let Some(p) = p {
                p.validate(name)?;
            }
        }
        self.episodes.iter().try_for_each(DriftEpisode::validate)
    }

    fn processes(&self) -> [(&'static str, Option<&EpisodeProcess>); 4] {
        [
            ("step", self.step.as_ref()),
            ("spike", self.spike.as_ref()),
            ("ramp", self.ramp.as_ref()),
            ("random_walk", self.random_walk.as_ref()),
        ]
    }

    pub fn has_circuit_heterogeneity(&self) -> bool {
        self.circuit_jitter_std > 0.0 || self.circuit_sensitivity_std > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftTrace {
    pub seed: u64,
    pub config: NoiseConfig,
    /// Generated and scripted episodes, in the order they were summed.
    pub episodes: Vec<DriftEpisode>,
    pub baseline_std: f64,
    pub offsets: Vec<f64>,
}

const SHAPES: [EpisodeShape; 4] = [
    EpisodeShape::Step,
    EpisodeShape::Spike,
    EpisodeShape::Ramp,
    EpisodeShape::RandomWalk,
];

/// Builds the trace described by `cfg`; a pure function of the config.
pub fn generate_trace(cfg: &NoiseConfig) -> Result<DriftTrace, NoiseError> {
    cfg.validate()?;
    let horizon = cfg.horizon_jobs;
    let mut offsets = vec![0.0; horizon];
    if cfg.baseline_std > 0.0 {
        let normal = Normal::new(0.0, cfg.baseline_std).map_err(|e| NoiseError::Config(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[1]));
        for o in offsets.iter_mut() {
            *o = normal.sample(&mut rng);
        }
    }

    let mut episodes = Vec::new();
    for (k, (shape, (_, process))) in SHAPES.iter().zip(cfg.processes()).enumerate() {
        let Some(p) = process else { continue };
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[2, k as u64]));
        for job in 0..horizon {
            if rng.random::<f64>() < p.rate {
                let duration = rng.random_range(p.duration[0]..=p.duration[1]);
                let size = rng.random_range(p.magnitude[0]..=p.magnitude[1]);
                let magnitude = if rng.random_bool(0.5) { size } else { -size };
                episodes.push(DriftEpisode::new(*shape, job, duration, magnitude));
            }
        }
    }
    episodes.extend_from_slice(&cfg.episodes);

    for ep in &episodes {
        for (t, v) in ep.contributions(cfg.seed).into_iter().enumerate() {
            if let Some(o) = offsets.get_mut(ep.start_job + t) {
                *o += v;
            }
        }
    }

    Ok(DriftTrace {
        seed: cfg.seed,
        config: cfg.clone(),
        episodes,
        baseline_std: cfg.baseline_std,
        offsets,
    })
}

impl DriftTrace {
    pub fn horizon(&self) -> usize {
        self.offsets.len()
    }

    pub fn offset(&self, job: usize) -> Result<f64, NoiseError> {
        self.offsets
            .get(job)
            .copied()
            .ok_or(NoiseError::JobOutOfRange {
                job,
                horizon: self.offsets.len(),
            })
    }

    /// True when some episode covers `job`.
    pub fn episode_active(&self, job: usize) -> bool {
        self.episodes
            .iter()
            .any(|e| job >= e.start_job && job < e.start_job + e.duration_jobs)
    }

    /// Drifted value of one observable circuit's energy contribution.
    ///
    /// `share` is the circuit's fraction of the Hamiltonian's |coefficient|
    /// mass, so a whole-Hamiltonian estimate moves by exactly
    /// `offset × energy_scale`. With heterogeneity enabled, `seed` drives the
    /// circuit's own sensitivity and jitter draws.
    pub fn drift_circuit(&self, ideal: f64, job: usize, share: f64, seed: u64) -> Result<f64, NoiseError> {
        let cfg = &self.config;
        let scale = cfg.energy_scale * share;
        if !cfg.has_circuit_heterogeneity() {
            return apply_drift(ideal, self, job, scale);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sensitivity: f64 = StandardNormal.sample(&mut rng);
        let jitter: f64 = StandardNormal.sample(&mut rng);
        let shifted = apply_drift(ideal, self, job, scale * (1.0 + cfg.circuit_sensitivity_std * sensitivity))?;
        Ok(shifted + cfg.circuit_jitter_std * jitter * scale)
    }
}

/// `ideal + offsets[job] × energy_scale`.
pub fn apply_drift(ideal: f64, trace: &DriftTrace, job: usize, energy_scale: f64) -> Result<f64, NoiseError> {
    Ok(ideal + trace.offset(job)? * energy_scale)
}

pub fn save_trace(trace: &DriftTrace, path: impl AsRef<Path>) -> Result<(), NoiseError> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(trace).map_err(|e| NoiseError::Format(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|source| NoiseError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<DriftTrace, NoiseError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| NoiseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_trace(&text)
}

pub fn parse_trace(text: &str) -> Result<DriftTrace, NoiseError> {
    let trace: DriftTrace = serde_json::from_str(text).map_err(|e| NoiseError::Format(e.to_string()))?;
    trace
        .config
        .validate()
        .map_err(|e| NoiseError::Format(e.to_string()))?;
    if trace.offsets.len() != trace.config.horizon_jobs {
        return Err(NoiseError::Format(format!(
            "{} offsets for a horizon of {}",
            trace.offsets.len(),
            trace.config.horizon_jobs
        )));
    }
    if let Some(bad) = trace.offsets.iter().position(|o| !o.is_finite()) {
        return Err(NoiseError::Format(format!("offset {bad} is not finite")));
    }
    Ok(trace)
}
