use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::detect::{single_reference_detect, Decision, DetectionResult, ReferenceRecord, ReferenceWindow};
use super::{ControllerConfig, ControllerKind, RuntimeError};
use crate::engine::{
    build_ansatz, hamiltonian_energy, simulate, term_energies, AnsatzSpec, Circuit, ParameterVector, Shots,
};
use crate::noise::DriftTrace;
use crate::pauli::{partition_prime_minor, Hamiltonian};
use crate::seed::derive_seed;
use crate::spectrum::ground_state_energy;
use crate::spsa::{random_initial_point, Spsa, SpsaConfig};

/// Above this width the dense ground-energy oracle is skipped.
const GROUND_ORACLE_MAX_QUBITS: usize = 10;

const DRIFT_TAG: u64 = 0xD81F_7000;

/// Everything one run needs. Runs built from equal setups are bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup {
    pub hamiltonian: Hamiltonian,
    pub ansatz: AnsatzSpec,
    pub trace: DriftTrace,
    pub controller: ControllerConfig,
    pub spsa: SpsaConfig,
    /// Accepted iterations to run; rescheduled jobs do not count.
    pub budget: usize,
    /// Drives shot sampling, per-circuit drift draws and the default start point.
    pub seed: u64,
    pub initial_theta: Option<ParameterVector>,
}

impl RunSetup {
    pub fn validate(&self) -> Result<(), RuntimeError> {
        if self.ansatz.qubit_count != self.hamiltonian.qubit_count() {
            return Err(RuntimeError::Config(format!(
                "ansatz has {} qubits but the Hamiltonian acts on {}",
                self.ansatz.qubit_count,
                self.hamiltonian.qubit_count()
            )));
        }
        if let Some(theta) = &self.initial_theta {
            if theta.len() != self.ansatz.parameter_count() {
                return Err(RuntimeError::Config(format!(
                    "initial_theta has {} entries, ansatz needs {}",
                    theta.len(),
                    self.ansatz.parameter_count()
                )));
            }
        }
        if self.hamiltonian.observable_count() == 0 {
            return Err(RuntimeError::Config("Hamiltonian has no observables".into()));
        }
        self.controller.validate()?;
        self.spsa.validate()?;
        self.trace.config.validate()?;
        Ok(())
    }

    fn theta0(&self) -> ParameterVector {
        self.initial_theta
            .clone()
            .unwrap_or_else(|| random_initial_point(self.ansatz.parameter_count(), self.seed))
    }

    /// Hash of the pieces two runs must share to be comparable: Hamiltonian,
    /// ansatz, optimizer settings, seed, start point and drift trace.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.hamiltonian.to_text().as_bytes());
        h.update(serde_json::to_vec(&self.ansatz).expect("plain struct"));
        h.update(serde_json::to_vec(&self.spsa).expect("plain struct"));
        h.update(self.seed.to_le_bytes());
        for t in self.theta0().as_slice() {
            h.update(t.to_bits().to_le_bytes());
        }
        h.update(serde_json::to_vec(&self.trace.config).expect("plain struct"));
        for o in &self.trace.offsets {
            h.update(o.to_bits().to_le_bytes());
        }
        let mut out = String::with_capacity(64);
        for b in h.finalize().iter() {
            write!(out, "{b:02x}").expect("string write");
        }
        out
    }
}

/// Output of stage S1 for one job.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage1 {
    pub job: usize,
    pub theta_plus: ParameterVector,
    pub theta_minus: ParameterVector,
    pub prime_plus: f64,
    pub prime_minus: f64,
    /// Mean prime energy over the pair.
    pub e_prime: f64,
    /// Reference reruns in this job, window order.
    pub reruns: Vec<f64>,
    pub recorded: Vec<f64>,
    pub weights: Vec<f64>,
    pub reference_iterations: Vec<usize>,
    pub detection: Option<DetectionResult>,
    pub decision: Decision,
    pub circuits: usize,
}

/// Output of stage S2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage2 {
    pub minor_plus: f64,
    pub minor_minus: f64,
    pub circuits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobEntry {
    pub job: usize,
    /// Iteration this job attempted.
    pub iteration: usize,
    pub controller: String,
    pub decision: Decision,
    pub e_prime: f64,
    pub reference_energies: Vec<f64>,
    pub recorded_energies: Vec<f64>,
    pub reference_iterations: Vec<usize>,
    pub weights: Vec<f64>,
    pub detection: Option<DetectionResult>,
    pub e_minor: Option<f64>,
    pub e_plus: Option<f64>,
    pub e_minus: Option<f64>,
    /// Measured iteration energy, mean of the pair; accepted jobs only.
    pub energy: Option<f64>,
    /// Noise-free energy at the centre point; accepted jobs only.
    pub ideal_energy: Option<f64>,
    pub s1_circuits: usize,
    pub s2_circuits: usize,
    /// Raw trace offset for this job.
    pub offset: f64,
    pub window_size: usize,
    pub refreshed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub controller: String,
    pub kind: ControllerKind,
    pub reference_count: usize,
    pub th_p: f64,
    pub sigma: usize,
    pub shots: Shots,
    pub observable_count: usize,
    pub prime_count: usize,
    pub minor_count: usize,
    pub budget: usize,
    pub accepted: usize,
    pub jobs: usize,
    pub skips: usize,
    pub refreshes: usize,
    pub s1_circuits: usize,
    pub s2_circuits: usize,
    pub total_circuits: usize,
    pub first_ideal_energy: f64,
    pub final_ideal_energy: f64,
    pub final_energy: Option<f64>,
    pub ground_energy: Option<f64>,
    pub trace_exhausted: bool,
    pub fingerprint: String,
    pub final_theta: ParameterVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub summary: RunSummary,
    pub jobs: Vec<JobEntry>,
}

/// Sequential controller state for one run.
#[derive(Debug)]
pub struct Controller<'a> {
    setup: &'a RunSetup,
    circuit: Circuit,
    prime: Vec<usize>,
    minor: Vec<usize>,
    identity: f64,
    /// |c_k| / Σ|c| per term index, zero for identity terms.
    shares: Vec<f64>,
    spsa: Spsa,
    window: Option<ReferenceWindow>,
    retries: usize,
    accepted: usize,
    skips: usize,
    refreshes: usize,
}

impl<'a> Controller<'a> {
    pub fn new(setup: &'a RunSetup) -> Result<Self, RuntimeError> {
        setup.validate()?;
        let h = &setup.hamiltonian;
        let cc = &setup.controller;
        let (prime, minor) = match cc.kind {
            ControllerKind::MultiReference => {
                let p = partition_prime_minor(h, cc.th_p)?;
                (p.prime_indices, p.minor_indices)
            }
            _ => (h.observable_indices(), Vec::new()),
        };
        let mass: f64 = h
            .terms()
            .iter()
            .filter(|t| !t.string.is_identity())
            .map(|t| t.coefficient.abs())
            .sum();
        let shares = h
            .terms()
            .iter()
            .map(|t| {
                if t.string.is_identity() || mass == 0.0 {
                    0.0
                } else {
                    t.coefficient.abs() / mass
                }
            })
            .collect();
        let window = match cc.kind {
            ControllerKind::Baseline => None,
            ControllerKind::SingleReference => Some(ReferenceWindow::new(1)?),
            ControllerKind::MultiReference => Some(match &cc.weights {
                Some(w) => ReferenceWindow::with_weights(w.clone())?,
                None => ReferenceWindow::new(cc.reference_count)?,
            }),
        };
        Ok(Self {
            setup,
            circuit: build_ansatz(&setup.ansatz)?,
            prime,
            minor,
            identity: h.identity_offset(),
            shares,
            spsa: Spsa::new(setup.spsa, setup.theta0())?,
            window,
            retries: 0,
            accepted: 0,
            skips: 0,
            refreshes: 0,
        })
    }

    pub fn prime_indices(&self) -> &[usize] {
        &self.prime
    }

    pub fn minor_indices(&self) -> &[usize] {
        &self.minor
    }

    pub fn window(&self) -> Option<&ReferenceWindow> {
        self.window.as_ref()
    }

    pub fn optimizer(&self) -> &Spsa {
        &self.spsa
    }

    pub fn accepted(&self) -> usize {
        self.accepted
    }

    fn circuit_seed(&self, job: usize, role: usize, pert: u64) -> u64 {
        derive_seed(self.setup.seed, &[job as u64, role as u64, pert])
    }

    /// Drifted Σ c_k⟨P_k⟩ over `indices` at `theta`, as measured in `job`.
    /// `role` 0 is the current iteration, `1 + n` the n-th reference; `pert`
    /// is 0 for θ⁺ and 1 for θ⁻.
    fn subset_energy(
        &self,
        theta: &ParameterVector,
        indices: &[usize],
        job: usize,
        role: usize,
        pert: u64,
    ) -> Result<f64, RuntimeError> {
        if indices.is_empty() {
            return Ok(0.0);
        }
        let state = simulate(&self.circuit, theta)?;
        let seed = self.circuit_seed(job, role, pert);
        let terms = self.setup.hamiltonian.terms();
        let parts = term_energies(
            &state,
            indices.iter().map(|&i| (i, &terms[i])),
            self.setup.controller.shots,
            seed,
        )?;
        let mut sum = 0.0;
        for (&i, ideal) in indices.iter().zip(parts) {
            let drift_seed = derive_seed(seed, &[i as u64, DRIFT_TAG]);
            sum += self.setup.trace.drift_circuit(ideal, job, self.shares[i], drift_seed)?;
        }
        Ok(sum)
    }

    fn ideal_energy(&self, theta: &ParameterVector) -> Result<f64, RuntimeError> {
        Ok(hamiltonian_energy(
            &self.circuit,
            theta,
            self.setup.hamiltonian.terms(),
            Shots::Exact,
            0,
        )?)
    }

    /// Prime subset at the current pair plus every reference rerun, all in `job`.
    pub fn run_stage1(&mut self, job: usize) -> Result<Stage1, RuntimeError> {
        let (theta_plus, theta_minus) = self.spsa.ask();
        let prime_plus = self.subset_energy(&theta_plus, &self.prime, job, 0, 0)?;
        let prime_minus = self.subset_energy(&theta_minus, &self.prime, job, 0, 1)?;
        let e_prime = 0.5 * (prime_plus + prime_minus);

        let mut reruns = Vec::new();
        let (mut recorded, mut weights, mut reference_iterations) = (Vec::new(), Vec::new(), Vec::new());
        if let Some(window) = &self.window {
            for (n, r) in window.records().enumerate() {
                let plus = self.subset_energy(&r.theta_plus, &self.prime, job, 1 + n, 0)?;
                let minus = self.subset_energy(&r.theta_minus, &self.prime, job, 1 + n, 1)?;
                reruns.push(0.5 * (plus + minus));
                reference_iterations.push(r.iteration);
            }
            recorded = window.recorded();
            weights = window.weights();
        }

        let tolerance = self.setup.controller.tolerance;
        let detection = match (&self.window, self.setup.controller.kind) {
            (Some(w), _) if w.is_empty() => None,
            (Some(_), ControllerKind::SingleReference) => {
                Some(single_reference_detect(recorded[0], e_prime, reruns[0], tolerance))
            }
            (Some(w), _) => Some(w.detect(e_prime, &reruns, tolerance)?),
            (None, _) => None,
        };
        let decision = detection.map_or(Decision::Accept, |d| d.decision);
        Ok(Stage1 {
            job,
            circuits: (1 + reruns.len()) * self.prime.len() * 2,
            theta_plus,
            theta_minus,
            prime_plus,
            prime_minus,
            e_prime,
            reruns,
            recorded,
            weights,
            reference_iterations,
            detection,
            decision,
        })
    }

    /// Minor subset at the accepted pair, in the same job.
    pub fn run_stage2(&self, s1: &Stage1) -> Result<Stage2, RuntimeError> {
        if s1.decision != Decision::Accept {
            return Err(RuntimeError::Protocol(format!(
                "stage 2 requested for rescheduled job {}",
                s1.job
            )));
        }
        Ok(Stage2 {
            minor_plus: self.subset_energy(&s1.theta_plus, &self.minor, s1.job, 0, 0)?,
            minor_minus: self.subset_energy(&s1.theta_minus, &self.minor, s1.job, 0, 1)?,
            circuits: self.minor.len() * 2,
        })
    }

    /// One full job: S1, decision, then either S2 and an optimizer step or a
    /// reschedule (with a reference refresh once `sigma` is reached).
    pub fn step(&mut self, job: usize) -> Result<JobEntry, RuntimeError> {
        let window_size = self.window.as_ref().map_or(0, ReferenceWindow::len);
        let iteration = self.accepted;
        let s1 = self.run_stage1(job)?;
        let mut entry = JobEntry {
            job,
            iteration,
            controller: self.setup.controller.name(),
            decision: s1.decision,
            e_prime: s1.e_prime,
            reference_energies: s1.reruns.clone(),
            recorded_energies: s1.recorded.clone(),
            reference_iterations: s1.reference_iterations.clone(),
            weights: s1.weights.clone(),
            detection: s1.detection,
            e_minor: None,
            e_plus: None,
            e_minus: None,
            energy: None,
            ideal_energy: None,
            s1_circuits: s1.circuits,
            s2_circuits: 0,
            offset: self.setup.trace.offset(job)?,
            window_size,
            refreshed: false,
        };

        match s1.decision {
            Decision::Accept => {
                let s2 = self.run_stage2(&s1)?;
                let e_plus = s1.prime_plus + s2.minor_plus + self.identity;
                let e_minus = s1.prime_minus + s2.minor_minus + self.identity;
                entry.ideal_energy = Some(self.ideal_energy(self.spsa.theta())?);
                self.spsa.tell(e_plus, e_minus)?;
                if let Some(w) = &mut self.window {
                    w.push(ReferenceRecord {
                        iteration,
                        theta_plus: s1.theta_plus,
                        theta_minus: s1.theta_minus,
                        recorded_prime_energy: s1.e_prime,
                        recorded_job: job,
                    });
                }
                self.retries = 0;
                self.accepted += 1;
                entry.e_minor = Some(0.5 * (s2.minor_plus + s2.minor_minus));
                entry.e_plus = Some(e_plus);
                entry.e_minus = Some(e_minus);
                entry.energy = Some(0.5 * (e_plus + e_minus));
                entry.s2_circuits = s2.circuits;
            }
            Decision::Reschedule => {
                self.skips += 1;
                self.retries += 1;
                if self.retries == self.setup.controller.sigma {
                    if let Some(w) = &mut self.window {
                        w.refresh(&s1.reruns, job)?;
                    }
                    self.retries = 0;
                    self.refreshes += 1;
                    entry.refreshed = true;
                }
            }
        }
        Ok(entry)
    }
}

/// Runs jobs until the budget of accepted iterations is met, the optimizer
/// hits its own iteration cap, or the drift trace runs out.
pub fn run_experiment(setup: &RunSetup) -> Result<RunRecord, RuntimeError> {
    let mut ctl = Controller::new(setup)?;
    let first_ideal_energy = ctl.ideal_energy(ctl.spsa.theta())?;
    let horizon = setup.trace.horizon();
    let mut jobs = Vec::new();
    let mut trace_exhausted = false;
    while ctl.accepted < setup.budget && !ctl.spsa.is_done() {
        let job = jobs.len();
        if job >= horizon {
            trace_exhausted = true;
            break;
        }
        jobs.push(ctl.step(job)?);
    }

    let ground_energy = if setup.hamiltonian.qubit_count() <= GROUND_ORACLE_MAX_QUBITS {
        Some(ground_state_energy(&setup.hamiltonian)?)
    } else {
        None
    };
    let s1_circuits = jobs.iter().map(|j| j.s1_circuits).sum();
    let s2_circuits = jobs.iter().map(|j| j.s2_circuits).sum();
    let cc = &setup.controller;
    let summary = RunSummary {
        controller: cc.name(),
        kind: cc.kind,
        reference_count: cc.effective_reference_count(),
        th_p: cc.effective_th_p(),
        sigma: cc.sigma,
        shots: cc.shots,
        observable_count: setup.hamiltonian.observable_count(),
        prime_count: ctl.prime.len(),
        minor_count: ctl.minor.len(),
        budget: setup.budget,
        accepted: ctl.accepted,
        jobs: jobs.len(),
        skips: ctl.skips,
        refreshes: ctl.refreshes,
        s1_circuits,
        s2_circuits,
        total_circuits: s1_circuits + s2_circuits,
        first_ideal_energy,
        final_ideal_energy: ctl.ideal_energy(ctl.spsa.theta())?,
        final_energy: jobs.iter().rev().find_map(|j| j.energy),
        ground_energy,
        trace_exhausted,
        fingerprint: setup.fingerprint(),
        final_theta: ctl.spsa.theta().clone(),
    };
    Ok(RunRecord { summary, jobs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::AnsatzKind;
    use crate::noise::{generate_trace, DriftEpisode, EpisodeShape, NoiseConfig};
    use crate::pauli::parse_hamiltonian;

    fn heh_like() -> Hamiltonian {
        parse_hamiltonian("IIII -0.8\nZZII -1.2\nIZZI 0.12\nXIIX 0.09\nIIZZ 0.07\n").unwrap()
    }

    fn setup(controller: ControllerConfig, trace: DriftTrace, budget: usize) -> RunSetup {
        RunSetup {
            hamiltonian: heh_like(),
            ansatz: AnsatzSpec::new(AnsatzKind::Ra, 4, 2),
            trace,
            controller,
            spsa: SpsaConfig {
                seed: 11,
                ..Default::default()
            },
            budget,
            seed: 5,
            initial_theta: None,
        }
    }

    fn quiet(h: usize) -> DriftTrace {
        generate_trace(&NoiseConfig::quiet(h)).unwrap()
    }

    #[test]
    fn zero_budget_is_empty() {
        let s = setup(ControllerConfig::multi_reference(2, 0.8), quiet(10), 0);
        let r = run_experiment(&s).unwrap();
        assert!(r.jobs.is_empty());
        assert_eq!(r.summary.total_circuits, 0);
        assert_eq!(r.summary.first_ideal_energy, r.summary.final_ideal_energy);
        assert!(r.summary.final_energy.is_none());
    }

    #[test]
    fn accounting_on_heh_like() {
        let s = setup(
            ControllerConfig::multi_reference(2, 0.8).with_shots(Shots::Exact),
            quiet(50),
            20,
        );
        let mut ctl = Controller::new(&s).unwrap();
        assert_eq!((ctl.prime_indices().len(), ctl.minor_indices().len()), (1, 3));
        for job in 0..10 {
            let e = ctl.step(job).unwrap();
            assert_eq!(e.s1_circuits, (1 + e.window_size) * 2);
            let s2 = if e.decision == Decision::Accept { 6 } else { 0 };
            assert_eq!(e.s2_circuits, s2);
        }
        assert_eq!(ctl.window().unwrap().len(), 2);
        let e = ctl.step(10).unwrap();
        assert_eq!(e.s1_circuits, 6);

        let q = setup(ControllerConfig::single_reference().with_shots(Shots::Exact), quiet(5), 5);
        let mut ctl = Controller::new(&q).unwrap();
        assert_eq!(ctl.step(0).unwrap().s1_circuits, 8);
        assert_eq!(ctl.step(1).unwrap().s1_circuits, 16);
    }

    #[test]
    fn stage2_refused_after_reschedule() {
        let s = setup(ControllerConfig::multi_reference(1, 0.8).with_shots(Shots::Exact), quiet(5), 5);
        let mut ctl = Controller::new(&s).unwrap();
        let mut s1 = ctl.run_stage1(0).unwrap();
        s1.decision = Decision::Reschedule;
        assert!(matches!(ctl.run_stage2(&s1), Err(RuntimeError::Protocol(_))));
    }

    #[test]
    fn exact_stages_add_up_to_full_energy() {
        let s = setup(ControllerConfig::multi_reference(2, 0.8).with_shots(Shots::Exact), quiet(5), 5);
        let mut ctl = Controller::new(&s).unwrap();
        let s1 = ctl.run_stage1(0).unwrap();
        let s2 = ctl.run_stage2(&s1).unwrap();
        let circuit = build_ansatz(&s.ansatz).unwrap();
        let full = hamiltonian_energy(&circuit, &s1.theta_plus, s.hamiltonian.terms(), Shots::Exact, 0).unwrap();
        let staged = s1.prime_plus + s2.minor_plus + s.hamiltonian.identity_offset();
        assert!((full - staged).abs() < 1e-12);
    }

    #[test]
    fn sustained_step_is_waited_out_then_refreshed() {
        // A large step from job 5 onwards: the first drifted jobs are rescheduled
        // until sigma refreshes the references, after which the run proceeds.
        let trace = generate_trace(&NoiseConfig::scripted(
            200,
            vec![DriftEpisode::new(EpisodeShape::Step, 5, 195, 3.0)],
        ))
        .unwrap();
        let s = setup(
            ControllerConfig::multi_reference(2, 0.8)
                .with_shots(Shots::Exact)
                .with_sigma(1),
            trace,
            30,
        );
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.summary.accepted, 30);
        assert!(!r.summary.trace_exhausted);
        let first_skip = r.jobs.iter().find(|j| j.decision == Decision::Reschedule).unwrap();
        assert_eq!(first_skip.job, 5);
        assert!(first_skip.refreshed);
        assert!(r.jobs.iter().filter(|j| j.decision == Decision::Reschedule).all(|j| j.job >= 5));
    }

    #[test]
    fn same_setup_same_record() {
        let trace = generate_trace(&NoiseConfig {
            baseline_std: 0.05,
            ..NoiseConfig::quiet(60)
        })
        .unwrap();
        let s = setup(ControllerConfig::multi_reference(2, 0.8).with_shots(Shots::Count(256)), trace, 20);
        assert_eq!(run_experiment(&s).unwrap(), run_experiment(&s).unwrap());
    }

    #[test]
    fn trace_exhaustion_is_flagged() {
        let s = setup(ControllerConfig::baseline().with_shots(Shots::Exact), quiet(3), 10);
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.jobs.len(), 3);
        assert!(r.summary.trace_exhausted);
    }

    #[test]
    fn qubit_mismatch_rejected() {
        let mut s = setup(ControllerConfig::baseline(), quiet(3), 1);
        s.ansatz.qubit_count = 3;
        assert!(matches!(run_experiment(&s), Err(RuntimeError::Config(_))));
    }

    #[test]
    fn fingerprint_ignores_controller_only() {
        let a = setup(ControllerConfig::baseline(), quiet(3), 1);
        let mut b = a.clone();
        b.controller = ControllerConfig::multi_reference(2, 0.5);
        b.budget = 7;
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.seed = 6;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
