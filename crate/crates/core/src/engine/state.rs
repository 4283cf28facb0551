use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Gate, ParameterVector};
use super::EngineError;
use crate::pauli::{expectation_from_counts, Counts, Pauli, PauliString, PauliTerm};
use crate::seed::derive_seed;
use crate::spectrum::{pauli_phase, MAX_DENSE_QUBITS};

/// How expectation values are obtained: analytically, or from a finite number of shots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ShotsRepr", into = "ShotsRepr")]
pub enum Shots {
    Exact,
    Count(u32),
}

impl Shots {
    fn check(self) -> Result<(), EngineError> {
        match self {
            Shots::Count(0) => Err(EngineError::ZeroShots),
            _ => Ok(()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShotsRepr {
    Count(u32),
    Word(String),
}

impl TryFrom<ShotsRepr> for Shots {
    type Error = String;

    fn try_from(r: ShotsRepr) -> Result<Self, Self::Error> {
        match r {
            ShotsRepr::Count(0) => Err("shots must be positive".into()),
            ShotsRepr::Count(n) => Ok(Shots::Count(n)),
            ShotsRepr::Word(w) if w.eq_ignore_ascii_case("exact") => Ok(Shots::Exact),
            ShotsRepr::Word(w) => Err(format!("expected a shot count or \"exact\", got {w:?}")),
        }
    }
}

impl From<Shots> for ShotsRepr {
    fn from(s: Shots) -> Self {
        match s {
            Shots::Exact => ShotsRepr::Word("exact".into()),
            Shots::Count(n) => ShotsRepr::Count(n),
        }
    }
}

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single_qubit_matrix(gate: &Gate, params: &[f64]) -> Option<(usize, Mat2)> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    Some(match *gate {
        Gate::H(q) => {
            let h = c(FRAC_1_SQRT_2, 0.0);
            (q, [[h, h], [h, -h]])
        }
        Gate::S(q) => (q, [[one, zero], [zero, c(0.0, 1.0)]]),
        Gate::Sdg(q) => (q, [[one, zero], [zero, c(0.0, -1.0)]]),
        Gate::X(q) => (q, [[zero, one], [one, zero]]),
        Gate::Rx(q, a) => {
            let t = a.resolve(params) / 2.0;
            let (s, co) = t.sin_cos();
            (q, [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
        }
        Gate::Ry(q, a) => {
            let t = a.resolve(params) / 2.0;
            let (s, co) = t.sin_cos();
            (q, [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
        }
        Gate::Rz(q, a) => {
            let t = a.resolve(params) / 2.0;
            let (s, co) = t.sin_cos();
            (q, [[c(co, -s), zero], [zero, c(co, s)]])
        }
        Gate::Cx { .. } | Gate::Cz(..) => return None,
    })
}

/// A pure state on `n` qubits; amplitude index bit `i` is qubit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    qubit_count: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// |0…0⟩.
    pub fn zero_state(qubit_count: usize) -> Result<Self, EngineError> {
        if qubit_count > MAX_DENSE_QUBITS {
            return Err(EngineError::Capacity {
                qubits: qubit_count,
                max: MAX_DENSE_QUBITS,
            });
        }
        let mut amplitudes = vec![c(0.0, 0.0); 1 << qubit_count];
        amplitudes[0] = c(1.0, 0.0);
        Ok(Self {
            qubit_count,
            amplitudes,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn apply(&mut self, gate: &Gate, params: &[f64]) {
        if let Some((q, m)) = single_qubit_matrix(gate, params) {
            let bit = 1usize << q;
            for i in 0..self.amplitudes.len() {
                if i & bit == 0 {
                    let j = i | bit;
                    let (x, y) = (self.amplitudes[i], self.amplitudes[j]);
                    self.amplitudes[i] = m[0][0] * x + m[0][1] * y;
                    self.amplitudes[j] = m[1][0] * x + m[1][1] * y;
                }
            }
            return;
        }
        match *gate {
            Gate::Cx { control, target } => {
                let (cb, tb) = (1usize << control, 1usize << target);
                for i in 0..self.amplitudes.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amplitudes.swap(i, i | tb);
                    }
                }
            }
            Gate::Cz(a, b) => {
                let mask = (1usize << a) | (1usize << b);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            _ => unreachable!("single-qubit gates handled above"),
        }
    }

    fn check_width(&self, p: &PauliString) -> Result<(), EngineError> {
        if p.len() != self.qubit_count {
            return Err(EngineError::WidthMismatch {
                expected: self.qubit_count,
                found: p.len(),
            });
        }
        Ok(())
    }

    /// ⟨ψ|P|ψ⟩ computed directly from the amplitudes.
    pub fn expectation(&self, p: &PauliString) -> Result<f64, EngineError> {
        self.check_width(p)?;
        let flip = p.x_mask() as usize;
        let value: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, amp)| (self.amplitudes[b ^ flip].conj() * pauli_phase(p, b) * amp).re)
            .sum();
        Ok(value)
    }

    /// Copy of the state with the measurement-basis change for `p` applied:
    /// H on X sites, S† then H on Y sites.
    pub fn rotated_for(&self, p: &PauliString) -> Result<Statevector, EngineError> {
        self.check_width(p)?;
        let mut rotated = self.clone();
        for (q, &op) in p.ops().iter().enumerate() {
            match op {
                Pauli::X => rotated.apply(&Gate::H(q), &[]),
                Pauli::Y => {
                    rotated.apply(&Gate::Sdg(q), &[]);
                    rotated.apply(&Gate::H(q), &[]);
                }
                Pauli::I | Pauli::Z => {}
            }
        }
        Ok(rotated)
    }

    /// Draws `shots` Z-basis outcomes with a generator seeded from `seed`.
    ///
    /// The multinomial is drawn as a chain of conditional binomials, so the
    /// cost scales with the number of basis states rather than with `shots`.
    pub fn sample_counts(&self, shots: u32, seed: u64) -> Result<Counts, EngineError> {
        if shots == 0 {
            return Err(EngineError::ZeroShots);
        }
        let probs: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let mut mass: f64 = probs.iter().sum();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(EngineError::Sampling(format!("state has total probability {mass}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut remaining = u64::from(shots);
        let mut tally = vec![0u64; probs.len()];
        let last = probs.iter().rposition(|&p| p > 0.0).expect("positive mass");
        for (idx, &p) in probs.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            if idx == last {
                tally[idx] = remaining;
                break;
            }
            if p <= 0.0 {
                continue;
            }
            let q = (p / mass).clamp(0.0, 1.0);
            let k = Binomial::new(remaining, q)
                .map_err(|e| EngineError::Sampling(e.to_string()))?
                .sample(&mut rng);
            tally[idx] = k;
            remaining -= k;
            mass -= p;
        }
        Ok(tally
            .into_iter()
            .enumerate()
            .filter(|&(_, n)| n > 0)
            .map(|(idx, n)| {
                let bits: String = (0..self.qubit_count)
                    .map(|q| if idx >> q & 1 == 1 { '1' } else { '0' })
                    .collect();
                (bits, n)
            })
            .collect())
    }

    /// Estimate of ⟨P⟩: exact, or from rotated-basis samples.
    pub fn measure(&self, p: &PauliString, shots: Shots, seed: u64) -> Result<f64, EngineError> {
        shots.check()?;
        match shots {
            Shots::Exact => self.expectation(p),
            Shots::Count(n) => {
                if p.is_identity() {
                    return Ok(1.0);
                }
                let counts = self.rotated_for(p)?.sample_counts(n, seed)?;
                Ok(expectation_from_counts(&counts, p)?)
            }
        }
    }
}

/// Runs `circuit` on |0…0⟩ with `params` bound to its slots.
pub fn simulate(circuit: &Circuit, params: &ParameterVector) -> Result<Statevector, EngineError> {
    circuit.validate_slots()?;
    if params.len() != circuit.parameter_count() {
        return Err(EngineError::ParameterLength {
            expected: circuit.parameter_count(),
            found: params.len(),
        });
    }
    let mut state = Statevector::zero_state(circuit.qubit_count())?;
    for gate in circuit.gates() {
        state.apply(gate, params.as_slice());
    }
    Ok(state)
}

/// Expectation of one observable circuit: the ansatz followed by the basis change for `p`.
pub fn observable_expectation(
    circuit: &Circuit,
    params: &ParameterVector,
    p: &PauliString,
    shots: Shots,
    rng_seed: u64,
) -> Result<f64, EngineError> {
    shots.check()?;
    simulate(circuit, params)?.measure(p, shots, rng_seed)
}

/// Sub-seed for the term at `index`: independent of every other term.
pub fn term_seed(rng_seed: u64, index: usize) -> u64 {
    derive_seed(rng_seed, &[index as u64])
}

/// Per-term contributions `c_k · ⟨P_k⟩` for `(index, term)` pairs on a prepared state.
/// Term `index` draws from [`term_seed`]`(rng_seed, index)`; identity strings contribute `c_k` exactly.
pub fn term_energies<'a>(
    state: &Statevector,
    terms: impl IntoIterator<Item = (usize, &'a PauliTerm)>,
    shots: Shots,
    rng_seed: u64,
) -> Result<Vec<f64>, EngineError> {
    shots.check()?;
    let terms: Vec<(usize, &PauliTerm)> = terms.into_iter().collect();
    terms
        .par_iter()
        .map(|&(index, term)| {
            let value = if term.string.is_identity() {
                1.0
            } else {
                state.measure(&term.string, shots, term_seed(rng_seed, index))?
            };
            Ok(term.coefficient * value)
        })
        .collect()
}

/// Σ c_k ⟨P_k⟩ over `terms`, the k-th term sampled with its own sub-seed.
pub fn hamiltonian_energy(
    circuit: &Circuit,
    params: &ParameterVector,
    terms: &[PauliTerm],
    shots: Shots,
    rng_seed: u64,
) -> Result<f64, EngineError> {
    shots.check()?;
    if terms.is_empty() {
        return Ok(0.0);
    }
    let state = simulate(circuit, params)?;
    let parts = term_energies(&state, terms.iter().enumerate(), shots, rng_seed)?;
    Ok(parts.iter().sum())
}
