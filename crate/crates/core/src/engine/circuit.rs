use serde::{Deserialize, Serialize};

use super::EngineError;

/// Rotation angle: either a slot in the bound parameter vector or a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Slot(usize),
    Fixed(f64),
}

impl Angle {
    pub(crate) fn resolve(self, params: &[f64]) -> f64 {
        match self {
            Angle::Slot(i) => params[i],
            Angle::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    Cx { control: usize, target: usize },
    Cz(usize, usize),
}

impl Gate {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) => (q, None),
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => (q, None),
            Gate::Cx { control, target } => (control, Some(target)),
            Gate::Cz(a, b) => (a, Some(b)),
        }
    }

    pub fn slot(&self) -> Option<usize> {
        match *self {
            Gate::Rx(_, Angle::Slot(s)) | Gate::Ry(_, Angle::Slot(s)) | Gate::Rz(_, Angle::Slot(s)) => {
                Some(s)
            }
            _ => None,
        }
    }

    pub fn is_entangling(&self) -> bool {
        self.qubits().1.is_some()
    }
}

/// An ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    qubit_count: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Result<Self, EngineError> {
        if qubit_count == 0 {
            return Err(EngineError::InvalidSpec("circuit needs at least one qubit".into()));
        }
        Ok(Self {
            qubit_count,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self, EngineError> {
        let (a, b) = gate.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= self.qubit_count {
                return Err(EngineError::QubitOutOfRange {
                    qubit: q,
                    qubit_count: self.qubit_count,
                });
            }
        }
        if b == Some(a) {
            return Err(EngineError::DuplicateTargets(a));
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// One past the highest parameter slot referenced.
    pub fn parameter_count(&self) -> usize {
        self.gates
            .iter()
            .filter_map(Gate::slot)
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn entangling_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_entangling()).count()
    }

    /// Checks that the referenced slots cover `0..parameter_count` without gaps.
    pub fn validate_slots(&self) -> Result<(), EngineError> {
        let n = self.parameter_count();
        let mut seen = vec![false; n];
        for s in self.gates.iter().filter_map(Gate::slot) {
            seen[s] = true;
        }
        match seen.iter().position(|&used| !used) {
            Some(gap) => Err(EngineError::NonContiguousSlots(gap)),
            None => Ok(()),
        }
    }
}

/// Real-valued rotation angles bound to a circuit's parameter slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}
