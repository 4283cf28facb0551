//! Hardware-efficient ansatz templates.

use serde::{Deserialize, Serialize};

use super::circuit::{Angle, Circuit, Gate};
use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    /// Y rotations with a linear CX chain.
    #[serde(alias = "real_amplitudes")]
    Ra,
    /// Y and Z rotations with a linear CX chain.
    #[serde(alias = "efficient_su2")]
    Su2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub qubit_count: usize,
    pub reps: usize,
}

impl AnsatzSpec {
    pub fn new(kind: AnsatzKind, qubit_count: usize, reps: usize) -> Self {
        Self {
            kind,
            qubit_count,
            reps,
        }
    }

    pub fn parameter_count(&self) -> usize {
        let per_layer = match self.kind {
            AnsatzKind::Ra => self.qubit_count,
            AnsatzKind::Su2 => 2 * self.qubit_count,
        };
        per_layer * (self.reps + 1)
    }
}

/// Builds `reps` blocks of (rotation layer, linear entangling chain) followed by
/// a final rotation layer. Slots are numbered in gate order.
pub fn build_ansatz(spec: &AnsatzSpec) -> Result<Circuit, EngineError> {
    if spec.reps == 0 {
        return Err(EngineError::InvalidSpec("ansatz needs reps >= 1".into()));
    }
    let n = spec.qubit_count;
    let mut circuit = Circuit::new(n)?;
    let mut slot = 0;
    let mut rotation_layer = |c: &mut Circuit| -> Result<(), EngineError> {
        for q in 0..n {
            c.push(Gate::Ry(q, Angle::Slot(slot)))?;
            slot += 1;
            if spec.kind == AnsatzKind::Su2 {
                c.push(Gate::Rz(q, Angle::Slot(slot)))?;
                slot += 1;
            }
        }
        Ok(())
    };
    for _ in 0..spec.reps {
        rotation_layer(&mut circuit)?;
        for q in 0..n.saturating_sub(1) {
            circuit.push(Gate::Cx {
                control: q,
                target: q + 1,
            })?;
        }
    }
    rotation_layer(&mut circuit)?;
    Ok(circuit)
}
