//! Dense spectral reference values for small Hamiltonians.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::pauli::{Hamiltonian, PauliError, PauliString};

/// Largest register for which dense matrices are built.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Phase picked up by basis state `b` under `p`, i.e. `P|b⟩ = phase · |b ⊕ x_mask⟩`.
pub(crate) fn pauli_phase(p: &PauliString, basis: usize) -> Complex64 {
    let sign = if ((basis as u64) & p.z_mask()).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    // Y = i·X·Z, so each Y contributes a factor of i on top of the X flip and Z sign.
    let i_pow = match p.y_count() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    i_pow * sign
}

/// Dense 2ⁿ×2ⁿ matrix of `h`.
pub fn hamiltonian_matrix(h: &Hamiltonian) -> Result<DMatrix<Complex64>, PauliError> {
    let n = h.qubit_count();
    if n > MAX_DENSE_QUBITS {
        return Err(PauliError::Capacity {
            qubits: n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for term in h.terms() {
        let flip = term.string.x_mask() as usize;
        for col in 0..dim {
            m[(col ^ flip, col)] += pauli_phase(&term.string, col) * term.coefficient;
        }
    }
    Ok(m)
}

/// Lowest eigenvalue of `h`, by dense Hermitian diagonalization.
pub fn ground_state_energy(h: &Hamiltonian) -> Result<f64, PauliError> {
    let m = hamiltonian_matrix(h)?;
    let eig = m.symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}
