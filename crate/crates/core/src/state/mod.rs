//! Dense qubit-register linear algebra.
//!
//! Qubit 1 is the most significant bit of the computational index: in an
//! `n`-qubit register, qubit `q` sits at bit `n - q`. Computational `0` is `H`,
//! `1` is `V`.

mod density;
mod linalg;
mod local;
mod vector;

use num_complex::Complex64;

pub use density::DensityMatrix;
pub use linalg::{hermitian_eigh, psd_sqrt};
pub use local::LocalUnitary;
pub use vector::StateVector;

use crate::error::{Error, Result};
use crate::stabilizer::Pauli;

pub type C64 = Complex64;

/// Largest register the dense routines accept by default.
pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Tolerances for structural (Hermiticity, trace, norm) and spectral checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub structural: f64,
    pub spectral: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        structural: 1e-12,
        spectral: 1e-9,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Bit mask of qubit `q` (1-based) in an `n`-qubit index.
pub(crate) fn qubit_mask(n: usize, q: usize) -> usize {
    1 << (n - q)
}

pub(crate) fn check_qubit(n: usize, q: usize) -> Result<()> {
    if q == 0 || q > n {
        Err(Error::QubitOutOfRange { index: q, n })
    } else {
        Ok(())
    }
}

pub(crate) fn check_size(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::TooManyQubits { n, limit })
    } else {
        Ok(())
    }
}

/// `P|col⟩ = coeff·|row⟩` for a phase-free Pauli product.
pub(crate) fn pauli_action(ops: &[Pauli], col: usize) -> (usize, C64) {
    let n = ops.len();
    let mut row = col;
    let mut coeff = c(1.0, 0.0);
    for (k, &p) in ops.iter().enumerate() {
        let mask = qubit_mask(n, k + 1);
        let bit = col & mask != 0;
        match p {
            Pauli::I => {}
            Pauli::X => row ^= mask,
            Pauli::Y => {
                row ^= mask;
                // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                coeff *= if bit { c(0.0, -1.0) } else { c(0.0, 1.0) };
            }
            Pauli::Z => {
                if bit {
                    coeff = -coeff;
                }
            }
        }
    }
    (row, coeff)
}
