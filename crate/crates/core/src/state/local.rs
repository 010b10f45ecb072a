use nalgebra::Matrix2;

use super::{c, Tolerances, C64};
use crate::error::{Error, Result};

/// Tensor product of single-qubit unitaries, one factor per qubit (qubit 1 first).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    factors: Vec<Matrix2<C64>>,
}

impl LocalUnitary {
    pub fn new(factors: Vec<Matrix2<C64>>) -> Result<Self> {
        for (k, u) in factors.iter().enumerate() {
            let err = (u * u.adjoint() - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if err > Tolerances::DEFAULT.structural {
                return Err(Error::InvalidParameter(format!(
                    "factor {} is not unitary (deviation {err:e})",
                    k + 1
                )));
            }
        }
        Ok(Self { factors })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            factors: vec![Matrix2::identity(); n],
        }
    }

    pub fn hadamard() -> Matrix2<C64> {
        let h = 1.0 / 2f64.sqrt();
        Matrix2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0))
    }

    /// Unitary whose rows are `⟨b0|`, `⟨b1|`: maps `b0 → |H⟩`, `b1 → |V⟩`.
    pub fn basis_change(b0: [C64; 2], b1: [C64; 2]) -> Matrix2<C64> {
        Matrix2::new(b0[0].conj(), b0[1].conj(), b1[0].conj(), b1[1].conj())
    }

    /// `H` on the listed qubits (1-based), identity elsewhere.
    pub fn hadamard_on(n: usize, qubits: &[usize]) -> Result<Self> {
        let mut factors = vec![Matrix2::identity(); n];
        for &q in qubits {
            super::check_qubit(n, q)?;
            factors[q - 1] = Self::hadamard();
        }
        Ok(Self { factors })
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Matrix2<C64>] {
        &self.factors
    }
}
