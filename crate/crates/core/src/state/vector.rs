use nalgebra::DVector;

use super::{c, check_qubit, pauli_action, qubit_mask, Tolerances, C64};
use crate::error::{Error, Result};
use crate::stabilizer::PauliString;

/// Normalized pure state of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: DVector<C64>,
}

impl StateVector {
    /// Validates length and unit norm.
    pub fn new(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                actual: amps.len(),
            });
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > Tolerances::DEFAULT.structural {
            return Err(Error::InvalidState(format!("squared norm {norm2} is not 1")));
        }
        Ok(Self {
            n,
            amps: DVector::from_vec(amps),
        })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(n: usize, amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(n, amps.into_iter().map(|a| a / norm).collect())
    }

    pub(crate) fn from_raw(n: usize, amps: DVector<C64>) -> Self {
        Self { n, amps }
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= 1 << n {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range")));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[index] = c(1.0, 0.0);
        Self::new(n, amps)
    }

    /// Tensor product of single-qubit kets, qubit 1 first.
    pub fn product(kets: &[[C64; 2]]) -> Result<Self> {
        let mut amps = vec![c(1.0, 0.0)];
        for k in kets {
            amps = amps.iter().flat_map(|&a| [a * k[0], a * k[1]]).collect();
        }
        Self::normalized(kets.len(), amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub(crate) fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector::from_raw(self.n + other.n, self.amps.kronecker(&other.amps))
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Controlled-Z between qubits `i` and `j`.
    pub fn apply_cz(&self, i: usize, j: usize) -> Result<StateVector> {
        check_qubit(self.n, i)?;
        check_qubit(self.n, j)?;
        if i == j {
            return Err(Error::InvalidParameter("CZ needs two distinct qubits".into()));
        }
        let both = qubit_mask(self.n, i) | qubit_mask(self.n, j);
        let mut amps = self.amps.clone();
        for (k, a) in amps.iter_mut().enumerate() {
            if k & both == both {
                *a = -*a;
            }
        }
        Ok(StateVector::from_raw(self.n, amps))
    }

    /// `⟨ψ|P|ψ⟩` for a Hermitian (real-phase) Pauli string.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        if p.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: p.len(),
            });
        }
        let sign = p.phase().sign().ok_or(Error::NotObservable)? as f64;
        let mut acc = c(0.0, 0.0);
        for (col, a) in self.amps.iter().enumerate() {
            let (row, coeff) = pauli_action(p.ops(), col);
            acc += self.amps[row].conj() * coeff * a;
        }
        Ok(sign * acc.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized_and_wrong_length() {
        assert!(StateVector::new(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(StateVector::new(2, vec![c(1.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(StateVector::normalized(1, vec![c(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn cz_is_involutive() {
        let h = 1.0 / 2f64.sqrt();
        let dd = StateVector::product(&[[c(h, 0.0), c(h, 0.0)]; 2]).unwrap();
        let twice = dd.apply_cz(1, 2).unwrap().apply_cz(1, 2).unwrap();
        assert_eq!(twice, dd);
        assert!(dd.apply_cz(1, 1).is_err());
        assert!(dd.apply_cz(1, 3).is_err());
    }

    #[test]
    fn imaginary_phase_is_not_observable() {
        let s = StateVector::basis(1, 0).unwrap();
        assert!(matches!(
            s.expectation(&"+iZ".parse().unwrap()),
            Err(Error::NotObservable)
        ));
        assert_eq!(s.expectation(&"-Z".parse().unwrap()).unwrap(), -1.0);
    }
}
