use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use super::linalg::{hermitian_eigh, kron, psd_sqrt};
use super::{c, check_qubit, pauli_action, qubit_mask, LocalUnitary, StateVector, Tolerances, C64};
use crate::error::{Error, Result};
use crate::stabilizer::PauliString;

/// Eigenvalues at or below this are treated as outside a state's support in [`DensityMatrix::fidelity`].
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace (structural tolerance) and the minimum
    /// eigenvalue (spectral tolerance).
    pub fn new(n: usize, mat: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerances(n, mat, Tolerances::DEFAULT)
    }

    pub fn with_tolerances(n: usize, mat: DMatrix<C64>, tol: Tolerances) -> Result<Self> {
        let dim = 1usize << n;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: mat.nrows(),
            });
        }
        let herm = (&mat - mat.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > tol.structural {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.structural || tr.im.abs() > tol.structural {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let rho = Self { n, mat };
        let min = rho.min_eigenvalue();
        if min < -tol.spectral {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Wraps a matrix produced by an invariant-preserving operation.
    pub(crate) fn from_raw(n: usize, mat: DMatrix<C64>) -> Self {
        Self { n, mat }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(s: &StateVector) -> Self {
        let v = s.as_dvector();
        Self::from_raw(s.n(), v * v.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        Self::from_raw(n, DMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0))
    }

    /// Convex combination `Σ wₖ ρₖ`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let n = first.1.n;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("mixture weights must be a distribution".into()));
        }
        let dim = 1usize << n;
        let mut mat = DMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.n != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: rho.n,
                });
            }
            mat += &rho.mat * c(*w, 0.0);
        }
        Ok(Self::from_raw(n, mat))
    }

    /// `p·ρ + (1-p)·I/d`.
    pub fn white_noise(&self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("white-noise weight {p} outside [0,1]")));
        }
        Self::mixture(&[(p, self), (1.0 - p, &Self::maximally_mixed(self.n))])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self::from_raw(self.n + other.n, kron(&self.mat, &other.mat))
    }

    fn same_size(&self, other_n: usize) -> Result<()> {
        if self.n != other_n {
            Err(Error::LengthMismatch {
                expected: self.n,
                actual: other_n,
            })
        } else {
            Ok(())
        }
    }

    /// `U ρ U†` for a product of single-qubit unitaries.
    pub fn apply_local(&self, u: &LocalUnitary) -> Result<DensityMatrix> {
        self.same_size(u.n())?;
        let mut out = self.clone();
        for (k, f) in u.factors().iter().enumerate() {
            if *f != Matrix2::identity() {
                out = out.apply_single(k + 1, f)?;
            }
        }
        Ok(out)
    }

    /// Conjugate by a single-qubit unitary on qubit `q`.
    pub fn apply_single(&self, q: usize, u: &Matrix2<C64>) -> Result<DensityMatrix> {
        check_qubit(self.n, q)?;
        let mask = qubit_mask(self.n, q);
        let dim = self.dim();
        let mut m = self.mat.clone();
        // rows: U ρ
        for col in 0..dim {
            for r0 in (0..dim).filter(|r| r & mask == 0) {
                let r1 = r0 | mask;
                let (a, b) = (m[(r0, col)], m[(r1, col)]);
                m[(r0, col)] = u[(0, 0)] * a + u[(0, 1)] * b;
                m[(r1, col)] = u[(1, 0)] * a + u[(1, 1)] * b;
            }
        }
        // columns: (Uρ) U†
        for row in 0..dim {
            for c0 in (0..dim).filter(|c| c & mask == 0) {
                let c1 = c0 | mask;
                let (a, b) = (m[(row, c0)], m[(row, c1)]);
                m[(row, c0)] = a * u[(0, 0)].conj() + b * u[(0, 1)].conj();
                m[(row, c1)] = a * u[(1, 0)].conj() + b * u[(1, 1)].conj();
            }
        }
        Ok(Self::from_raw(self.n, m))
    }

    /// Controlled-Z conjugation between qubits `i` and `j`.
    pub fn apply_cz(&self, i: usize, j: usize) -> Result<DensityMatrix> {
        check_qubit(self.n, i)?;
        check_qubit(self.n, j)?;
        if i == j {
            return Err(Error::InvalidParameter("CZ needs two distinct qubits".into()));
        }
        let both = qubit_mask(self.n, i) | qubit_mask(self.n, j);
        let sign = |k: usize| if k & both == both { -1.0 } else { 1.0 };
        let mat = DMatrix::from_fn(self.dim(), self.dim(), |r, col| {
            self.mat[(r, col)] * (sign(r) * sign(col))
        });
        Ok(Self::from_raw(self.n, mat))
    }

    /// Reduced state on `keep`, ordered by original qubit index.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(Error::InvalidParameter("partial trace must keep at least one qubit".into()));
        }
        for &q in &keep {
            check_qubit(self.n, q)?;
        }
        let traced: Vec<usize> = (1..=self.n).filter(|q| !keep.contains(q)).collect();
        let spread = |bits: usize, qubits: &[usize]| -> usize {
            qubits.iter().enumerate().fold(0, |acc, (k, &q)| {
                if bits & (1 << (qubits.len() - 1 - k)) != 0 {
                    acc | qubit_mask(self.n, q)
                } else {
                    acc
                }
            })
        };
        let kept_idx: Vec<usize> = (0..1usize << keep.len()).map(|b| spread(b, &keep)).collect();
        let traced_idx: Vec<usize> = (0..1usize << traced.len()).map(|b| spread(b, &traced)).collect();
        let dk = kept_idx.len();
        let mat = DMatrix::from_fn(dk, dk, |r, col| {
            traced_idx
                .iter()
                .map(|&t| self.mat[(kept_idx[r] | t, kept_idx[col] | t)])
                .sum()
        });
        Ok(Self::from_raw(keep.len(), mat))
    }

    /// `Tr(ρ P)` for a Hermitian (real-phase) Pauli string.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.same_size(p.len())?;
        let sign = p.phase().sign().ok_or(Error::NotObservable)? as f64;
        let mut acc = c(0.0, 0.0);
        for col in 0..self.dim() {
            let (row, coeff) = pauli_action(p.ops(), col);
            // (ρP)_{col,col} = ρ_{col,row}·coeff
            acc += self.mat[(col, row)] * coeff;
        }
        Ok(sign * acc.re)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap(&self, s: &StateVector) -> Result<f64> {
        self.same_size(s.n())?;
        let v = s.as_dvector();
        Ok(v.dotc(&(&self.mat * v)).re)
    }

    /// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
    ///
    /// The square root is taken on whichever argument has the smaller numerical
    /// rank, restricted to its support (eigenvalues above [`SUPPORT_CUTOFF`]), so
    /// round-off eigenvalues of rank-deficient states do not enter through `√`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        self.same_size(other.n)?;
        let tol = Tolerances::DEFAULT.spectral;
        let (va, ua) = hermitian_eigh(&self.mat);
        let (vb, ub) = hermitian_eigh(&other.mat);
        if va.last().copied().unwrap_or(0.0) < -tol {
            return Err(Error::InvalidState("first argument is not PSD".into()));
        }
        if vb.last().copied().unwrap_or(0.0) < -tol {
            return Err(Error::InvalidState("second argument is not PSD".into()));
        }
        let rank = |v: &[f64]| v.iter().filter(|&&x| x > SUPPORT_CUTOFF).count();
        let (values, vectors, sigma) = if rank(&vb) < rank(&va) {
            (vb, ub, &self.mat)
        } else {
            (va, ua, &other.mat)
        };
        let k = rank(&values);
        if k == 0 {
            return Ok(0.0);
        }
        let support = vectors.columns(0, k).into_owned();
        let w = support.adjoint() * sigma * &support;
        let roots: Vec<f64> = values[..k].iter().map(|v| v.sqrt()).collect();
        let m = DMatrix::from_fn(k, k, |r, col| w[(r, col)] * (roots[r] * roots[col]));
        let (mu, _) = hermitian_eigh(&m);
        let root_sum: f64 = mu.iter().map(|m| m.max(0.0).sqrt()).sum();
        Ok((root_sum * root_sum).clamp(0.0, 1.0))
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.same_size(other.n)?;
        let (values, _) = hermitian_eigh(&(&self.mat - &other.mat));
        Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// Dephasing on qubit `q` in the orthonormal basis `(b0, b1)`: coherences between
    /// the two basis components are scaled by `1 − λ`.
    pub fn dephase(&self, q: usize, basis: ([C64; 2], [C64; 2]), lambda: f64) -> Result<DensityMatrix> {
        check_qubit(self.n, q)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("dephasing strength {lambda} outside [0,1]")));
        }
        let (b0, b1) = basis;
        let tol = Tolerances::DEFAULT.structural;
        let n0 = b0[0].norm_sqr() + b0[1].norm_sqr();
        let n1 = b1[0].norm_sqr() + b1[1].norm_sqr();
        let ov = b0[0].conj() * b1[0] + b0[1].conj() * b1[1];
        if (n0 - 1.0).abs() > tol || (n1 - 1.0).abs() > tol || ov.norm() > tol {
            return Err(Error::InvalidParameter("dephasing basis is not orthonormal".into()));
        }
        let u = LocalUnitary::basis_change(b0, b1);
        let rotated = self.apply_single(q, &u)?;
        let mask = qubit_mask(self.n, q);
        let keep = c(1.0 - lambda, 0.0);
        let mat = DMatrix::from_fn(self.dim(), self.dim(), |r, col| {
            let z = rotated.mat[(r, col)];
            if (r ^ col) & mask != 0 {
                z * keep
            } else {
                z
            }
        });
        Self::from_raw(self.n, mat).apply_single(q, &u.adjoint())
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigh(&self.mat).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Positive square root.
    pub fn sqrt(&self) -> DMatrix<C64> {
        psd_sqrt(&self.mat)
    }

    /// JSON form `{ "n": .., "entries": [[re, im], ...] }`, row-major.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DensityJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DensityJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

/// Serialized density matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityJson {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&DensityMatrix> for DensityJson {
    fn from(rho: &DensityMatrix) -> Self {
        let dim = rho.dim();
        let entries = (0..dim)
            .flat_map(|r| (0..dim).map(move |col| (r, col)))
            .map(|(r, col)| {
                let z = rho.mat[(r, col)];
                [z.re, z.im]
            })
            .collect();
        Self { n: rho.n, entries }
    }
}

impl TryFrom<DensityJson> for DensityMatrix {
    type Error = Error;

    fn try_from(raw: DensityJson) -> Result<Self> {
        let dim = 1usize << raw.n;
        if raw.entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                actual: raw.entries.len(),
            });
        }
        let mat = DMatrix::from_row_iterator(dim, dim, raw.entries.iter().map(|[re, im]| c(*re, *im)));
        DensityMatrix::new(raw.n, mat)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DensityJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        DensityJson::deserialize(deserializer)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}
