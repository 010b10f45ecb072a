//! Named states and the simulated four-photon generation pipeline.
//!
//! The pipeline mirrors the optical sequence at the state level: two `|Φ+⟩`
//! pairs, polarizing-beam-splitter fusion of photons 2 and 3 into a four-qubit
//! GHZ state, a white-noise admixture standing in for source imperfections, and
//! complete dephasing of photon 4 in the D/A basis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stabilizer::{GraphSpec, Pauli};
use crate::state::{c, check_qubit, check_size, qubit_mask, DensityMatrix, StateVector, C64, DEFAULT_MAX_QUBITS};

/// Polarization eigenstates. `H/V`, `D/A`, `R/L` are the `±1` eigenvectors of `Z`, `X`, `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Polarization {
    pub const ALL: [Polarization; 6] = [
        Polarization::H,
        Polarization::V,
        Polarization::D,
        Polarization::A,
        Polarization::R,
        Polarization::L,
    ];

    pub fn ket(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Polarization::H => [c(1.0, 0.0), c(0.0, 0.0)],
            Polarization::V => [c(0.0, 0.0), c(1.0, 0.0)],
            Polarization::D => [c(h, 0.0), c(h, 0.0)],
            Polarization::A => [c(h, 0.0), c(-h, 0.0)],
            Polarization::R => [c(h, 0.0), c(0.0, h)],
            Polarization::L => [c(h, 0.0), c(0.0, -h)],
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            Polarization::H | Polarization::V => Basis::Z,
            Polarization::D | Polarization::A => Basis::X,
            Polarization::R | Polarization::L => Basis::Y,
        }
    }

    /// Eigenvalue of this state under its basis observable.
    pub fn eigenvalue(self) -> i8 {
        match self {
            Polarization::H | Polarization::D | Polarization::R => 1,
            _ => -1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Polarization::H => 'H',
            Polarization::V => 'V',
            Polarization::D => 'D',
            Polarization::A => 'A',
            Polarization::R => 'R',
            Polarization::L => 'L',
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_char() == ch)
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Single-qubit measurement basis, named by its observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub fn plus(self) -> Polarization {
        match self {
            Basis::X => Polarization::D,
            Basis::Y => Polarization::R,
            Basis::Z => Polarization::H,
        }
    }

    pub fn minus(self) -> Polarization {
        match self {
            Basis::X => Polarization::A,
            Basis::Y => Polarization::L,
            Basis::Z => Polarization::V,
        }
    }

    /// `(+1 eigenvector, −1 eigenvector)`.
    pub fn kets(self) -> ([C64; 2], [C64; 2]) {
        (self.plus().ket(), self.minus().ket())
    }

    /// Label of outcome bit `b` (0 = `+1`, 1 = `−1`).
    pub fn label(self, bit: bool) -> Polarization {
        if bit {
            self.minus()
        } else {
            self.plus()
        }
    }

    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
            Basis::Z => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        self.pauli().as_char()
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'X' => Some(Basis::X),
            'Y' => Some(Basis::Y),
            'Z' => Some(Basis::Z),
            _ => None,
        }
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        match (chars.next().and_then(Basis::from_char), chars.next()) {
            (Some(b), None) => Ok(b),
            _ => Err(Error::InvalidParameter(format!("unknown basis `{s}`"))),
        }
    }
}

pub fn bell_phi_plus() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::new(2, vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).expect("normalized")
}

/// Polarizing-beam-splitter post-selection on `pair`: projects onto both-H or
/// both-V, renormalizes, and returns the success probability.
pub fn pbs_fusion(s: &StateVector, pair: (usize, usize)) -> Result<(StateVector, f64)> {
    let (i, j) = pair;
    check_qubit(s.n(), i)?;
    check_qubit(s.n(), j)?;
    if i == j {
        return Err(Error::InvalidParameter("fusion needs two distinct qubits".into()));
    }
    let (mi, mj) = (qubit_mask(s.n(), i), qubit_mask(s.n(), j));
    let projected: Vec<C64> = s
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            if (k & mi == 0) == (k & mj == 0) {
                a
            } else {
                c(0.0, 0.0)
            }
        })
        .collect();
    let prob: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
    if prob <= 1e-15 {
        return Err(Error::EmptyPostSelection);
    }
    let out = StateVector::normalized(s.n(), projected)?;
    Ok((out, prob))
}

/// `(|H…H⟩ + sign·|V…V⟩)/√2` on `n` qubits.
pub fn ghz(n: usize, sign: i8) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidParameter("GHZ state needs at least one qubit".into()));
    }
    check_size(n, DEFAULT_MAX_QUBITS)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![c(0.0, 0.0); 1 << n];
    amps[0] = c(h, 0.0);
    amps[(1 << n) - 1] = c(if sign < 0 { -h } else { h }, 0.0);
    StateVector::new(n, amps)
}

pub fn ghz4() -> StateVector {
    ghz(4, 1).expect("4 qubits")
}

pub fn ghz3(sign: i8) -> StateVector {
    ghz(3, sign).expect("3 qubits")
}

/// Graph state `∏ CZ_e |+⟩^⊗n`.
pub fn cluster_state(g: &GraphSpec) -> Result<StateVector> {
    cluster_state_with_limit(g, DEFAULT_MAX_QUBITS)
}

pub fn cluster_state_with_limit(g: &GraphSpec, limit: usize) -> Result<StateVector> {
    let n = g.n();
    check_size(n, limit)?;
    let amp = (0.5f64).powf(n as f64 / 2.0);
    let masks: Vec<usize> = g
        .edges()
        .map(|(u, v)| qubit_mask(n, u) | qubit_mask(n, v))
        .collect();
    let amps = (0..1usize << n)
        .map(|k| {
            let flips = masks.iter().filter(|&&m| k & m == m).count();
            c(if flips % 2 == 1 { -amp } else { amp }, 0.0)
        })
        .collect();
    StateVector::new(n, amps)
}

fn product_ket(labels: &[Polarization]) -> StateVector {
    StateVector::product(&labels.iter().map(|p| p.ket()).collect::<Vec<_>>()).expect("product of unit kets")
}

fn superpose(a: &StateVector, b: &StateVector, sign: f64) -> StateVector {
    let amps = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x + y * sign)
        .collect();
    StateVector::normalized(a.n(), amps).expect("nonzero superposition")
}

fn even_mixture(a: &StateVector, b: &StateVector) -> DensityMatrix {
    let (da, db) = (DensityMatrix::from_pure(a), DensityMatrix::from_pure(b));
    DensityMatrix::mixture(&[(0.5, &da), (0.5, &db)]).expect("valid weights")
}

/// Reduced state of qubits 1–4 of a T-shaped cluster:
/// `½(|φ₁⟩⟨φ₁| + |φ₂⟩⟨φ₂|)` with `|φ₁,₂⟩ = (|DHD⟩ ± |AVA⟩)/√2 ⊗ |H⟩,|V⟩`.
pub fn rho_phi() -> DensityMatrix {
    use Polarization::*;
    let phi1 = superpose(&product_ket(&[D, H, D, H]), &product_ket(&[A, V, A, H]), 1.0);
    let phi2 = superpose(&product_ket(&[D, H, D, V]), &product_ket(&[A, V, A, V]), -1.0);
    even_mixture(&phi1, &phi2)
}

/// `½(|GHZ⁺⟩⟨GHZ⁺|⊗|D⟩⟨D| + |GHZ⁻⟩⟨GHZ⁻|⊗|A⟩⟨A|)`.
pub fn rho_psi() -> DensityMatrix {
    let psi1 = ghz3(1).tensor(&product_ket(&[Polarization::D]));
    let psi2 = ghz3(-1).tensor(&product_ket(&[Polarization::A]));
    even_mixture(&psi1, &psi2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasingEntry {
    pub qubit: usize,
    pub basis: Basis,
    pub lambda: f64,
}

/// Imperfection model for the generation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Weight on the ideal state in `p·ρ + (1−p)·I/16`.
    pub white_noise_p: f64,
    /// Extra dephasing applied after the quartz stage.
    #[serde(default)]
    pub dephasing: Vec<DephasingEntry>,
}

impl NoiseSpec {
    /// Single-parameter model that matches the headline correlation numbers.
    pub const CALIBRATED_P: f64 = 0.625;

    pub fn ideal() -> Self {
        Self::white(1.0)
    }

    pub fn white(p: f64) -> Self {
        Self {
            white_noise_p: p,
            dephasing: Vec::new(),
        }
    }

    pub fn calibrated() -> Self {
        Self::white(Self::CALIBRATED_P)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.white_noise_p) {
            return Err(Error::InvalidParameter(format!(
                "white_noise_p {} outside [0,1]",
                self.white_noise_p
            )));
        }
        for d in &self.dephasing {
            if !(0.0..=1.0).contains(&d.lambda) {
                return Err(Error::InvalidParameter(format!("dephasing lambda {} outside [0,1]", d.lambda)));
            }
            check_qubit(4, d.qubit)?;
        }
        Ok(())
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::calibrated()
    }
}

/// Intermediate states of the generation pipeline.
#[derive(Debug, Clone)]
pub struct PipelineStages {
    /// Renormalized four-photon state after PBS post-selection.
    pub post_fusion: StateVector,
    pub fusion_probability: f64,
    /// After the white-noise admixture, before decoherence.
    pub post_noise: DensityMatrix,
    /// After quartz dephasing of photon 4 and any extra dephasing.
    pub output: DensityMatrix,
}

pub fn generation_pipeline(noise: &NoiseSpec) -> Result<PipelineStages> {
    noise.validate()?;
    let pairs = bell_phi_plus().tensor(&bell_phi_plus());
    let (post_fusion, fusion_probability) = pbs_fusion(&pairs, (2, 3))?;
    let post_noise = DensityMatrix::from_pure(&post_fusion).white_noise(noise.white_noise_p)?;
    let mut output = post_noise.dephase(4, Basis::X.kets(), 1.0)?;
    for d in &noise.dephasing {
        output = output.dephase(d.qubit, d.basis.kets(), d.lambda)?;
    }
    Ok(PipelineStages {
        post_fusion,
        fusion_probability,
        post_noise,
        output,
    })
}
