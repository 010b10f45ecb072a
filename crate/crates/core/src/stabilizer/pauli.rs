//! Phase-exact Pauli strings.
//!
//! A string is a product `i^k · P_1 ⊗ … ⊗ P_n` with `k ∈ {0,1,2,3}` stored as an
//! integer exponent, so the symbolic layer never touches floating point.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const OBSERVABLES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Product of two single-qubit Paulis as `(i^k, P)`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | '0' | '_' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Unit phase `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS_ONE: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u8) -> Self {
        Phase(k % 4)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    /// `+1` or `-1` for real phases, `None` otherwise.
    pub fn sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn from_sign(sign: i8) -> Self {
        if sign < 0 {
            Phase::MINUS_ONE
        } else {
            Phase::PLUS_ONE
        }
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    phase: Phase,
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: Phase, ops: Vec<Pauli>) -> Self {
        Self { phase, ops }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Phase::PLUS_ONE, vec![Pauli::I; n])
    }

    /// Single operator `p` on `qubit` (1-based) of an `n`-qubit register.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        if qubit == 0 || qubit > n {
            return Err(Error::QubitOutOfRange { index: qubit, n });
        }
        let mut ops = vec![Pauli::I; n];
        ops[qubit - 1] = p;
        Ok(Self::new(Phase::PLUS_ONE, ops))
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Operator on `qubit` (1-based).
    pub fn op(&self, qubit: usize) -> Pauli {
        self.ops[qubit - 1]
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// 1-based indices of the non-identity positions.
    pub fn support(&self) -> Vec<usize> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_identity())
            .map(|(k, _)| k + 1)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|p| !p.is_identity()).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Exact operator product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let mut phase = self.phase.mul(other.phase);
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (k, p) = a.mul(b);
                phase = phase.mul(Phase::from_exponent(k));
                p
            })
            .collect();
        Ok(PauliString { phase, ops })
    }

    /// True when the two strings commute (even number of anticommuting sites).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .ops
            .iter()
            .zip(&other.ops)
            .filter(|(a, b)| !a.is_identity() && !b.is_identity() && a != b)
            .count();
        anti % 2 == 0
    }

    /// Keep only the listed qubits (1-based, in the given order).
    pub fn restrict(&self, qubits: &[usize]) -> Result<PauliString> {
        let ops = qubits
            .iter()
            .map(|&q| {
                if q == 0 || q > self.len() {
                    Err(Error::QubitOutOfRange { index: q, n: self.len() })
                } else {
                    Ok(self.ops[q - 1])
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::new(self.phase, ops))
    }

    /// Place this string on `qubits` of an `n`-qubit register, identity elsewhere.
    pub fn embed(&self, qubits: &[usize], n: usize) -> Result<PauliString> {
        if qubits.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: qubits.len(),
            });
        }
        let mut ops = vec![Pauli::I; n];
        for (&q, &p) in qubits.iter().zip(&self.ops) {
            if q == 0 || q > n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
            ops[q - 1] = p;
        }
        Ok(PauliString::new(self.phase, ops))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        for p in &self.ops {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `"+YYZZ"`, `"-YXYZ"`, `"+iX"`, `"-iZ"` or an unsigned `"XZ"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (Phase::PLUS_I, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::PLUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else {
            (Phase::PLUS_ONE, s)
        };
        let ops = rest
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidPauli(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return Err(Error::InvalidPauli(s.to_string()));
        }
        Ok(PauliString::new(phase, ops))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(ps("X").multiply(&ps("Z")).unwrap(), ps("-iY"));
        assert_eq!(ps("Z").multiply(&ps("X")).unwrap(), ps("+iY"));
        assert_eq!(ps("X").multiply(&ps("Y")).unwrap(), ps("+iZ"));
        assert_eq!(ps("Y").multiply(&ps("Y")).unwrap(), ps("+I"));
    }

    #[test]
    fn cluster_products() {
        let e1 = ps("+XZII");
        let e2 = ps("+ZXZZ");
        let e3 = ps("+IZXI");
        assert_eq!(e1.multiply(&e2).unwrap(), ps("+YYZZ"));
        assert_eq!(e2.multiply(&e3).unwrap(), ps("+ZYYZ"));
        let c3 = e1.multiply(&e2).unwrap().multiply(&e3).unwrap();
        assert_eq!(c3, ps("-YXYZ"));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(matches!(
            ps("XX").multiply(&ps("X")),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn display_round_trip() {
        for s in ["+YYZZ", "-YXYZ", "+iX", "-iIZ"] {
            assert_eq!(ps(s).to_string(), s);
        }
        assert_eq!(ps("XZ").to_string(), "+XZ");
        assert!("+Q".parse::<PauliString>().is_err());
        assert!("-".parse::<PauliString>().is_err());
    }

    #[test]
    fn commutation() {
        assert!(ps("XZ").commutes_with(&ps("ZX")));
        assert!(!ps("XI").commutes_with(&ps("ZI")));
        assert!(ps("XX").commutes_with(&ps("YY")));
    }

    #[test]
    fn restrict_and_embed() {
        let p = ps("-YXIZ");
        let r = p.restrict(&[1, 2, 4]).unwrap();
        assert_eq!(r, ps("-YXZ"));
        assert_eq!(r.embed(&[1, 2, 4], 4).unwrap(), p);
        assert_eq!(p.support(), vec![1, 2, 4]);
    }
}
