//! Search for GHZ-type paradoxes among graph-state stabilizers on a qubit subset.
//!
//! The search runs in two stages:
//!
//! 1. Every product of at most `max_product_size` distinct generators is formed,
//!    by increasing product size and then lexicographically by generator index.
//!    Products acting trivially outside `support` are kept as candidate equations.
//! 2. Subsets of candidates are tried by increasing cardinality (at least 3), in
//!    lexicographic order of candidate position. The first subset in which every
//!    `(qubit, observable)` pair occurs an even number of times and whose signs
//!    multiply to `-1` is returned.
//!
//! Under local realism each side of such a set multiplies to `+1` (every
//! element of reality appears squared), while quantum mechanics predicts `-1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::graph::GraphSpec;
use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};
use crate::factory::cluster_state;

pub const DEFAULT_MAX_PRODUCT_SIZE: usize = 3;

/// One stabilizer eigen-equation: `string |G⟩ = sign |G⟩`, the sign carried as the phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedEquation {
    pub string: PauliString,
    /// 1-based generator indices whose product yields `string`.
    pub recipe: Vec<usize>,
}

impl SignedEquation {
    pub fn sign(&self) -> i8 {
        self.string.phase().sign().expect("stabilizer products have real phase")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParadoxCertificate {
    /// 1-based qubit labels of the graph the strings act on, ascending.
    pub support: Vec<usize>,
    /// Strings restricted to `support`.
    pub equations: Vec<SignedEquation>,
}

impl ParadoxCertificate {
    pub fn strings(&self) -> Vec<&PauliString> {
        self.equations.iter().map(|e| &e.string).collect()
    }

    pub fn signs(&self) -> Vec<i8> {
        self.equations.iter().map(SignedEquation::sign).collect()
    }

    /// Check the structural invariants: lengths, real signs, at least three equations.
    pub fn validate(&self) -> Result<()> {
        if self.equations.len() < 3 {
            return Err(Error::MalformedCertificate("fewer than three equations".into()));
        }
        if self.support.is_empty() || self.support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedCertificate("support must be ascending and nonempty".into()));
        }
        for eq in &self.equations {
            if eq.string.len() != self.support.len() {
                return Err(Error::MalformedCertificate(format!(
                    "string {} does not match support size {}",
                    eq.string,
                    self.support.len()
                )));
            }
            if !eq.string.phase().is_real() {
                return Err(Error::MalformedCertificate(format!("string {} has imaginary phase", eq.string)));
            }
        }
        Ok(())
    }

    /// Every `(qubit, observable)` pair occurs an even number of times.
    pub fn parity_ok(&self) -> bool {
        observable_parity_even(self.equations.iter().map(|e| &e.string))
    }

    pub fn sign_product(&self) -> i8 {
        self.signs().iter().product()
    }

    /// Human-readable derivation: recipe, string and sign bookkeeping per equation.
    pub fn transcript(&self, g: &GraphSpec) -> String {
        let gens = g.stabilizer_generators();
        let mut out = String::new();
        let _ = writeln!(out, "graph: n={} edges={:?}", g.n(), g.edges().collect::<Vec<_>>());
        let _ = writeln!(out, "support: {:?}", self.support);
        let _ = writeln!(out, "generators:");
        for (k, gen) in gens.iter().enumerate() {
            let _ = writeln!(out, "  E{} = {}", k + 1, gen);
        }
        let _ = writeln!(out, "equations:");
        for eq in &self.equations {
            let recipe: Vec<String> = eq.recipe.iter().map(|k| format!("E{k}")).collect();
            let _ = writeln!(
                out,
                "  {:<12} -> {}  (eigenvalue {:+})",
                recipe.join("·"),
                eq.string,
                eq.sign()
            );
        }
        let _ = writeln!(out, "observable counts on support:");
        for (pos, &q) in self.support.iter().enumerate() {
            let mut counts = BTreeMap::new();
            for eq in &self.equations {
                let p = eq.string.ops()[pos];
                if !p.is_identity() {
                    *counts.entry(p.as_char()).or_insert(0usize) += 1;
                }
            }
            let _ = writeln!(out, "  qubit {q}: {counts:?}");
        }
        let _ = writeln!(out, "local realism: product of all equations = +1 (every value squared)");
        let _ = writeln!(out, "quantum: product of eigenvalues = {:+}", self.sign_product());
        out
    }
}

pub(crate) fn observable_parity_even<'a>(strings: impl Iterator<Item = &'a PauliString>) -> bool {
    let mut counts: BTreeMap<(usize, Pauli), usize> = BTreeMap::new();
    for s in strings {
        for (q, &p) in s.ops().iter().enumerate() {
            if !p.is_identity() {
                *counts.entry((q, p)).or_default() += 1;
            }
        }
    }
    counts.values().all(|c| c % 2 == 0)
}

/// Products of at most `max_product_size` generators supported inside `support`.
pub fn candidate_equations(
    g: &GraphSpec,
    support: &[usize],
    max_product_size: usize,
) -> Result<Vec<SignedEquation>> {
    let support = normalize_support(g, support)?;
    let gens = g.stabilizer_generators();
    let n = g.n();
    let mut out = Vec::new();
    for size in 1..=max_product_size.min(n) {
        for combo in Combinations::new(n, size) {
            let mut product = PauliString::identity(n);
            for &k in &combo {
                product = product.multiply(&gens[k])?;
            }
            let inside = product
                .support()
                .iter()
                .all(|q| support.binary_search(q).is_ok());
            if inside && !product.is_identity() {
                out.push(SignedEquation {
                    string: product.restrict(&support)?,
                    recipe: combo.iter().map(|k| k + 1).collect(),
                });
            }
        }
    }
    Ok(out)
}

/// Smallest GHZ-type paradox on `support`, or `None` when no candidate subset qualifies.
pub fn derive_ghz_paradox(
    g: &GraphSpec,
    support: &[usize],
    max_product_size: usize,
) -> Result<Option<ParadoxCertificate>> {
    if max_product_size == 0 {
        return Err(Error::InvalidParameter("max_product_size must be at least 1".into()));
    }
    let support = normalize_support(g, support)?;
    let candidates = candidate_equations(g, &support, max_product_size)?;
    for size in 3..=candidates.len() {
        for combo in Combinations::new(candidates.len(), size) {
            let sign: i8 = combo.iter().map(|&k| candidates[k].sign()).product();
            if sign != -1 {
                continue;
            }
            if observable_parity_even(combo.iter().map(|&k| &candidates[k].string)) {
                return Ok(Some(ParadoxCertificate {
                    support,
                    equations: combo.iter().map(|&k| candidates[k].clone()).collect(),
                }));
            }
        }
    }
    Ok(None)
}

/// Numerical cross-check: every equation holds on the graph state with its stated
/// sign (within 1e-10), and the parity and sign-product conditions hold.
pub fn verify_certificate(cert: &ParadoxCertificate, g: &GraphSpec) -> Result<bool> {
    cert.validate()?;
    if let Some(&q) = cert.support.iter().find(|&&q| q > g.n()) {
        return Err(Error::QubitOutOfRange { index: q, n: g.n() });
    }
    if !cert.parity_ok() || cert.sign_product() != -1 {
        return Ok(false);
    }
    let state = cluster_state(g)?;
    for eq in &cert.equations {
        let full = eq.string.embed(&cert.support, g.n())?;
        let value = state.expectation(&full)?;
        if (value - 1.0).abs() > 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn normalize_support(g: &GraphSpec, support: &[usize]) -> Result<Vec<usize>> {
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() {
        return Err(Error::InvalidParameter("support must be nonempty".into()));
    }
    if let Some(&q) = s.iter().find(|&&q| q == 0 || q > g.n()) {
        return Err(Error::QubitOutOfRange { index: q, n: g.n() });
    }
    Ok(s)
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rendered(cert: &ParadoxCertificate) -> Vec<String> {
        cert.equations.iter().map(|e| e.string.to_string()).collect()
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn t_shape_yields_cluster_certificate() {
        for n in 5..=8 {
            let g = GraphSpec::t_shaped(n).unwrap();
            let cert = derive_ghz_paradox(&g, &[1, 2, 3, 4], 3).unwrap().unwrap();
            assert_eq!(rendered(&cert), ["+ZXZZ", "+YYZZ", "+ZYYZ", "-YXYZ"], "n={n}");
            let recipes: Vec<_> = cert.equations.iter().map(|e| e.recipe.clone()).collect();
            assert_eq!(recipes, vec![vec![2], vec![1, 2], vec![2, 3], vec![1, 2, 3]]);
            assert!(verify_certificate(&cert, &g).unwrap());
        }
    }

    #[test]
    fn single_qubit_support_has_no_paradox() {
        let g = GraphSpec::t_shaped(5).unwrap();
        for q in 1..=5 {
            assert!(derive_ghz_paradox(&g, &[q], 3).unwrap().is_none());
        }
    }

    #[test]
    fn linear_cluster_interior_needs_five_qubits() {
        let g = GraphSpec::linear(7).unwrap();
        assert!(derive_ghz_paradox(&g, &[2, 3, 4, 5], 3).unwrap().is_none());
        let cert = derive_ghz_paradox(&g, &[2, 3, 4, 5, 6], 3).unwrap().unwrap();
        assert_eq!(rendered(&cert), ["+IZXZI", "+ZYYZI", "+IZYYZ", "-ZYXYZ"]);
        assert!(verify_certificate(&cert, &g).unwrap());
    }

    #[test]
    fn linear_cluster_end_segment_admits_four_qubit_paradox() {
        // qubit 1 is a chain end, so only qubit 4 borders the lost part
        let g = GraphSpec::linear(6).unwrap();
        let cert = derive_ghz_paradox(&g, &[1, 2, 3, 4], 3).unwrap().unwrap();
        assert_eq!(rendered(&cert), ["+ZXZI", "+YYZI", "+ZYYZ", "-YXYZ"]);
        assert!(verify_certificate(&cert, &g).unwrap());
        assert!(derive_ghz_paradox(&g, &[1, 2, 3], 6).unwrap().is_none());
    }

    #[test]
    fn flipped_sign_fails_verification() {
        let g = GraphSpec::t_shaped(5).unwrap();
        let mut cert = derive_ghz_paradox(&g, &[1, 2, 3, 4], 3).unwrap().unwrap();
        let s = cert.equations[0].string.clone();
        cert.equations[0].string = s.with_phase(crate::stabilizer::Phase::MINUS_ONE);
        assert!(!verify_certificate(&cert, &g).unwrap());
    }

    #[test]
    fn odd_observable_count_fails_verification() {
        let g = GraphSpec::t_shaped(5).unwrap();
        let mut cert = derive_ghz_paradox(&g, &[1, 2, 3, 4], 3).unwrap().unwrap();
        // swap E2 for E1·E3 = +XIXI: still stabilizing, signs unchanged, parity broken
        cert.equations[0] = SignedEquation {
            string: "+XIXI".parse().unwrap(),
            recipe: vec![1, 3],
        };
        assert!(!cert.parity_ok());
        assert!(!verify_certificate(&cert, &g).unwrap());
    }

    #[test]
    fn malformed_certificates_are_errors() {
        let g = GraphSpec::t_shaped(5).unwrap();
        let mut cert = derive_ghz_paradox(&g, &[1, 2, 3, 4], 3).unwrap().unwrap();
        cert.equations.truncate(2);
        assert!(verify_certificate(&cert, &g).is_err());
        let mut cert = derive_ghz_paradox(&g, &[1, 2, 3, 4], 3).unwrap().unwrap();
        cert.support = vec![1, 2, 3, 9];
        assert!(verify_certificate(&cert, &g).is_err());
    }

    #[test]
    fn zero_product_size_is_rejected() {
        let g = GraphSpec::t_shaped(5).unwrap();
        assert!(derive_ghz_paradox(&g, &[1, 2, 3, 4], 0).is_err());
        assert!(derive_ghz_paradox(&g, &[0, 1], 3).is_err());
    }

    #[test]
    fn json_renders_signed_strings() {
        let g = GraphSpec::t_shaped(5).unwrap();
        let cert = derive_ghz_paradox(&g, &[1, 2, 3, 4], 3).unwrap().unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        assert!(json.contains("\"-YXYZ\""));
        let back: ParadoxCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
    }
}
