//! Pauli-string algebra, graph-state stabilizers and GHZ paradox derivation.

mod graph;
mod paradox;
mod pauli;

pub use graph::GraphSpec;
pub use paradox::{
    candidate_equations, derive_ghz_paradox, verify_certificate, ParadoxCertificate, SignedEquation,
    DEFAULT_MAX_PRODUCT_SIZE,
};
pub use pauli::{Pauli, PauliString, Phase};
