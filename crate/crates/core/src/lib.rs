//! GHZ paradoxes from graph-state stabilizers under qubit loss, and the
//! simulated four-photon experiment that tests them: state generation,
//! Poissonian counting, maximum-likelihood tomography, entanglement witnesses
//! and local-realism bounds.

pub mod config;
pub mod error;
pub mod factory;
pub mod measurement;
pub mod nonlocality;
pub mod pipeline;
pub mod stabilizer;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
