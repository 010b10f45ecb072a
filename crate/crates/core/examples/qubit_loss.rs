//! Losing every qubit beyond the first four of a T-shaped cluster leaves the
//! same mixed state, locally equivalent to a GHZ mixture.
//!
//! `cargo run --example qubit_loss`

use mixed_ghz::factory::{cluster_state, rho_phi, rho_psi};
use mixed_ghz::stabilizer::GraphSpec;
use mixed_ghz::state::{DensityMatrix, LocalUnitary};

fn main() -> mixed_ghz::Result<()> {
    for n in 5..=8 {
        let cluster = DensityMatrix::from_pure(&cluster_state(&GraphSpec::t_shaped(n)?)?);
        let reduced = cluster.partial_trace(&[1, 2, 3, 4])?;
        println!(
            "N={n}: F(reduced, rho_phi) = {:.12}, purity {:.4}",
            reduced.fidelity(&rho_phi())?,
            reduced.purity()
        );
    }
    let h = LocalUnitary::hadamard_on(4, &[1, 3, 4])?;
    let rotated = rho_phi().apply_local(&h)?;
    println!("F(H.I.H.H rho_phi, rho_psi) = {:.12}", rotated.fidelity(&rho_psi())?);
    Ok(())
}
