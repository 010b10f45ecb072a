//! 256-projector tomography of the simulated state: linear inversion,
//! maximum likelihood, conditional GHZ witnesses with bootstrap errors.
//!
//! `cargo run --release --example tomography [rate_multiplier]`

use mixed_ghz::config::calibrated_tomography_rate;
use mixed_ghz::factory::{generation_pipeline, rho_psi, NoiseSpec, Polarization};
use mixed_ghz::tomography::{
    conditional_state, ghz_witness, linear_inversion, mle_reconstruct, simulate_tomography, MleOptions, NamedStatistic,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};

fn main() -> mixed_ghz::Result<()> {
    let scale: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1.0);
    let rho = generation_pipeline(&NoiseSpec::calibrated())?.output;
    let set = simulate_tomography(&rho, scale * calibrated_tomography_rate(), 60.0, 42)?;
    println!("{} counts over {} projectors", set.total(), set.projectors().len());

    let lin = linear_inversion(&set)?;
    println!("linear inversion: smallest eigenvalue {:.4}", lin.eigenvalues()[15]);

    let mle = mle_reconstruct(&set, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    println!(
        "MLE: {} iterations, converged {}, log-likelihood {:.3}",
        mle.iterations, mle.converged, mle.log_likelihood
    );
    println!("fidelity with target {:.4} (true state {:.4})", mle.rho.fidelity(&rho_psi())?, rho.fidelity(&rho_psi())?);

    let stats = [
        NamedStatistic::Witness { qubit: 4, branch: Polarization::D, sign: 1 },
        NamedStatistic::Witness { qubit: 4, branch: Polarization::A, sign: -1 },
    ];
    let sigmas = NamedStatistic::bootstrap_tomography_all(&stats, &set, &mle.rho, &MleOptions::default(), 100, 7)?;
    for ((branch, sign), sigma) in [(Polarization::D, 1), (Polarization::A, -1)].into_iter().zip(sigmas) {
        let (rho3, prob) = conditional_state(&mle.rho, 4, branch)?;
        let w = ghz_witness(&rho3, sign)?;
        println!("photon 4 = {branch} (p = {prob:.3}): <W {}> = {:.4} ± {sigma:.4}", w.target_label(), w.value);
    }
    Ok(())
}
