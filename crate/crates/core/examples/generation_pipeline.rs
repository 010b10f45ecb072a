//! Two Bell pairs fused on a polarizing beam splitter, white noise, and
//! dephasing of photon 4, compared against the closed forms of the noise model.
//!
//! `cargo run --example generation_pipeline`

use mixed_ghz::factory::{generation_pipeline, ghz4, rho_psi, NoiseSpec};
use mixed_ghz::nonlocality::{analyze_exact, GhzTest};

fn main() -> mixed_ghz::Result<()> {
    let test = GhzTest::standard();
    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "p", "S", "fraction", "F", "bound");
    for p in [1.0, 0.8, NoiseSpec::CALIBRATED_P, 0.5, 0.4] {
        let stages = generation_pipeline(&NoiseSpec::white(p))?;
        let exact = analyze_exact(&stages.output, &test)?;
        println!(
            "{p:>6.3} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            exact.s,
            exact.fractions[0],
            stages.output.fidelity(&rho_psi())?,
            exact.lr_bound_fraction
        );
        if p == 1.0 {
            let overlap = stages.post_fusion.inner(&ghz4())?.norm_sqr();
            println!("       fusion success {:.3}, overlap with GHZ4 {overlap:.3}", stages.fusion_probability);
        }
    }
    Ok(())
}
