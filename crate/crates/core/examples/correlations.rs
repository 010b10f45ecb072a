//! Simulated fourfold coincidences for the four GHZ settings.
//!
//! `cargo run --example correlations [seed]`

use mixed_ghz::factory::{generation_pipeline, NoiseSpec};
use mixed_ghz::measurement::{fraction_predicted, outcome_fractions, write_counts_csv};
use mixed_ghz::nonlocality::GhzTest;
use mixed_ghz::pipeline::simulate_correlations;

fn main() -> mixed_ghz::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let rho = generation_pipeline(&NoiseSpec::calibrated())?.output;
    let test = GhzTest::standard();
    let tables = simulate_correlations(&rho, &test, 1900.0, 60.0, seed)?;
    for t in &tables {
        let parity = test.parity(&t.setting)?;
        let top: Vec<String> = outcome_fractions(t)?
            .into_iter()
            .filter(|(_, f)| f.value > 0.09)
            .map(|(label, f)| format!("{label}:{:.3}", f.value))
            .collect();
        println!(
            "{} ({} events) predicted fraction {:.4}  {}",
            t.setting,
            t.total(),
            fraction_predicted(t, parity)?.value,
            top.join(" ")
        );
    }
    print!("{}", &write_counts_csv(&tables[..1])?[..200]);
    Ok(())
}
