//! The whole simulated experiment from one configuration.
//!
//! `cargo run --release --example reproduce [out_dir]`

use std::path::PathBuf;

use mixed_ghz::config::RunConfig;
use mixed_ghz::pipeline::{reproduce, summary_text};

fn main() -> mixed_ghz::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("mixed-ghz"));
    let cfg = RunConfig {
        bootstrap_replicas: 100,
        ..RunConfig::default()
    };
    let bundle = reproduce(&cfg)?;
    print!("{}", summary_text(&bundle.summary, &bundle.report));
    for path in bundle.write(&out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
