//! Derives GHZ paradoxes from cluster-state stabilizers after qubit loss.
//!
//! `cargo run --example derive_paradox [N]`

use mixed_ghz::stabilizer::{derive_ghz_paradox, verify_certificate, GraphSpec, DEFAULT_MAX_PRODUCT_SIZE};

fn main() -> mixed_ghz::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(7);
    let g = GraphSpec::t_shaped(n)?;
    let cert = derive_ghz_paradox(&g, &[1, 2, 3, 4], DEFAULT_MAX_PRODUCT_SIZE)?.expect("T-shape always has one");
    print!("{}", cert.transcript(&g));
    println!("verified on the cluster state: {}", verify_certificate(&cert, &g)?);

    // a four-qubit interior window of a chain is not enough
    let chain = GraphSpec::linear(7)?;
    for support in [vec![2, 3, 4, 5], vec![2, 3, 4, 5, 6]] {
        match derive_ghz_paradox(&chain, &support, DEFAULT_MAX_PRODUCT_SIZE)? {
            Some(c) => println!("linear 7, support {support:?}: {:?}", c.strings().iter().map(|s| s.to_string()).collect::<Vec<_>>()),
            None => println!("linear 7, support {support:?}: no paradox"),
        }
    }
    Ok(())
}
