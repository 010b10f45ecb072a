//! Poisson parametric bootstrap.
//!
//! Replica `r` redraws every count as `Poisson(cᵢ)` from the sub-seed
//! `split_seed(seed, r)`, so results do not depend on thread scheduling.

use rayon::prelude::*;

use super::{conditional_state, ghz_witness, mle_reconstruct_from, MleOptions, TomographySet};
use crate::error::{Error, Result};
use crate::factory::Polarization;
use crate::measurement::{
    expectation_from_counts, fraction_predicted, poisson_draw, rng_from_seed, split_seed, CountsTable,
};
use crate::state::DensityMatrix;

pub const DEFAULT_BOOTSTRAP_REPLICAS: usize = 500;
const MIN_REPLICAS: usize = 100;

fn replicate<T, F>(counts: &[u64], b: usize, seed: u64, statistic: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[u64]) -> Result<T> + Sync,
{
    if b < MIN_REPLICAS {
        return Err(Error::InvalidParameter(format!("bootstrap needs at least {MIN_REPLICAS} replicas")));
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::DegenerateData("all counts are zero".into()));
    }
    (0..b as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(split_seed(seed, r));
            let resampled: Vec<u64> = counts.iter().map(|&c| poisson_draw(&mut rng, c as f64)).collect();
            statistic(&resampled)
        })
        .collect()
}

/// Statistic values over `b` resampled copies of `counts`, in replica order.
pub fn bootstrap_values<F>(counts: &[u64], b: usize, seed: u64, statistic: F) -> Result<Vec<f64>>
where
    F: Fn(&[u64]) -> Result<f64> + Sync,
{
    replicate(counts, b, seed, statistic)
}

fn sample_sigma(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Sample standard deviation of the bootstrap replicas.
pub fn bootstrap_sigma<F>(counts: &[u64], b: usize, seed: u64, statistic: F) -> Result<f64>
where
    F: Fn(&[u64]) -> Result<f64> + Sync,
{
    Ok(sample_sigma(bootstrap_values(counts, b, seed, statistic)?.into_iter()))
}

/// One sigma per component of a vector-valued statistic, sharing the replicas.
pub fn bootstrap_sigmas<F>(counts: &[u64], b: usize, seed: u64, statistic: F) -> Result<Vec<f64>>
where
    F: Fn(&[u64]) -> Result<Vec<f64>> + Sync,
{
    let rows = replicate(counts, b, seed, statistic)?;
    let k = rows[0].len();
    if rows.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidParameter("statistic length changed between replicas".into()));
    }
    Ok((0..k).map(|j| sample_sigma(rows.iter().map(|r| r[j]))).collect())
}

/// Statistics the command line can attach error bars to.
#[derive(Debug, Clone)]
pub enum NamedStatistic {
    /// Fraction of events with the given outcome parity in a correlation table.
    Fraction { parity: i8 },
    /// Parity-weighted correlation of a table.
    Expectation,
    /// Fidelity of the maximum-likelihood state with a target.
    Fidelity { target: Box<DensityMatrix> },
    /// GHZ witness on the branch left by projecting `qubit` onto `branch`.
    Witness {
        qubit: usize,
        branch: Polarization,
        sign: i8,
    },
}

impl NamedStatistic {
    pub fn on_table(&self, t: &CountsTable) -> Result<f64> {
        match self {
            NamedStatistic::Fraction { parity } => Ok(fraction_predicted(t, *parity)?.value),
            NamedStatistic::Expectation => Ok(expectation_from_counts(t)?.value),
            _ => Err(Error::InvalidParameter("statistic needs tomography data".into())),
        }
    }

    pub fn on_state(&self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            NamedStatistic::Fidelity { target } => rho.fidelity(target),
            NamedStatistic::Witness { qubit, branch, sign } => {
                let (rho3, _) = conditional_state(rho, *qubit, *branch)?;
                Ok(ghz_witness(&rho3, *sign)?.value)
            }
            _ => Err(Error::InvalidParameter("statistic needs a correlation table".into())),
        }
    }

    pub fn bootstrap_table(&self, t: &CountsTable, b: usize, seed: u64) -> Result<f64> {
        bootstrap_sigma(&t.counts, b, seed, |counts| {
            let mut replica = t.clone();
            replica.counts = counts.to_vec();
            self.on_table(&replica)
        })
    }

    /// Each replica is reconstructed from `start`, normally the point estimate.
    pub fn bootstrap_tomography(
        &self,
        t: &TomographySet,
        start: &DensityMatrix,
        opts: &MleOptions,
        b: usize,
        seed: u64,
    ) -> Result<f64> {
        Ok(Self::bootstrap_tomography_all(std::slice::from_ref(self), t, start, opts, b, seed)?[0])
    }

    /// Sigmas for several state statistics from one reconstruction per replica.
    pub fn bootstrap_tomography_all(
        stats: &[NamedStatistic],
        t: &TomographySet,
        start: &DensityMatrix,
        opts: &MleOptions,
        b: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        let opts = MleOptions {
            start: Some(start.clone()),
            ..opts.clone()
        };
        bootstrap_sigmas(t.counts(), b, seed, |counts| {
            let counts: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let r = mle_reconstruct_from(t.n(), &counts, &opts)?;
            stats.iter().map(|s| s.on_state(&r.rho)).collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::Setting;

    fn table(hits: u64, misses: u64) -> CountsTable {
        let s: Setting = "XX".parse().unwrap();
        // outcomes 00 and 11 carry parity +1
        CountsTable::new(s, vec![hits, misses, 0, 0], 60.0).unwrap()
    }

    #[test]
    fn deterministic_parity_has_zero_sigma() {
        let t = table(1900, 0);
        let s = NamedStatistic::Fraction { parity: 1 }.bootstrap_table(&t, 200, 1).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn fraction_sigma_matches_binomial() {
        let t = table(1539, 361);
        let f: f64 = 1539.0 / 1900.0;
        let binomial = (f * (1.0 - f) / 1900.0).sqrt();
        let s = NamedStatistic::Fraction { parity: 1 }.bootstrap_table(&t, 500, 9).unwrap();
        assert!((s / binomial - 1.0).abs() < 0.2, "{s} vs {binomial}");
        assert!((s - 0.009).abs() < 0.002);
        let doubled = table(2 * 1539, 2 * 361);
        let s2 = NamedStatistic::Fraction { parity: 1 }.bootstrap_table(&doubled, 500, 9).unwrap();
        assert!((s2 / s - 1.0 / 2f64.sqrt()).abs() < 0.2 / 2f64.sqrt());
    }

    #[test]
    fn seeded_and_ordered() {
        let counts = [30, 12, 7, 51];
        let stat = |c: &[u64]| Ok(c[0] as f64 / c.iter().sum::<u64>().max(1) as f64);
        let a = bootstrap_values(&counts, 150, 4, stat).unwrap();
        let b = bootstrap_values(&counts, 150, 4, stat).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, bootstrap_values(&counts, 150, 5, stat).unwrap());
        assert!(bootstrap_values(&[0, 0], 150, 4, stat).is_err());
        assert!(bootstrap_values(&counts, 10, 4, stat).is_err());
    }

    #[test]
    fn vector_statistic_matches_scalar_runs() {
        let counts = [30, 12, 7, 51];
        let first = |c: &[u64]| Ok(c[0] as f64);
        let last = |c: &[u64]| Ok(c[3] as f64 / 2.0);
        let both = bootstrap_sigmas(&counts, 120, 8, |c| Ok(vec![first(c)?, last(c)?])).unwrap();
        assert_eq!(both[0], bootstrap_sigma(&counts, 120, 8, first).unwrap());
        assert_eq!(both[1], bootstrap_sigma(&counts, 120, 8, last).unwrap());
    }
}
