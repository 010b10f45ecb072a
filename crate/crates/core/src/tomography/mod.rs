//! Density-matrix reconstruction from the `4^n` projector counts over `{H, V, D, R}`.

mod bootstrap;
mod mle;

use nalgebra::DMatrix;

pub use bootstrap::{bootstrap_sigma, bootstrap_sigmas, bootstrap_values, NamedStatistic, DEFAULT_BOOTSTRAP_REPLICAS};
pub use mle::{
    log_likelihood, mle_reconstruct, mle_reconstruct_from, MleOptions, MleResult, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

use crate::error::{Error, Result};
use crate::factory::{ghz3, Polarization};
use crate::measurement::{check_header, format_err, poisson_draw, projector_probability, rng_from_seed, ProjectorString};
use crate::state::{c, check_qubit, check_size, qubit_mask, DensityMatrix, C64, DEFAULT_MAX_QUBITS};

/// Per-qubit tomography alphabet, in canonical order.
pub const TOMOGRAPHY_ALPHABET: [Polarization; 4] = [Polarization::H, Polarization::V, Polarization::D, Polarization::R];

/// All `4^n` projector strings, qubit 1 varying slowest.
pub fn tomography_settings(n: usize) -> Result<Vec<ProjectorString>> {
    if n == 0 {
        return Err(Error::InvalidParameter("tomography needs at least one qubit".into()));
    }
    check_size(n, DEFAULT_MAX_QUBITS / 2)?;
    Ok((0..1usize << (2 * n))
        .map(|idx| {
            ProjectorString::new(
                (0..n)
                    .map(|q| TOMOGRAPHY_ALPHABET[(idx >> (2 * (n - 1 - q))) & 3])
                    .collect(),
            )
        })
        .collect())
}

fn canonical_index(p: &ProjectorString) -> Option<usize> {
    p.labels().iter().try_fold(0usize, |acc, l| {
        TOMOGRAPHY_ALPHABET.iter().position(|a| a == l).map(|k| (acc << 2) | k)
    })
}

/// Counts for every projector of the canonical set.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographySet {
    n: usize,
    projectors: Vec<ProjectorString>,
    counts: Vec<u64>,
    pub duration_s: f64,
}

impl TomographySet {
    pub fn new(n: usize, counts: Vec<u64>, duration_s: f64) -> Result<Self> {
        let projectors = tomography_settings(n)?;
        if counts.len() != projectors.len() {
            return Err(Error::LengthMismatch {
                expected: projectors.len(),
                actual: counts.len(),
            });
        }
        Ok(Self {
            n,
            projectors,
            counts,
            duration_s,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn projectors(&self) -> &[ProjectorString] {
        &self.projectors
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn with_counts(&self, counts: Vec<u64>) -> Result<Self> {
        Self::new(self.n, counts, self.duration_s)
    }

    pub fn count(&self, p: &ProjectorString) -> Option<u64> {
        if p.n() != self.n {
            return None;
        }
        canonical_index(p).map(|k| self.counts[k])
    }

    /// Projector CSV: `projector,count,duration_s`, canonical order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(PROJECTOR_CSV_HEADER)?;
        for (p, count) in self.projectors.iter().zip(&self.counts) {
            w.write_record([p.to_string(), count.to_string(), self.duration_s.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("utf-8"))
    }

    /// Rows may come in any order; every projector must appear exactly once.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        check_header(&mut reader, &PROJECTOR_CSV_HEADER)?;
        let mut rows: Vec<(u64, usize, u64, f64)> = Vec::new();
        let mut n = None;
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 3 {
                return Err(format_err(line, "expected 3 fields"));
            }
            let p: ProjectorString = record[0].parse().map_err(|e: Error| format_err(line, e.to_string()))?;
            if *n.get_or_insert(p.n()) != p.n() {
                return Err(format_err(line, format!("projector `{p}` has the wrong length")));
            }
            let idx = canonical_index(&p)
                .ok_or_else(|| format_err(line, format!("projector `{p}` is outside the H/V/D/R alphabet")))?;
            let count: i64 = record[1]
                .parse()
                .map_err(|_| format_err(line, format!("count `{}` is not an integer", &record[1])))?;
            if count < 0 {
                return Err(format_err(line, format!("negative count {count}")));
            }
            let duration: f64 = record[2]
                .parse()
                .map_err(|_| format_err(line, format!("bad duration `{}`", &record[2])))?;
            rows.push((line, idx, count as u64, duration));
        }
        let n = n.ok_or_else(|| format_err(1, "no projector rows"))?;
        check_size(n, DEFAULT_MAX_QUBITS / 2).map_err(|e| format_err(2, e.to_string()))?;
        let mut counts = vec![None; 1 << (2 * n)];
        let duration = rows[0].3;
        for &(line, idx, count, d) in &rows {
            if d != duration {
                return Err(format_err(line, "inconsistent duration"));
            }
            if counts[idx].replace(count).is_some() {
                return Err(format_err(line, "duplicate projector"));
            }
        }
        let projectors = tomography_settings(n)?;
        let counts = counts
            .into_iter()
            .zip(&projectors)
            .map(|(c, p)| c.ok_or_else(|| format_err(0, format!("missing projector {p}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, counts, duration)
    }
}

pub const PROJECTOR_CSV_HEADER: [&str; 3] = ["projector", "count", "duration_s"];

/// `⟨pᵢ|ρ|pᵢ⟩` for every canonical projector.
pub fn projector_probabilities(rho: &DensityMatrix) -> Result<Vec<f64>> {
    tomography_settings(rho.n())?
        .iter()
        .map(|p| projector_probability(rho, p))
        .collect()
}

/// Poisson counts with mean `rate·duration·⟨pᵢ|ρ|pᵢ⟩`, drawn in canonical order.
pub fn simulate_tomography(rho: &DensityMatrix, rate: f64, duration_s: f64, seed: u64) -> Result<TomographySet> {
    if !(rate > 0.0 && rate.is_finite()) || !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::InvalidParameter("rate and duration must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let counts = projector_probabilities(rho)?
        .into_iter()
        .map(|p| poisson_draw(&mut rng, rate * duration_s * p))
        .collect();
    TomographySet::new(rho.n(), counts, duration_s)
}

/// Expected counts `rate·duration·⟨pᵢ|ρ|pᵢ⟩`, unrounded.
pub fn expected_counts(rho: &DensityMatrix, rate: f64, duration_s: f64) -> Result<Vec<f64>> {
    Ok(projector_probabilities(rho)?
        .into_iter()
        .map(|p| rate * duration_s * p)
        .collect())
}

/// Dual operator of each alphabet projector: `Σ_a ⟨a|ρ|a⟩ M_a = ρ` for one qubit.
fn dual_operator(p: Polarization) -> [[C64; 2]; 2] {
    let h = 0.5;
    match p {
        // (I + Z − X − Y)/2
        Polarization::H => [[c(1.0, 0.0), c(-h, h)], [c(-h, -h), c(0.0, 0.0)]],
        // (I − Z − X − Y)/2
        Polarization::V => [[c(0.0, 0.0), c(-h, h)], [c(-h, -h), c(1.0, 0.0)]],
        Polarization::D => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        Polarization::R => [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        _ => unreachable!("not a tomography projector"),
    }
}

/// Linear-inversion estimate; Hermitian with unit trace but not necessarily PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEstimate {
    pub n: usize,
    pub matrix: DMatrix<C64>,
}

impl LinearEstimate {
    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::state::hermitian_eigh(&self.matrix).0
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.eigenvalues().last().is_none_or(|&v| v >= -tol)
    }

    /// Negative eigenvalues clamped to zero, trace renormalized.
    pub fn project_to_psd(&self) -> Result<DensityMatrix> {
        let (values, vectors) = crate::state::hermitian_eigh(&self.matrix);
        let clamped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateData("estimate has no positive eigenvalue".into()));
        }
        let mut scaled = vectors.clone();
        for (k, v) in clamped.iter().enumerate() {
            scaled.column_mut(k).scale_mut(v / total);
        }
        let mat = &scaled * vectors.adjoint();
        let mat = (&mat + mat.adjoint()) * c(0.5, 0.0);
        DensityMatrix::new(self.n, mat)
    }
}

/// Solves the linear projector-to-Pauli system in closed form through the dual operators.
pub fn linear_inversion(t: &TomographySet) -> Result<LinearEstimate> {
    linear_inversion_weighted(t.n, t.counts.iter().map(|&c| c as f64))
}

pub(crate) fn linear_inversion_weighted(n: usize, counts: impl Iterator<Item = f64>) -> Result<LinearEstimate> {
    let dim = 1usize << n;
    let projectors = tomography_settings(n)?;
    let mut mat = DMatrix::<C64>::zeros(dim, dim);
    let mut trace = 0.0;
    for (p, count) in projectors.iter().zip(counts) {
        if count == 0.0 {
            continue;
        }
        let duals: Vec<[[C64; 2]; 2]> = p.labels().iter().map(|&l| dual_operator(l)).collect();
        if p.labels().iter().all(|l| matches!(l, Polarization::H | Polarization::V)) {
            trace += count;
        }
        for r in 0..dim {
            for col in 0..dim {
                let mut v = c(count, 0.0);
                for (q, d) in duals.iter().enumerate() {
                    let m = qubit_mask(n, q + 1);
                    v *= d[usize::from(r & m != 0)][usize::from(col & m != 0)];
                    if v == c(0.0, 0.0) {
                        break;
                    }
                }
                mat[(r, col)] += v;
            }
        }
    }
    if trace <= 0.0 {
        return Err(Error::DegenerateData("no counts in the H/V projectors".into()));
    }
    mat /= c(trace, 0.0);
    let mat = (&mat + mat.adjoint()) * c(0.5, 0.0);
    Ok(LinearEstimate { n, matrix: mat })
}

/// Projects qubit `q` onto `k`, traces it out and renormalizes: `(ρ', probability)`.
pub fn conditional_state(rho: &DensityMatrix, q: usize, k: Polarization) -> Result<(DensityMatrix, f64)> {
    let n = rho.n();
    check_qubit(n, q)?;
    if n < 2 {
        return Err(Error::InvalidParameter("conditioning needs at least two qubits".into()));
    }
    let ket = k.ket();
    let mask = qubit_mask(n, q);
    let low = mask - 1;
    let insert = |r: usize, bit: usize| ((r & !low) << 1) | (bit * mask) | (r & low);
    let dim = 1usize << (n - 1);
    let m = DMatrix::from_fn(dim, dim, |r, col| {
        let mut v = c(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                v += ket[a].conj() * ket[b] * rho.entry(insert(r, a), insert(col, b));
            }
        }
        v
    });
    let prob = m.trace().re;
    if prob <= 1e-12 {
        return Err(Error::InvalidParameter(format!("branch {k} on qubit {q} has zero probability")));
    }
    let m = m / c(prob, 0.0);
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    Ok((DensityMatrix::new(n - 1, m)?, prob))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WitnessResult {
    pub value: f64,
    pub sigma: f64,
    /// `+1` for `GHZ+`, `−1` for `GHZ−`.
    pub target: i8,
}

impl WitnessResult {
    pub fn target_label(&self) -> &'static str {
        if self.target > 0 {
            "GHZ+"
        } else {
            "GHZ-"
        }
    }
}

/// `W = ½ − |GHZ±⟩⟨GHZ±|` evaluated on a three-qubit state; `sigma` is left at zero.
pub fn ghz_witness(rho3: &DensityMatrix, sign: i8) -> Result<WitnessResult> {
    if rho3.n() != 3 {
        return Err(Error::LengthMismatch {
            expected: 3,
            actual: rho3.n(),
        });
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidParameter("witness sign must be ±1".into()));
    }
    Ok(WitnessResult {
        value: 0.5 - rho3.overlap(&ghz3(sign))?,
        sigma: 0.0,
        target: sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::{rho_psi, NoiseSpec};
    use crate::state::StateVector;

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    /// Expected counts rounded to integers at a large scale.
    fn scaled_counts(rho: &DensityMatrix, scale: f64) -> TomographySet {
        let counts = expected_counts(rho, scale, 1.0)
            .unwrap()
            .iter()
            .map(|m| m.round() as u64)
            .collect();
        TomographySet::new(rho.n(), counts, 1.0).unwrap()
    }

    #[test]
    fn settings_order() {
        let s1: Vec<String> = tomography_settings(1).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(s1, ["H", "V", "D", "R"]);
        let s2 = tomography_settings(2).unwrap();
        assert_eq!(s2.len(), 16);
        assert_eq!(s2[0].to_string(), "HH");
        assert_eq!(s2[1].to_string(), "HV");
        assert_eq!(s2[15].to_string(), "RR");
        assert_eq!(tomography_settings(4).unwrap().len(), 256);
        assert!(tomography_settings(0).is_err());
        assert!(tomography_settings(7).is_err());
    }

    #[test]
    fn simulated_means() {
        let rho = rho_psi();
        let hvvd = "HVVD".parse().unwrap();
        let vvvd = "VVVD".parse().unwrap();
        assert!(projector_probability(&rho, &hvvd).unwrap().abs() < 1e-15);
        assert!((projector_probability(&rho, &vvvd).unwrap() - 0.25).abs() < 1e-15);
        let t = simulate_tomography(&rho, 8.0, 60.0, 3).unwrap();
        assert_eq!(t.count(&hvvd), Some(0));
        assert_eq!(t, simulate_tomography(&rho, 8.0, 60.0, 3).unwrap());
        assert_ne!(t, simulate_tomography(&rho, 8.0, 60.0, 4).unwrap());
        let mean: f64 = (0..400)
            .map(|s| simulate_tomography(&rho, 8.0, 60.0, s).unwrap().count(&vvvd).unwrap() as f64)
            .sum::<f64>()
            / 400.0;
        assert!((mean - 120.0).abs() < 3.0, "{mean}");
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let t = simulate_tomography(&rho_psi(), 5.0, 60.0, 1).unwrap();
        let text = t.to_csv().unwrap();
        assert_eq!(TomographySet::from_csv(&text).unwrap(), t);
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1..].reverse();
        assert_eq!(TomographySet::from_csv(&lines.join("\n")).unwrap(), t);
        let missing: Vec<&str> = text.lines().take(200).collect();
        assert!(TomographySet::from_csv(&missing.join("\n")).is_err());
        let negative = text.replacen(",60\n", ",60\nHHHH,-1,60\n", 1);
        match TomographySet::from_csv(&negative) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let alien = text.replace("HHHH,", "AHHH,");
        assert!(matches!(TomographySet::from_csv(&alien), Err(Error::Format { .. })));
    }

    #[test]
    fn inversion_of_expected_counts() {
        for rho in [rho_psi(), DensityMatrix::maximally_mixed(4)] {
            let counts: Vec<f64> = expected_counts(&rho, 1000.0, 1.0).unwrap();
            let est = linear_inversion_weighted(4, counts.into_iter()).unwrap();
            assert!(close(&est.matrix, rho.matrix(), 1e-9));
        }
        let single = DensityMatrix::from_pure(&StateVector::product(&[[c(0.6, 0.0), c(0.0, 0.8)]]).unwrap());
        let est = linear_inversion_weighted(1, expected_counts(&single, 1.0, 1.0).unwrap().into_iter()).unwrap();
        assert!(close(&est.matrix, single.matrix(), 1e-12));
    }

    #[test]
    fn finite_counts_can_be_unphysical() {
        let t = simulate_tomography(&rho_psi(), 2.0, 60.0, 7).unwrap();
        let est = linear_inversion(&t).unwrap();
        assert!((est.matrix.trace().re - 1.0).abs() < 1e-12);
        assert!(!est.is_physical(1e-9));
        let rho = est.project_to_psd().unwrap();
        assert!(rho.min_eigenvalue() >= -1e-12);
        let empty = TomographySet::new(4, vec![0; 256], 60.0).unwrap();
        assert!(linear_inversion(&empty).is_err());
    }

    #[test]
    fn conditional_branches() {
        let rho = rho_psi();
        let (d, pd) = conditional_state(&rho, 4, Polarization::D).unwrap();
        let (a, pa) = conditional_state(&rho, 4, Polarization::A).unwrap();
        assert!((pd - 0.5).abs() < 1e-12 && (pa - 0.5).abs() < 1e-12);
        assert!(close(d.matrix(), DensityMatrix::from_pure(&ghz3(1)).matrix(), 1e-12));
        assert!(close(a.matrix(), DensityMatrix::from_pure(&ghz3(-1)).matrix(), 1e-12));

        let p = 0.625;
        let noisy = rho.white_noise(p).unwrap();
        let (d, pd) = conditional_state(&noisy, 4, Polarization::D).unwrap();
        let expected = DensityMatrix::mixture(&[
            (p, &DensityMatrix::from_pure(&ghz3(1))),
            (1.0 - p, &DensityMatrix::maximally_mixed(3)),
        ])
        .unwrap();
        assert!((pd - 0.5).abs() < 1e-12);
        assert!(close(d.matrix(), expected.matrix(), 1e-12));
        let (_, ph) = conditional_state(&noisy, 2, Polarization::H).unwrap();
        let (_, pv) = conditional_state(&noisy, 2, Polarization::V).unwrap();
        assert!((ph + pv - 1.0).abs() < 1e-12);

        let ghz = DensityMatrix::from_pure(&crate::factory::ghz4());
        assert!(conditional_state(&rho, 5, Polarization::D).is_err());
        let hh = DensityMatrix::from_pure(&StateVector::basis(2, 0).unwrap());
        assert!(conditional_state(&hh, 1, Polarization::V).is_err());
        assert!(conditional_state(&ghz, 1, Polarization::H).is_ok());
    }

    #[test]
    fn witness_values() {
        let ideal = DensityMatrix::from_pure(&ghz3(1));
        assert!((ghz_witness(&ideal, 1).unwrap().value + 0.5).abs() < 1e-15);
        assert!((ghz_witness(&ideal, -1).unwrap().value - 0.5).abs() < 1e-15);
        let stages = crate::factory::generation_pipeline(&NoiseSpec::calibrated()).unwrap();
        for (k, sign) in [(Polarization::D, 1), (Polarization::A, -1)] {
            let (branch, _) = conditional_state(&stages.output, 4, k).unwrap();
            let w = ghz_witness(&branch, sign).unwrap();
            assert!((w.value + 0.171875).abs() < 1e-12, "{}", w.value);
        }
        assert!(ghz_witness(&rho_psi(), 1).is_err());
        assert!(ghz_witness(&ideal, 0).is_err());
    }

    #[test]
    fn high_count_inversion_is_close() {
        let t = scaled_counts(&rho_psi(), 1e7);
        let est = linear_inversion(&t).unwrap();
        assert!(close(&est.matrix, rho_psi().matrix(), 1e-5));
    }
}
