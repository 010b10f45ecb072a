//! Polarization measurements: outcome distributions, Poissonian coincidence
//! counts and counting statistics.
//!
//! Outcome `k` of an `n`-qubit setting is a bit pattern with qubit 1 as the most
//! significant bit; bit `0` is the `+1` eigenvalue (`D`, `R`, `H`) and bit `1`
//! the `−1` eigenvalue (`A`, `L`, `V`).

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factory::{Basis, Polarization};
use crate::stabilizer::{PauliString, Phase};
use crate::state::{DensityMatrix, LocalUnitary, StateVector};

/// One measurement basis per qubit, e.g. `XYYX`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Setting(Vec<Basis>);

impl Setting {
    pub fn new(bases: Vec<Basis>) -> Self {
        Self(bases)
    }

    pub fn bases(&self) -> &[Basis] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// The correlation observable measured by this setting.
    pub fn observable(&self) -> PauliString {
        PauliString::new(Phase::PLUS_ONE, self.0.iter().map(|b| b.pauli()).collect())
    }

    /// Polarization labels of outcome `k`, e.g. `DLRD`.
    pub fn outcome_label(&self, k: usize) -> String {
        let n = self.n();
        self.0
            .iter()
            .enumerate()
            .map(|(q, b)| b.label(k & (1 << (n - 1 - q)) != 0).as_char())
            .collect()
    }

    /// Inverse of [`Setting::outcome_label`].
    pub fn parse_outcome(&self, label: &str) -> Result<usize> {
        let chars: Vec<char> = label.trim().chars().collect();
        if chars.len() != self.n() {
            return Err(Error::InvalidParameter(format!("outcome `{label}` does not match setting {self}")));
        }
        let mut k = 0;
        for (b, ch) in self.0.iter().zip(chars) {
            let p = Polarization::from_char(ch)
                .filter(|p| p.basis() == *b)
                .ok_or_else(|| Error::InvalidParameter(format!("outcome `{label}` does not match setting {self}")))?;
            k = (k << 1) | usize::from(p.eigenvalue() < 0);
        }
        Ok(k)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{}", b.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Setting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bases = s
            .trim()
            .chars()
            .map(|ch| Basis::from_char(ch).ok_or_else(|| Error::InvalidParameter(format!("bad setting `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        if bases.is_empty() {
            return Err(Error::InvalidParameter("empty setting".into()));
        }
        Ok(Setting(bases))
    }
}

impl Serialize for Setting {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Setting {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One polarization label per qubit, e.g. `VVVD`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectorString(Vec<Polarization>);

impl ProjectorString {
    pub fn new(labels: Vec<Polarization>) -> Self {
        Self(labels)
    }

    pub fn labels(&self) -> &[Polarization] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn ket(&self) -> StateVector {
        StateVector::product(&self.0.iter().map(|p| p.ket()).collect::<Vec<_>>()).expect("unit kets")
    }
}

impl fmt::Display for ProjectorString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for ProjectorString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .trim()
            .chars()
            .map(|ch| {
                Polarization::from_char(ch).ok_or_else(|| Error::InvalidParameter(format!("bad projector `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if labels.is_empty() {
            return Err(Error::InvalidParameter("empty projector".into()));
        }
        Ok(ProjectorString(labels))
    }
}

/// Provenance of simulated counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountsMeta {
    pub seed: Option<u64>,
    pub noise: Option<String>,
}

/// Event counts per outcome for one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsTable {
    pub setting: Setting,
    pub counts: Vec<u64>,
    pub duration_s: f64,
    #[serde(default)]
    pub meta: CountsMeta,
}

impl CountsTable {
    pub fn new(setting: Setting, counts: Vec<u64>, duration_s: f64) -> Result<Self> {
        if counts.len() != 1 << setting.n() {
            return Err(Error::LengthMismatch {
                expected: 1 << setting.n(),
                actual: counts.len(),
            });
        }
        Ok(Self {
            setting,
            counts,
            duration_s,
            meta: CountsMeta::default(),
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// A value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueSigma {
    pub value: f64,
    pub sigma: f64,
}

impl ValueSigma {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }
}

impl fmt::Display for ValueSigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.value, self.sigma)
    }
}

/// Binomial fraction estimate, `sigma = √(f(1−f)/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionStat {
    pub value: f64,
    pub sigma: f64,
    pub n_events: u64,
}

impl FractionStat {
    pub fn from_counts(hits: u64, n_events: u64) -> Result<Self> {
        if n_events == 0 {
            return Err(Error::DegenerateData("no events".into()));
        }
        let f = hits as f64 / n_events as f64;
        Ok(Self {
            value: f,
            sigma: (f * (1.0 - f) / n_events as f64).sqrt(),
            n_events,
        })
    }

    pub fn as_value_sigma(&self) -> ValueSigma {
        ValueSigma::new(self.value, self.sigma)
    }
}

/// `(−1)^popcount(k)`: product of the `±1` eigenvalues of outcome `k`.
pub fn outcome_parity(k: usize) -> i8 {
    if k.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Joint outcome probabilities for a product-basis setting.
pub fn outcome_probabilities(rho: &DensityMatrix, s: &Setting) -> Result<Vec<f64>> {
    if s.n() != rho.n() {
        return Err(Error::LengthMismatch {
            expected: rho.n(),
            actual: s.n(),
        });
    }
    let factors = s
        .bases()
        .iter()
        .map(|b| {
            let (plus, minus) = b.kets();
            LocalUnitary::basis_change(plus, minus)
        })
        .collect();
    let rotated = rho.apply_local(&LocalUnitary::new(factors)?)?;
    Ok((0..rho.dim()).map(|k| rotated.entry(k, k).re.max(0.0)).collect())
}

/// `⟨p|ρ|p⟩`.
pub fn projector_probability(rho: &DensityMatrix, p: &ProjectorString) -> Result<f64> {
    if p.n() != rho.n() {
        return Err(Error::LengthMismatch {
            expected: rho.n(),
            actual: p.n(),
        });
    }
    Ok(rho.overlap(&p.ket())?.clamp(0.0, 1.0))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for stream `index`: `seed XOR splitmix64(index)`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index)
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn poisson_draw(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

fn check_distribution(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidParameter("probabilities must be finite and nonnegative".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Independent Poisson count per outcome with mean `expected_total·pᵢ`.
pub fn sample_counts(
    setting: &Setting,
    probs: &[f64],
    expected_total: f64,
    duration_s: f64,
    seed: u64,
) -> Result<CountsTable> {
    if probs.len() != 1 << setting.n() {
        return Err(Error::LengthMismatch {
            expected: 1 << setting.n(),
            actual: probs.len(),
        });
    }
    check_distribution(probs)?;
    if !(expected_total > 0.0 && expected_total.is_finite()) {
        return Err(Error::InvalidParameter("expected_total must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let counts = probs.iter().map(|p| poisson_draw(&mut rng, expected_total * p)).collect();
    let mut table = CountsTable::new(setting.clone(), counts, duration_s)?;
    table.meta.seed = Some(seed);
    Ok(table)
}

/// Fraction of events whose outcome parity equals `expected_parity`.
pub fn fraction_predicted(t: &CountsTable, expected_parity: i8) -> Result<FractionStat> {
    let total = t.total();
    if total == 0 {
        return Err(Error::DegenerateData(format!("no events for setting {}", t.setting)));
    }
    let hits = t
        .counts
        .iter()
        .enumerate()
        .filter(|(k, _)| outcome_parity(*k) == expected_parity)
        .map(|(_, c)| c)
        .sum();
    FractionStat::from_counts(hits, total)
}

/// Parity-weighted mean `Σ parity·count / total`, with `sigma = 2·σ_fraction`.
pub fn expectation_from_counts(t: &CountsTable) -> Result<ValueSigma> {
    let f = fraction_predicted(t, 1)?;
    Ok(ValueSigma::new(2.0 * f.value - 1.0, 2.0 * f.sigma))
}

/// Per-outcome fractions with binomial sigmas: `(label, fraction)`.
pub fn outcome_fractions(t: &CountsTable) -> Result<Vec<(String, FractionStat)>> {
    let total = t.total();
    t.counts
        .iter()
        .enumerate()
        .map(|(k, &c)| Ok((t.setting.outcome_label(k), FractionStat::from_counts(c, total)?)))
        .collect()
}

pub const COUNTS_CSV_HEADER: [&str; 4] = ["setting", "outcome", "count", "duration_s"];

/// Counts CSV: `setting,outcome,count,duration_s`, one row per outcome.
pub fn write_counts_csv(tables: &[CountsTable]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COUNTS_CSV_HEADER)?;
    for t in tables {
        for (k, c) in t.counts.iter().enumerate() {
            w.write_record([
                t.setting.to_string(),
                t.setting.outcome_label(k),
                c.to_string(),
                t.duration_s.to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn format_err(line: u64, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

pub(crate) fn check_header(reader: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(format_err(1, format!("expected header `{}`, got `{}`", expected.join(","), got.join(","))));
    }
    Ok(())
}

/// Parses the counts CSV; tables come back in order of first appearance.
pub fn read_counts_csv(text: &str) -> Result<Vec<CountsTable>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    check_header(&mut reader, &COUNTS_CSV_HEADER)?;
    let mut tables: Vec<(CountsTable, Vec<bool>)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(format_err(line, "expected 4 fields"));
        }
        let setting: Setting = record[0].parse().map_err(|e: Error| format_err(line, e.to_string()))?;
        let outcome = setting
            .parse_outcome(&record[1])
            .map_err(|e| format_err(line, e.to_string()))?;
        let count: i64 = record[2]
            .parse()
            .map_err(|_| format_err(line, format!("count `{}` is not an integer", &record[2])))?;
        if count < 0 {
            return Err(format_err(line, format!("negative count {count}")));
        }
        let duration: f64 = record[3]
            .parse()
            .map_err(|_| format_err(line, format!("bad duration `{}`", &record[3])))?;
        let pos = match tables.iter().position(|(t, _)| t.setting == setting) {
            Some(pos) => pos,
            None => {
                let n = setting.n();
                tables.push((CountsTable::new(setting.clone(), vec![0; 1 << n], duration)?, vec![false; 1 << n]));
                tables.len() - 1
            }
        };
        let (table, seen) = &mut tables[pos];
        if seen[outcome] {
            return Err(format_err(line, format!("duplicate outcome {} for {}", &record[1], setting)));
        }
        if table.duration_s != duration {
            return Err(format_err(line, "inconsistent duration within a setting"));
        }
        seen[outcome] = true;
        table.counts[outcome] = count as u64;
    }
    for (t, seen) in &tables {
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(format_err(
                0,
                format!("setting {} is missing outcome {}", t.setting, t.setting.outcome_label(k)),
            ));
        }
    }
    Ok(tables.into_iter().map(|(t, _)| t).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::rho_psi;

    fn setting(s: &str) -> Setting {
        s.parse().unwrap()
    }

    #[test]
    fn ideal_correlation_distributions() {
        let rho = rho_psi();
        let p = outcome_probabilities(&rho, &setting("XXXX")).unwrap();
        for (k, v) in p.iter().enumerate() {
            let want = if outcome_parity(k) == 1 { 0.125 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "{k}");
        }
        let p = outcome_probabilities(&rho, &setting("YYXX")).unwrap();
        for (k, v) in p.iter().enumerate() {
            let want = if outcome_parity(k) == -1 { 0.125 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "{k}");
        }
        let flat = outcome_probabilities(&DensityMatrix::maximally_mixed(4), &setting("XYZX")).unwrap();
        assert!(flat.iter().all(|v| (v - 1.0 / 16.0).abs() < 1e-15));
        assert!(outcome_probabilities(&rho, &setting("XX")).is_err());
    }

    #[test]
    fn projector_probabilities() {
        let rho = rho_psi();
        let pr = |s: &str| projector_probability(&rho, &s.parse().unwrap()).unwrap();
        assert!((pr("VVVD") - 0.25).abs() < 1e-12);
        assert!((pr("VVVA") - 0.25).abs() < 1e-12);
        assert!(pr("HVVD").abs() < 1e-12);
        let total: f64 = (0..16)
            .map(|k| {
                let labels: String = (0..4).map(|q| if k & (8 >> q) != 0 { 'L' } else { 'R' }).collect();
                pr(&labels)
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outcome_labels() {
        let s = setting("XYYX");
        assert_eq!(s.outcome_label(0), "DRRD");
        let k = s.parse_outcome("DLRD").unwrap();
        assert_eq!(s.outcome_label(k), "DLRD");
        assert_eq!(outcome_parity(k), -1);
        assert!(s.parse_outcome("HLRD").is_err());
        assert!(s.parse_outcome("DLR").is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        let s = setting("XXXX");
        let mut probs = vec![0.0; 16];
        probs[0] = 1.0;
        let t = sample_counts(&s, &probs, 100.0, 60.0, 7).unwrap();
        assert!(t.counts[1..].iter().all(|&c| c == 0));
        assert!(t.counts[0] > 50 && t.counts[0] < 150);
        assert_eq!(t, sample_counts(&s, &probs, 100.0, 60.0, 7).unwrap());
        assert!(sample_counts(&s, &[0.5; 16], 100.0, 60.0, 7).is_err());
        assert!(sample_counts(&s, &probs, 0.0, 60.0, 7).is_err());
    }

    #[test]
    fn uniform_counts_within_poisson_band() {
        let s = setting("ZZZZ");
        let probs = vec![1.0 / 16.0; 16];
        for seed in 0..50 {
            let t = sample_counts(&s, &probs, 1600.0, 60.0, seed).unwrap();
            assert!(t.counts.iter().all(|&c| (c as f64 - 100.0).abs() < 5.0 * 10.0));
        }
    }

    #[test]
    fn fraction_and_expectation() {
        let s = setting("XYYX");
        let mut counts = vec![0u64; 16];
        for (k, c) in counts.iter_mut().enumerate() {
            if outcome_parity(k) == -1 {
                *c = 10;
            }
        }
        let t = CountsTable::new(s, counts, 60.0).unwrap();
        let f = fraction_predicted(&t, -1).unwrap();
        assert_eq!(f.value, 1.0);
        assert_eq!(f.sigma, 0.0);
        assert_eq!(expectation_from_counts(&t).unwrap().value, -1.0);

        let empty = CountsTable::new(setting("XX"), vec![0; 4], 1.0).unwrap();
        assert!(fraction_predicted(&empty, 1).is_err());
        assert!(expectation_from_counts(&empty).is_err());
    }

    #[test]
    fn fraction_sigma_is_binomial() {
        let f = FractionStat::from_counts(1544, 1900).unwrap();
        let want = (f.value * (1.0 - f.value) / 1900.0).sqrt();
        assert!((f.sigma - want).abs() < 1e-15);
        assert!((f.sigma - 0.009).abs() < 0.0005);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let a = CountsTable::new(setting("XX"), vec![5, 0, 1, 7], 60.0).unwrap();
        let b = CountsTable::new(setting("YX"), vec![1, 2, 3, 4], 60.0).unwrap();
        let text = write_counts_csv(&[a.clone(), b.clone()]).unwrap();
        assert!(text.starts_with("setting,outcome,count,duration_s\n"));
        let back = read_counts_csv(&text).unwrap();
        assert_eq!(back, vec![a, b]);

        let bad = text.replace("XX,DA,0,60", "XX,DA,-3,60");
        match read_counts_csv(&bad) {
            Err(Error::Format { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("negative"));
            }
            other => panic!("{other:?}"),
        }
        let missing: String = text.lines().filter(|l| !l.starts_with("YX,LA")).map(|l| format!("{l}\n")).collect();
        assert!(read_counts_csv(&missing).is_err());
        assert!(read_counts_csv("a,b,c,d\n").is_err());
    }

    #[test]
    fn split_seed_is_distinct_per_stream() {
        let seeds: Vec<u64> = (0..100).map(|k| split_seed(42, k)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
    }
}
