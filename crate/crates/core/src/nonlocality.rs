//! GHZ-argument analysis of four-setting correlation data.
//!
//! For the four-photon target state the four correlation settings are `XXXX`
//! (parity `+1`) and `XYYX`, `YXYX`, `YYXX` (parity `−1`). Two local-realist
//! comparisons are made: the Mermin-type operator
//! `S = E(XXXX) − E(XYYX) − E(YXYX) − E(YYXX)`, bounded by 2 for every local
//! model, and the counting bound, under which the predicted fraction at `XXXX`
//! can be at most the summed spurious fractions of the other three settings.
//! Both bounds are established here by exhaustive enumeration of deterministic
//! local strategies; convexity extends them to every mixture of strategies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factory::{rho_psi, Basis};
use crate::measurement::{
    expectation_from_counts, fraction_predicted, outcome_fractions, outcome_parity, outcome_probabilities,
    CountsTable, FractionStat, Setting, ValueSigma,
};
use crate::stabilizer::{ParadoxCertificate, Pauli};
use crate::state::DensityMatrix;

/// The four correlation settings, target setting first.
pub fn canonical_settings() -> [Setting; 4] {
    ["XXXX", "XYYX", "YXYX", "YYXX"].map(|s| s.parse().expect("valid setting"))
}

/// A GHZ test: correlation settings with the parities the target state predicts.
/// The first entry is the setting whose outcome local realism must contradict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzTest {
    pub entries: Vec<(Setting, i8)>,
}

impl GhzTest {
    /// Parities are the signs of the target's correlation expectations.
    pub fn from_state(target: &DensityMatrix, settings: &[Setting]) -> Result<Self> {
        let entries = settings
            .iter()
            .map(|s| {
                let e = target.expectation(&s.observable())?;
                if e.abs() < 1e-9 {
                    return Err(Error::InvalidParameter(format!("target has no correlation at {s}")));
                }
                Ok((s.clone(), if e > 0.0 { 1 } else { -1 }))
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.len() < 2 {
            return Err(Error::InvalidParameter("a GHZ test needs at least two settings".into()));
        }
        Ok(Self { entries })
    }

    /// The four-setting test derived from the four-photon mixed target.
    pub fn standard() -> Self {
        Self::from_state(&rho_psi(), &canonical_settings()).expect("target has perfect correlations")
    }

    pub fn settings(&self) -> impl Iterator<Item = &Setting> {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn parity(&self, s: &Setting) -> Result<i8> {
        self.entries
            .iter()
            .find(|(t, _)| t == s)
            .map(|(_, p)| *p)
            .ok_or_else(|| Error::UnknownSetting(s.to_string()))
    }

    /// Outcomes whose joint parity matches the predicted one.
    pub fn predicted_outcome_set(&self, s: &Setting) -> Result<Vec<usize>> {
        let parity = self.parity(s)?;
        Ok((0..1usize << s.n()).filter(|&k| outcome_parity(k) == parity).collect())
    }

    pub fn n(&self) -> usize {
        self.entries[0].0.n()
    }
}

/// `S = Σ parityₖ·Eₖ` over the test's settings, sigmas in quadrature.
pub fn weighted_s(test: &GhzTest, expectations: &[ValueSigma]) -> Result<ValueSigma> {
    if expectations.len() != test.entries.len() {
        return Err(Error::LengthMismatch {
            expected: test.entries.len(),
            actual: expectations.len(),
        });
    }
    let value = test
        .entries
        .iter()
        .zip(expectations)
        .map(|((_, p), e)| *p as f64 * e.value)
        .sum();
    let sigma = expectations.iter().map(|e| e.sigma * e.sigma).sum::<f64>().sqrt();
    Ok(ValueSigma::new(value, sigma))
}

/// `S = E(XXXX) − E(XYYX) − E(YXYX) − E(YYXX)`, inputs in that order.
pub fn mermin_s(expectations: &[ValueSigma; 4]) -> ValueSigma {
    let [a, b, c, d] = expectations;
    ValueSigma::new(
        a.value - b.value - c.value - d.value,
        (a.sigma.powi(2) + b.sigma.powi(2) + c.sigma.powi(2) + d.sigma.powi(2)).sqrt(),
    )
}

/// Deterministic local assignment of `±1` to `X`, `Y` and `Z` on each qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LrStrategy {
    pub x: [i8; 4],
    pub y: [i8; 4],
    pub z: [i8; 4],
}

impl LrStrategy {
    /// Strategy number `bits`: bit `q` sets `X_{q+1} = −1`, bit `4+q` sets `Y_{q+1} = −1`;
    /// every `Z` is `+1`.
    pub fn from_xy_bits(bits: u32) -> Self {
        let v = |b: u32| if bits & (1 << b) != 0 { -1 } else { 1 };
        Self {
            x: [v(0), v(1), v(2), v(3)],
            y: [v(4), v(5), v(6), v(7)],
            z: [1; 4],
        }
    }

    /// All 2^8 assignments of the `X` and `Y` values.
    pub fn all_xy() -> impl Iterator<Item = LrStrategy> {
        (0..256u32).map(Self::from_xy_bits)
    }

    pub fn value(&self, qubit: usize, basis: Basis) -> i8 {
        match basis {
            Basis::X => self.x[qubit - 1],
            Basis::Y => self.y[qubit - 1],
            Basis::Z => self.z[qubit - 1],
        }
    }

    /// Outcome index this strategy produces at `setting`.
    pub fn outcome(&self, setting: &Setting) -> usize {
        setting
            .bases()
            .iter()
            .enumerate()
            .fold(0, |k, (q, &b)| (k << 1) | usize::from(self.value(q + 1, b) < 0))
    }

    pub fn correlation(&self, setting: &Setting) -> i8 {
        outcome_parity(self.outcome(setting))
    }
}

fn check_four_qubits(test: &GhzTest) -> Result<()> {
    if test.n() != 4 || test.entries.iter().any(|(s, _)| s.n() != 4) {
        return Err(Error::InvalidParameter("local-strategy enumeration covers four qubits".into()));
    }
    Ok(())
}

/// `(max, min)` of the weighted `S` over all deterministic `X/Y` strategies.
pub fn lr_s_range(test: &GhzTest) -> Result<(f64, f64)> {
    check_four_qubits(test)?;
    let values: Vec<f64> = LrStrategy::all_xy()
        .map(|st| {
            test.entries
                .iter()
                .map(|(s, p)| (*p * st.correlation(s)) as f64)
                .sum()
        })
        .collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((max, min))
}

/// Largest `S` any local-realist model reaches for the standard test.
pub fn lr_enumerate_max_s() -> f64 {
    lr_s_range(&GhzTest::standard()).expect("four-qubit test").0
}

/// For every deterministic strategy: `[target outcome predicted] ≤ Σ [premise outcome spurious]`.
pub fn verify_counting_bound(test: &GhzTest) -> Result<bool> {
    check_four_qubits(test)?;
    let (target, premises) = test.entries.split_first().expect("nonempty test");
    Ok(LrStrategy::all_xy().all(|st| {
        let hit = i32::from(st.correlation(&target.0) == target.1);
        let spurious: i32 = premises
            .iter()
            .map(|(s, p)| i32::from(st.correlation(s) != *p))
            .sum();
        hit <= spurious
    }))
}

/// `Σ (1 − fᵢ)` over the premise settings, sigmas in quadrature.
pub fn lr_counting_bound(fractions: &[FractionStat]) -> ValueSigma {
    ValueSigma::new(
        fractions.iter().map(|f| 1.0 - f.value).sum(),
        fractions.iter().map(|f| f.sigma * f.sigma).sum::<f64>().sqrt(),
    )
}

/// `(observed − bound) / √(σ_obs² + σ_bound²)`.
pub fn significance(observed: ValueSigma, bound: ValueSigma) -> Result<f64> {
    let sigma = (observed.sigma.powi(2) + bound.sigma.powi(2)).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter("combined sigma must be positive".into()));
    }
    Ok((observed.value - bound.value) / sigma)
}

/// Enumerates every `±1` assignment to the observables the certificate uses and
/// confirms that each makes the product of all equations `+1` while the quantum
/// signs multiply to `−1`, so no assignment satisfies every equation.
pub fn paradox_lr_contradiction(cert: &ParadoxCertificate) -> Result<bool> {
    cert.validate()?;
    let mut vars: BTreeMap<(usize, Pauli), usize> = BTreeMap::new();
    for eq in &cert.equations {
        for (pos, &p) in eq.string.ops().iter().enumerate() {
            if !p.is_identity() {
                let next = vars.len();
                vars.entry((pos, p)).or_insert(next);
            }
        }
    }
    if vars.len() > 24 {
        return Err(Error::MalformedCertificate(format!(
            "{} local observables exceed the enumeration limit",
            vars.len()
        )));
    }
    let eq_vars: Vec<Vec<usize>> = cert
        .equations
        .iter()
        .map(|eq| {
            eq.string
                .ops()
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_identity())
                .map(|(pos, &p)| vars[&(pos, p)])
                .collect()
        })
        .collect();
    let signs = cert.signs();
    if signs.iter().product::<i8>() != -1 {
        return Ok(false);
    }
    for assignment in 0u32..(1 << vars.len()) {
        let values: Vec<i8> = eq_vars
            .iter()
            .map(|vs| {
                if vs.iter().filter(|&&v| assignment & (1 << v) != 0).count() % 2 == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        if values.iter().product::<i8>() != 1 || values == signs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingReport {
    pub setting: Setting,
    pub expected_parity: i8,
    pub fraction: FractionStat,
    pub expectation: ValueSigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlocalityReport {
    pub settings: Vec<SettingReport>,
    pub s: ValueSigma,
    pub lr_max_s: f64,
    /// Predicted fraction at the target setting.
    pub observed_fraction: ValueSigma,
    /// Summed spurious fractions at the premise settings.
    pub lr_bound_fraction: ValueSigma,
    /// `None` when both uncertainties vanish.
    pub counting_significance: Option<f64>,
    pub mermin_significance: Option<f64>,
    /// `S` above the local-realist maximum.
    pub violation: bool,
}

impl NonlocalityReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat `statistic,value,sigma` table.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["statistic", "value", "sigma"])?;
        for r in &self.settings {
            w.write_record([format!("fraction_{}", r.setting), r.fraction.value.to_string(), r.fraction.sigma.to_string()])?;
        }
        for r in &self.settings {
            w.write_record([
                format!("expectation_{}", r.setting),
                r.expectation.value.to_string(),
                r.expectation.sigma.to_string(),
            ])?;
        }
        w.write_record(["S".to_string(), self.s.value.to_string(), self.s.sigma.to_string()])?;
        w.write_record(["lr_max_S".to_string(), self.lr_max_s.to_string(), "0".to_string()])?;
        w.write_record([
            "lr_bound_fraction".to_string(),
            self.lr_bound_fraction.value.to_string(),
            self.lr_bound_fraction.sigma.to_string(),
        ])?;
        w.write_record([
            "observed_fraction".to_string(),
            self.observed_fraction.value.to_string(),
            self.observed_fraction.sigma.to_string(),
        ])?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        w.write_record(["counting_significance".to_string(), opt(self.counting_significance), "0".to_string()])?;
        w.write_record(["mermin_significance".to_string(), opt(self.mermin_significance), "0".to_string()])?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("utf-8"))
    }
}

/// Runs both local-realist comparisons on one counts table per test setting.
pub fn analyze(tables: &[CountsTable], test: &GhzTest) -> Result<NonlocalityReport> {
    let mut settings = Vec::new();
    for (s, parity) in &test.entries {
        let table = tables
            .iter()
            .find(|t| &t.setting == s)
            .ok_or_else(|| Error::DegenerateData(format!("missing counts for setting {s}")))?;
        settings.push(SettingReport {
            setting: s.clone(),
            expected_parity: *parity,
            fraction: fraction_predicted(table, *parity)?,
            expectation: expectation_from_counts(table)?,
        });
    }
    let expectations: Vec<ValueSigma> = settings.iter().map(|r| r.expectation).collect();
    let s = weighted_s(test, &expectations)?;
    let (lr_max_s, _) = lr_s_range(test)?;
    let observed_fraction = settings[0].fraction.as_value_sigma();
    let premise: Vec<FractionStat> = settings[1..].iter().map(|r| r.fraction).collect();
    let lr_bound_fraction = lr_counting_bound(&premise);
    let counting_significance = significance(observed_fraction, lr_bound_fraction).ok();
    let mermin_significance = significance(s, ValueSigma::new(lr_max_s, 0.0)).ok();
    Ok(NonlocalityReport {
        settings,
        violation: s.value > lr_max_s,
        s,
        lr_max_s,
        observed_fraction,
        lr_bound_fraction,
        counting_significance,
        mermin_significance,
    })
}

/// Infinite-statistics values computed straight from a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactAnalysis {
    pub fractions: Vec<f64>,
    pub expectations: Vec<f64>,
    pub s: f64,
    pub lr_bound_fraction: f64,
}

pub fn analyze_exact(rho: &DensityMatrix, test: &GhzTest) -> Result<ExactAnalysis> {
    let mut fractions = Vec::new();
    let mut expectations = Vec::new();
    for (s, parity) in &test.entries {
        let probs = outcome_probabilities(rho, s)?;
        let f: f64 = probs
            .iter()
            .enumerate()
            .filter(|(k, _)| outcome_parity(*k) == *parity)
            .map(|(_, p)| p)
            .sum();
        fractions.push(f);
        expectations.push(probs.iter().enumerate().map(|(k, p)| outcome_parity(k) as f64 * p).sum());
    }
    let s = test
        .entries
        .iter()
        .zip(&expectations)
        .map(|((_, p), e)| *p as f64 * e)
        .sum();
    let lr_bound_fraction = fractions[1..].iter().map(|f| 1.0 - f).sum();
    Ok(ExactAnalysis {
        fractions,
        expectations,
        s,
        lr_bound_fraction,
    })
}

/// Per-outcome fraction table: `setting,outcome,fraction,sigma,predicted`.
pub fn outcome_table_csv(tables: &[CountsTable], test: &GhzTest) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["setting", "outcome", "fraction", "sigma", "predicted"])?;
    for t in tables {
        let parity = test.parity(&t.setting)?;
        for (k, (label, f)) in outcome_fractions(t)?.into_iter().enumerate() {
            w.write_record([
                t.setting.to_string(),
                label,
                f.value.to_string(),
                f.sigma.to_string(),
                (outcome_parity(k) == parity).to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}
