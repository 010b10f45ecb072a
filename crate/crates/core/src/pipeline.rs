//! End-to-end runs: paradox derivation, state generation, simulated
//! correlation and tomography measurements, reconstruction and analysis.
//!
//! Each stage draws from its own stream seed derived from the run seed, and
//! every artifact is written without timestamps, so a fixed config reproduces
//! byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{MleConfig, RunConfig};
use crate::error::{Error, Result};
use crate::factory::{generation_pipeline, rho_psi, PipelineStages, Polarization};
use crate::measurement::{outcome_probabilities, sample_counts, split_seed, write_counts_csv, CountsTable, ValueSigma};
use crate::nonlocality::{analyze, outcome_table_csv, paradox_lr_contradiction, GhzTest, NonlocalityReport};
use crate::stabilizer::{derive_ghz_paradox, verify_certificate, GraphSpec, ParadoxCertificate};
use crate::state::DensityMatrix;
use crate::tomography::{
    ghz_witness, conditional_state, mle_reconstruct_from, simulate_tomography, MleOptions, MleResult, NamedStatistic,
    TomographySet, WitnessResult,
};

/// Independent random streams of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSeeds {
    pub correlation: u64,
    pub tomography: u64,
    pub bootstrap: u64,
}

impl StreamSeeds {
    pub fn from_run_seed(seed: u64) -> Self {
        Self {
            correlation: split_seed(seed, 1),
            tomography: split_seed(seed, 2),
            bootstrap: split_seed(seed, 3),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeriveOutput {
    pub graph: GraphSpec,
    pub certificate: ParadoxCertificate,
    pub transcript: String,
}

pub fn derive(graph: &GraphSpec, support: &[usize], max_product_size: usize) -> Result<DeriveOutput> {
    let certificate = derive_ghz_paradox(graph, support, max_product_size)?.ok_or_else(|| Error::NoParadox {
        support: support.to_vec(),
    })?;
    if !verify_certificate(&certificate, graph)? || !paradox_lr_contradiction(&certificate)? {
        return Err(Error::MalformedCertificate("derived certificate failed verification".into()));
    }
    let transcript = certificate.transcript(graph);
    Ok(DeriveOutput {
        graph: graph.clone(),
        certificate,
        transcript,
    })
}

/// One Poisson-sampled table per test setting, stream `k` for setting `k`.
pub fn simulate_correlations(
    rho: &DensityMatrix,
    test: &GhzTest,
    events_per_setting: f64,
    duration_s: f64,
    seed: u64,
) -> Result<Vec<CountsTable>> {
    test.settings()
        .enumerate()
        .map(|(k, s)| {
            let probs = outcome_probabilities(rho, s)?;
            sample_counts(s, &probs, events_per_setting, duration_s, split_seed(seed, k as u64))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchResult {
    pub branch: Polarization,
    pub probability: f64,
    pub fidelity: ValueSigma,
    pub witness: WitnessResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct TomographyAnalysis {
    pub mle: MleResult,
    pub fidelity: ValueSigma,
    pub branches: Vec<BranchResult>,
    pub bootstrap_replicas: usize,
}

/// MLE reconstruction, fidelity with `target`, and GHZ witnesses on the `D`/`A`
/// branches of qubit 4, all with bootstrap sigmas.
pub fn analyze_tomography(
    set: &TomographySet,
    target: &DensityMatrix,
    mle: &MleConfig,
    replicas: usize,
    seed: u64,
) -> Result<TomographyAnalysis> {
    if set.n() != 4 {
        return Err(Error::LengthMismatch {
            expected: 4,
            actual: set.n(),
        });
    }
    let opts = MleOptions {
        tol: mle.tol,
        max_iter: mle.max_iter,
        start: None,
    };
    let counts: Vec<f64> = set.counts().iter().map(|&c| c as f64).collect();
    let result = mle_reconstruct_from(set.n(), &counts, &opts)?;
    let branches = [(Polarization::D, 1i8), (Polarization::A, -1i8)];
    let mut stats = vec![NamedStatistic::Fidelity {
        target: Box::new(target.clone()),
    }];
    stats.extend(branches.iter().map(|&(branch, sign)| NamedStatistic::Witness { qubit: 4, branch, sign }));
    let sigmas = NamedStatistic::bootstrap_tomography_all(&stats, set, &result.rho, &opts, replicas, seed)?;

    let fidelity = ValueSigma::new(result.rho.fidelity(target)?, sigmas[0]);
    let branches = branches
        .iter()
        .zip(&sigmas[1..])
        .map(|(&(branch, sign), &sigma)| {
            let (rho3, probability) = conditional_state(&result.rho, 4, branch)?;
            let mut witness = ghz_witness(&rho3, sign)?;
            witness.sigma = sigma;
            Ok(BranchResult {
                branch,
                probability,
                fidelity: ValueSigma::new(0.5 - witness.value, sigma),
                witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TomographyAnalysis {
        mle: result,
        fidelity,
        branches,
        bootstrap_replicas: replicas,
    })
}

/// A simulated quantity next to its reference value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub quantity: String,
    pub value: f64,
    pub sigma: f64,
    pub reference: f64,
    pub reference_sigma: Option<f64>,
}

impl SummaryRow {
    fn new(quantity: impl Into<String>, v: ValueSigma, reference: f64, reference_sigma: Option<f64>) -> Self {
        Self {
            quantity: quantity.into(),
            value: v.value,
            sigma: v.sigma,
            reference,
            reference_sigma,
        }
    }
}

/// Rows for the four-photon experiment; reference values are experimental measurements.
pub fn summary_rows(report: &NonlocalityReport, tomo: &TomographyAnalysis) -> Vec<SummaryRow> {
    const FRACTIONS: [f64; 4] = [0.81, 0.822, 0.798, 0.812];
    const EXPECTATIONS: [(f64, f64); 4] = [(0.626, 0.019), (-0.646, 0.018), (-0.595, 0.018), (-0.628, 0.019)];
    const BRANCH_FIDELITY: [f64; 2] = [0.74, 0.72];
    const WITNESS: [f64; 2] = [-0.24, -0.22];
    let mut rows = vec![SummaryRow::new("fidelity", tomo.fidelity, 0.68, Some(0.02))];
    for (k, b) in tomo.branches.iter().enumerate() {
        let label = b.witness.target_label();
        rows.push(SummaryRow::new(
            format!("branch_fidelity_{}_{}", b.branch, label),
            b.fidelity,
            BRANCH_FIDELITY[k],
            Some(0.01),
        ));
        rows.push(SummaryRow::new(
            format!("witness_{}_{}", b.branch, label),
            ValueSigma::new(b.witness.value, b.witness.sigma),
            WITNESS[k],
            Some(0.01),
        ));
    }
    for (k, r) in report.settings.iter().enumerate() {
        rows.push(SummaryRow::new(
            format!("fraction_{}", r.setting),
            r.fraction.as_value_sigma(),
            FRACTIONS[k],
            Some(0.009),
        ));
    }
    for (k, r) in report.settings.iter().enumerate() {
        rows.push(SummaryRow::new(
            format!("expectation_{}", r.setting),
            r.expectation,
            EXPECTATIONS[k].0,
            Some(EXPECTATIONS[k].1),
        ));
    }
    rows.push(SummaryRow::new("S", report.s, 2.50, Some(0.04)));
    rows.push(SummaryRow::new("lr_bound_fraction", report.lr_bound_fraction, 0.57, Some(0.016)));
    rows.push(SummaryRow::new("observed_fraction", report.observed_fraction, 0.81, Some(0.009)));
    let sig = |v: Option<f64>| ValueSigma::new(v.unwrap_or(f64::NAN), 0.0);
    rows.push(SummaryRow::new("counting_significance", sig(report.counting_significance), 12.0, None));
    rows.push(SummaryRow::new("mermin_significance", sig(report.mermin_significance), 12.0, None));
    rows
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "value", "sigma", "reference", "reference_sigma"])?;
    for r in rows {
        w.write_record([
            r.quantity.clone(),
            r.value.to_string(),
            r.sigma.to_string(),
            r.reference.to_string(),
            r.reference_sigma.map_or_else(String::new, |s| s.to_string()),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

pub fn summary_text(rows: &[SummaryRow], report: &NonlocalityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<26} {:>20}   {:>16}", "quantity", "simulated", "reference");
    for r in rows {
        let reference = match r.reference_sigma {
            Some(s) => format!("{:.3} ± {:.3}", r.reference, s),
            None => format!("~{:.0}", r.reference),
        };
        let _ = writeln!(
            out,
            "{:<26} {:>10.4} ± {:<7.4}   {:>16}",
            r.quantity, r.value, r.sigma, reference
        );
    }
    let verdict = if report.violation {
        "violated"
    } else {
        "no violation"
    };
    let _ = writeln!(out, "local-realist bound S <= {}: {verdict}", report.lr_max_s);
    out
}

#[derive(Debug, Clone)]
pub struct ReproduceBundle {
    pub config: RunConfig,
    pub derive: DeriveOutput,
    pub stages: PipelineStages,
    pub correlations: Vec<CountsTable>,
    pub tomography: TomographySet,
    pub tomo: TomographyAnalysis,
    pub report: NonlocalityReport,
    pub summary: Vec<SummaryRow>,
}

pub fn reproduce(cfg: &RunConfig) -> Result<ReproduceBundle> {
    cfg.validate()?;
    let seeds = StreamSeeds::from_run_seed(cfg.seed);
    let graph = cfg.graph.build().map_err(|e| e.in_stage("derive"))?;
    let derive = derive(&graph, &cfg.support, cfg.max_product_size).map_err(|e| e.in_stage("derive"))?;
    let stages = generation_pipeline(&cfg.noise).map_err(|e| e.in_stage("state"))?;
    let test = GhzTest::standard();
    let c = &cfg.counting;
    let correlations = simulate_correlations(&stages.output, &test, c.events_per_setting, c.duration_s, seeds.correlation)
        .map_err(|e| e.in_stage("simulate"))?
        .into_iter()
        .map(|mut t| {
            t.meta.noise = Some(format!("white p={}", cfg.noise.white_noise_p));
            t
        })
        .collect::<Vec<_>>();
    let tomography = simulate_tomography(&stages.output, c.tomography_rate, c.duration_s, seeds.tomography)
        .map_err(|e| e.in_stage("simulate"))?;
    let tomo = analyze_tomography(&tomography, &rho_psi(), &cfg.mle, cfg.bootstrap_replicas, seeds.bootstrap)
        .map_err(|e| e.in_stage("tomo"))?;
    let report = analyze(&correlations, &test).map_err(|e| e.in_stage("analyze"))?;
    let summary = summary_rows(&report, &tomo);
    Ok(ReproduceBundle {
        config: cfg.clone(),
        derive,
        stages,
        correlations,
        tomography,
        tomo,
        report,
        summary,
    })
}

fn write_file(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    written.push(path);
    Ok(())
}

pub fn write_derive(dir: &Path, d: &DeriveOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut w = Vec::new();
    write_file(dir, "certificate.json", &serde_json::to_string_pretty(&d.certificate)?, &mut w)?;
    write_file(dir, "proof.txt", &d.transcript, &mut w)?;
    Ok(w)
}

#[derive(Serialize)]
struct StateMeta<'a> {
    fusion_probability: f64,
    noise: &'a crate::factory::NoiseSpec,
    fidelity_to_target: f64,
}

pub fn write_state(dir: &Path, stages: &PipelineStages, noise: &crate::factory::NoiseSpec) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut w = Vec::new();
    write_file(dir, "state.json", &stages.output.to_json()?, &mut w)?;
    let meta = StateMeta {
        fusion_probability: stages.fusion_probability,
        noise,
        fidelity_to_target: stages.output.fidelity(&rho_psi())?,
    };
    write_file(dir, "state_meta.json", &serde_json::to_string_pretty(&meta)?, &mut w)?;
    Ok(w)
}

#[derive(Serialize)]
struct MleMeta<'a> {
    iterations: usize,
    log_likelihood: f64,
    converged: bool,
    initializer: &'a str,
    seed: Option<u64>,
    bootstrap_replicas: usize,
}

pub fn write_tomography(dir: &Path, t: &TomographyAnalysis, seed: Option<u64>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut w = Vec::new();
    let state: serde_json::Value = serde_json::to_value(&t.mle.rho)?;
    let doc = serde_json::json!({
        "state": state,
        "meta": MleMeta {
            iterations: t.mle.iterations,
            log_likelihood: t.mle.log_likelihood,
            converged: t.mle.converged,
            initializer: &t.mle.initializer,
            seed,
            bootstrap_replicas: t.bootstrap_replicas,
        },
    });
    write_file(dir, "mle.json", &serde_json::to_string_pretty(&doc)?, &mut w)?;
    let witnesses = serde_json::json!({ "fidelity": t.fidelity, "branches": t.branches });
    write_file(dir, "witnesses.json", &serde_json::to_string_pretty(&witnesses)?, &mut w)?;
    let history: String = std::iter::once("step,log_likelihood\n".to_string())
        .chain(t.mle.history.iter().enumerate().map(|(k, v)| format!("{k},{v}\n")))
        .collect();
    write_file(dir, "mle_history.csv", &history, &mut w)?;
    Ok(w)
}

pub fn write_report(
    dir: &Path,
    report: &NonlocalityReport,
    tables: &[CountsTable],
    test: &GhzTest,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut w = Vec::new();
    write_file(dir, "report.json", &report.to_json()?, &mut w)?;
    write_file(dir, "report.csv", &report.to_csv()?, &mut w)?;
    write_file(dir, "fractions.csv", &outcome_table_csv(tables, test)?, &mut w)?;
    Ok(w)
}

impl ReproduceBundle {
    /// Writes every artifact under `dir`; returns the paths in write order.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut w = Vec::new();
        write_file(dir, "config.json", &self.config.to_json()?, &mut w)?;
        w.extend(write_derive(dir, &self.derive)?);
        w.extend(write_state(dir, &self.stages, &self.config.noise)?);
        write_file(dir, "counts.csv", &write_counts_csv(&self.correlations)?, &mut w)?;
        write_file(dir, "tomography.csv", &self.tomography.to_csv()?, &mut w)?;
        let seeds = StreamSeeds::from_run_seed(self.config.seed);
        w.extend(write_tomography(dir, &self.tomo, Some(seeds.tomography))?);
        w.extend(write_report(dir, &self.report, &self.correlations, &GhzTest::standard())?);
        write_file(dir, "summary.csv", &summary_csv(&self.summary)?, &mut w)?;
        write_file(dir, "summary.txt", &summary_text(&self.summary, &self.report), &mut w)?;
        Ok(w)
    }
}
