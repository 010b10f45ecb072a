use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mixed_ghz::config::RunConfig;
use mixed_ghz::factory::{generation_pipeline, rho_psi};
use mixed_ghz::measurement::{read_counts_csv, write_counts_csv};
use mixed_ghz::nonlocality::{analyze, GhzTest};
use mixed_ghz::pipeline::{
    analyze_tomography, derive, reproduce, simulate_correlations, write_derive, write_report, write_state,
    write_tomography, StreamSeeds,
};
use mixed_ghz::stabilizer::GraphSpec;
use mixed_ghz::tomography::{simulate_tomography, TomographySet};
use mixed_ghz::{Error, Result};

#[derive(Parser)]
#[command(name = "mixed-ghz", version, about = "GHZ paradoxes and the simulated four-photon experiment")]
struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    events_per_setting: Option<f64>,
    #[arg(long, global = true)]
    noise_p: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive a GHZ paradox certificate from graph-state stabilizers.
    Derive {
        /// Graph file: `n=<qubits>` then one `u v` edge per line.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Comma-separated support qubits.
        #[arg(long, value_delimiter = ',')]
        support: Option<Vec<usize>>,
    },
    /// Build the four-photon mixed state.
    State,
    /// Simulate correlation and tomography counts.
    Simulate,
    /// Reconstruct a state from projector counts and evaluate witnesses.
    Tomo {
        /// Projector counts CSV; simulated from the config when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Local-realism analysis of correlation counts.
    Analyze {
        #[arg(required = true)]
        counts: Vec<PathBuf>,
    },
    /// Full run: every stage plus a summary against reference values.
    Reproduce,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = Some(dir.clone());
    }
    if let Some(events) = cli.events_per_setting {
        cfg.counting.events_per_setting = events;
    }
    if let Some(p) = cli.noise_p {
        cfg.noise.white_noise_p = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn report_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let out = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let seeds = StreamSeeds::from_run_seed(cfg.seed);
    match cli.command {
        Command::Derive { graph, support } => {
            let g = match graph {
                Some(path) => read(&path)?.parse::<GraphSpec>()?,
                None => cfg.graph.build()?,
            };
            let support = support.unwrap_or(cfg.support.clone());
            let d = derive(&g, &support, cfg.max_product_size)?;
            print!("{}", d.transcript);
            report_paths(&write_derive(&out, &d)?);
        }
        Command::State => {
            let stages = generation_pipeline(&cfg.noise)?;
            println!("fidelity to target: {:.6}", stages.output.fidelity(&rho_psi())?);
            report_paths(&write_state(&out, &stages, &cfg.noise)?);
        }
        Command::Simulate => {
            let rho = generation_pipeline(&cfg.noise)?.output;
            let c = &cfg.counting;
            let tables = simulate_correlations(&rho, &GhzTest::standard(), c.events_per_setting, c.duration_s, seeds.correlation)?;
            let tomo = simulate_tomography(&rho, c.tomography_rate, c.duration_s, seeds.tomography)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("counts.csv"), write_counts_csv(&tables)?)?;
            std::fs::write(out.join("tomography.csv"), tomo.to_csv()?)?;
            report_paths(&[out.join("counts.csv"), out.join("tomography.csv")]);
        }
        Command::Tomo { input } => {
            let (set, seed) = match input {
                Some(path) => (TomographySet::from_csv(&read(&path)?)?, None),
                None => {
                    let rho = generation_pipeline(&cfg.noise)?.output;
                    let c = &cfg.counting;
                    (simulate_tomography(&rho, c.tomography_rate, c.duration_s, seeds.tomography)?, Some(seeds.tomography))
                }
            };
            let t = analyze_tomography(&set, &rho_psi(), &cfg.mle, cfg.bootstrap_replicas, seeds.bootstrap)?;
            println!("fidelity {}", t.fidelity);
            for b in &t.branches {
                println!("witness {} ({}) {:.4} ± {:.4}", b.witness.target_label(), b.branch, b.witness.value, b.witness.sigma);
            }
            report_paths(&write_tomography(&out, &t, seed)?);
        }
        Command::Analyze { counts } => {
            let mut tables = Vec::new();
            for path in &counts {
                tables.extend(read_counts_csv(&read(path)?)?);
            }
            let test = GhzTest::standard();
            let report = analyze(&tables, &test)?;
            println!("S = {} (local-realist max {})", report.s, report.lr_max_s);
            println!("observed fraction {} vs bound {}", report.observed_fraction, report.lr_bound_fraction);
            if !report.violation {
                println!("no violation");
            }
            report_paths(&write_report(&out, &report, &tables, &test)?);
        }
        Command::Reproduce => {
            let bundle = reproduce(&cfg)?;
            print!("{}", mixed_ghz::pipeline::summary_text(&bundle.summary, &bundle.report));
            report_paths(&bundle.write(&out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
