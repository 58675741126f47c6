use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparse_adapt_cli::commands::{self, RunOutcome};
use sparse_adapt_cli::config::{self, load_config_file, parse_algos, Overrides, RunConfig};
use sparse_adapt_cli::manifest::RunManifest;
use sparse_adapt_cli::Result;

/// Sparse adaptive MISO channel estimation simulator.
#[derive(Debug, Parser)]
#[command(name = "sparse-adapt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one Monte-Carlo experiment.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// SNR in dB, defined as 20·log10(E0/σ²).
        #[arg(long = "snr", allow_negative_numbers = true)]
        snr: Option<f64>,
        /// Dominant taps per antenna.
        #[arg(long = "t")]
        t: Option<usize>,
        #[arg(long = "out-csv")]
        out_csv: Option<PathBuf>,
        #[arg(long = "out-svg")]
        out_svg: Option<PathBuf>,
        /// Re-run the configuration recorded in a run manifest.
        #[arg(long, conflicts_with = "config")]
        manifest: Option<PathBuf>,
    },
    /// Run the four preset experiments (T=1 @ 3 dB, T=3 @ 3, 6, 9 dB).
    Reproduce {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "out-dir", default_value = "results")]
        out_dir: PathBuf,
    },
    /// Run the invariant self-checks.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Taps per antenna (N).
    #[arg(long)]
    n: Option<usize>,
    /// Transmit antennas (N_t).
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// Master seed (fallback: SPARSE_ADAPT_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated variants, e.g. `nlms,lp-nlms,l0-nlms`.
    #[arg(long)]
    algos: Option<String>,
    #[arg(long = "mu-s")]
    mu_s: Option<f64>,
    #[arg(long = "mu-f")]
    mu_f: Option<f64>,
    /// Plot in dB (default).
    #[arg(long, conflicts_with = "linear")]
    db: bool,
    /// Plot linear MSE.
    #[arg(long)]
    linear: bool,
    /// Use the literal L0 penalty sign (repels small taps).
    #[arg(long = "paper-sign-l0")]
    paper_sign_l0: bool,
    /// Worker threads; 0 = all cores, 1 = sequential.
    #[arg(long)]
    workers: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            n: self.n,
            n_t: self.nt,
            trials: self.trials,
            iterations: self.iters,
            seed: self.seed,
            algos: self.algos.as_deref().map(parse_algos).transpose()?,
            mu_s: self.mu_s,
            mu_f: self.mu_f,
            paper_sign_l0: self.paper_sign_l0,
            workers: self.workers,
            db: match (self.db, self.linear) {
                (true, _) => Some(true),
                (_, true) => Some(false),
                _ => None,
            },
            ..Default::default()
        })
    }

    fn file(&self) -> Result<Option<config::ConfigFile>> {
        self.config.as_deref().map(load_config_file).transpose()
    }
}

fn report(outcome: &RunOutcome) {
    let e = &outcome.config.experiment;
    println!(
        "N={} Nt={} T={} SNR={} dB trials={} iterations={} seed={}",
        e.n, e.n_t, e.t_dominant, e.snr_db, e.trials, e.iterations, e.master_seed
    );
    for t in &outcome.trajectories {
        match t.terminal_mse_db(0.1) {
            Some(db) => println!(
                "  {:<18} terminal MSE {:>9.3} dB  diverged {}/{}",
                t.algorithm_label, db, t.diverged_trials, t.trials
            ),
            None => println!(
                "  {:<18} diverged in all {} trials",
                t.algorithm_label, t.trials
            ),
        }
    }
    for f in &outcome.output_files {
        println!("  wrote {}", f.display());
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run {
            common,
            snr,
            t,
            out_csv,
            out_svg,
            manifest,
        } => {
            let mut over = common.overrides()?;
            over.snr_db = snr;
            over.t_dominant = t;
            over.out_csv = out_csv;
            over.out_svg = out_svg;
            let file = match manifest {
                Some(path) => Some(RunManifest::load(&path)?.config),
                None => common.file()?,
            };
            let cfg: RunConfig = config::resolve(file, &over)?;
            let outcome = commands::run(cfg)?;
            report(&outcome);
            Ok(if outcome.divergence_dominated() { 3 } else { 0 })
        }
        Command::Reproduce { common, out_dir } => {
            let over = common.overrides()?;
            let file = common.file()?;
            let outcomes = commands::reproduce(&out_dir, |t, snr| {
                let mut o = over.clone();
                o.t_dominant = Some(t);
                o.snr_db = Some(snr);
                config::resolve(file.clone(), &o)
            })?;
            for o in &outcomes {
                report(o);
            }
            Ok(if outcomes.iter().any(RunOutcome::divergence_dominated) {
                3
            } else {
                0
            })
        }
        Command::Validate { seed } => {
            let checks = commands::validate(seed);
            for c in &checks {
                println!(
                    "[{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
