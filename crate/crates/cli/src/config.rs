//! Run configuration: a flat TOML file with one `[[algorithm]]` section per
//! variant, overridden by command-line flags.
//!
//! ```toml
//! n = 16
//! n_t = 2
//! t_dominant = 1
//! snr_db = 3.0
//! trials = 200
//! iterations = 2000
//! seed = 1
//!
//! [[algorithm]]
//! family = "nlms"
//! penalty = "l0"
//! beta = 5.0
//! ```
//!
//! Algorithms without an explicit `lambda` get the regularization table value
//! for the configured noise level and sparsity.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sparse_adapt::filters::{DEFAULT_BETA, DEFAULT_EPS_LP, DEFAULT_MU_F, DEFAULT_MU_S, DEFAULT_P};
use sparse_adapt::{AlgorithmSpec, ExperimentConfig, Family, L0Sign, LogBase, Penalty};

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "SPARSE_ADAPT_SEED";

/// On-disk configuration. Every field is optional; missing ones take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_dominant: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_lp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_base: Option<LogBase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_sign_l0: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_svg: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub db: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub algorithm: Vec<AlgorithmEntry>,
}

/// One `[[algorithm]]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub family: Family,
    pub penalty: Penalty,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_lp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_sign_l0: Option<bool>,
}

impl AlgorithmEntry {
    pub fn new(family: Family, penalty: Penalty) -> Self {
        AlgorithmEntry {
            family,
            penalty,
            mu_s: None,
            mu_f: None,
            lambda: None,
            p: None,
            eps_lp: None,
            beta: None,
            paper_sign_l0: None,
        }
    }

    /// Rejects hyperparameters that the selected variant would silently ignore.
    fn check_conflicts(&self) -> Result<()> {
        let label = AlgorithmSpec::new(self.family, self.penalty).label();
        let conflict = |field: &str| {
            Err(CliError::validation(format!(
                "algorithm {label}: `{field}` does not apply to this variant"
            )))
        };
        if self.family.is_fourth_order() && self.mu_s.is_some() {
            return conflict("mu_s");
        }
        if !self.family.is_fourth_order() && self.mu_f.is_some() {
            return conflict("mu_f");
        }
        if self.penalty == Penalty::None && self.lambda.is_some() {
            return conflict("lambda");
        }
        if self.penalty != Penalty::Lp && (self.p.is_some() || self.eps_lp.is_some()) {
            return conflict(if self.p.is_some() { "p" } else { "eps_lp" });
        }
        if self.penalty != Penalty::L0 && (self.beta.is_some() || self.paper_sign_l0.is_some()) {
            return conflict(if self.beta.is_some() { "beta" } else { "paper_sign_l0" });
        }
        Ok(())
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub n_t: Option<usize>,
    pub t_dominant: Option<usize>,
    pub snr_db: Option<f64>,
    pub trials: Option<usize>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub algos: Option<Vec<AlgorithmEntry>>,
    pub mu_s: Option<f64>,
    pub mu_f: Option<f64>,
    pub paper_sign_l0: bool,
    pub workers: Option<usize>,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    pub db: Option<bool>,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub log_base: LogBase,
    pub workers: usize,
    pub out_csv: PathBuf,
    pub out_svg: PathBuf,
    pub db_scale: bool,
    pub title: String,
}

/// The six normalized variants compared in the convergence figures.
pub fn default_algorithms() -> Vec<AlgorithmEntry> {
    [Family::Nlms, Family::Nlmf]
        .into_iter()
        .flat_map(|f| Penalty::ALL.map(|p| AlgorithmEntry::new(f, p)))
        .collect()
}

/// Parses a comma-separated list such as `nlms,l0-nlms,lp-nlmf,l0-lms-literal`.
pub fn parse_algos(list: &str) -> Result<Vec<AlgorithmEntry>> {
    let mut out = Vec::new();
    for raw in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let lower = raw.to_ascii_lowercase();
        let (rest, literal) = match lower.strip_suffix("-literal") {
            Some(r) => (r, true),
            None => (lower.as_str(), false),
        };
        let (penalty, fam) = if let Some(f) = rest.strip_prefix("lp-") {
            (Penalty::Lp, f)
        } else if let Some(f) = rest.strip_prefix("l0-") {
            (Penalty::L0, f)
        } else {
            (Penalty::None, rest)
        };
        let family = match fam {
            "lms" => Family::Lms,
            "nlms" => Family::Nlms,
            "lmf" => Family::Lmf,
            "nlmf" => Family::Nlmf,
            _ => return Err(CliError::validation(format!("unknown algorithm `{raw}`"))),
        };
        if literal && penalty != Penalty::L0 {
            return Err(CliError::validation(format!(
                "`-literal` only applies to L0 variants (got `{raw}`)"
            )));
        }
        let mut entry = AlgorithmEntry::new(family, penalty);
        if literal {
            entry.paper_sign_l0 = Some(true);
        }
        out.push(entry);
    }
    if out.is_empty() {
        return Err(CliError::validation("`--algos` selects no algorithm"));
    }
    Ok(out)
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: {}", path.display(), e.message())))
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::validation(format!(
            "invalid parameter `{field}`: {v} must be > 0"
        )))
    }
}

/// Merges defaults, the config file, the seed environment variable and the
/// flags (in increasing precedence; the env var only supplies a seed when
/// neither file nor flags do) and validates the result.
pub fn resolve(file: Option<ConfigFile>, over: &Overrides) -> Result<RunConfig> {
    let file = file.unwrap_or_default();

    let seed = match over.seed.or(file.seed) {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                CliError::validation(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))
            })?,
            Err(_) => 1,
        },
    };

    let mu_s = over.mu_s.or(file.mu_s).unwrap_or(DEFAULT_MU_S);
    let mu_f = over.mu_f.or(file.mu_f).unwrap_or(DEFAULT_MU_F);
    let p = file.p.unwrap_or(DEFAULT_P);
    let eps_lp = file.eps_lp.unwrap_or(DEFAULT_EPS_LP);
    let beta = file.beta.unwrap_or(DEFAULT_BETA);
    let paper_sign = over.paper_sign_l0 || file.paper_sign_l0.unwrap_or(false);
    let log_base = file.log_base.unwrap_or_default();

    let mut experiment = ExperimentConfig {
        n: over.n.or(file.n).unwrap_or(16),
        n_t: over.n_t.or(file.n_t).unwrap_or(2),
        t_dominant: over.t_dominant.or(file.t_dominant).unwrap_or(3),
        snr_db: over.snr_db.or(file.snr_db).unwrap_or(3.0),
        e0: positive("e0", file.e0.unwrap_or(1.0))?,
        trials: over.trials.or(file.trials).unwrap_or(200),
        iterations: over.iterations.or(file.iterations).unwrap_or(2000),
        algorithms: Vec::new(),
        master_seed: seed,
    };

    let entries = match (&over.algos, file.algorithm.is_empty()) {
        (Some(list), _) => list.clone(),
        (None, false) => file.algorithm.clone(),
        (None, true) => default_algorithms(),
    };

    let mut algorithms = Vec::with_capacity(entries.len());
    for entry in &entries {
        entry.check_conflicts()?;
        let mut spec = AlgorithmSpec::new(entry.family, entry.penalty).with_steps(
            over.mu_s.or(entry.mu_s).unwrap_or(mu_s),
            over.mu_f.or(entry.mu_f).unwrap_or(mu_f),
        );
        spec.p = entry.p.unwrap_or(p);
        spec.eps_lp = entry.eps_lp.unwrap_or(eps_lp);
        spec.beta = entry.beta.unwrap_or(beta);
        if paper_sign || entry.paper_sign_l0.unwrap_or(false) {
            spec.l0_sign = L0Sign::Literal;
        }
        spec.validate()?;
        spec = match entry.lambda {
            Some(l) => spec.with_lambda(l),
            None => experiment.with_table1(spec, log_base)?,
        };
        algorithms.push(spec);
    }
    experiment.algorithms = algorithms;
    experiment.validate()?;

    let labels: Vec<String> = experiment.algorithms.iter().map(|a| a.label()).collect();
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(CliError::validation(format!("algorithm {l} selected twice")));
        }
    }

    let out_csv = over
        .out_csv
        .clone()
        .or(file.out_csv)
        .unwrap_or_else(|| PathBuf::from("results/run.csv"));
    let out_svg = over
        .out_svg
        .clone()
        .or(file.out_svg)
        .unwrap_or_else(|| out_csv.with_extension("svg"));
    let title = file.title.unwrap_or_else(|| default_title(&experiment));

    Ok(RunConfig {
        workers: over.workers.or(file.workers).unwrap_or(0),
        db_scale: over.db.or(file.db).unwrap_or(true),
        experiment,
        log_base,
        out_csv,
        out_svg,
        title,
    })
}

pub fn default_title(cfg: &ExperimentConfig) -> String {
    format!(
        "Average MSE: N={}, Nt={}, T={}, SNR={} dB (20log10(E0/sigma^2))",
        cfg.n, cfg.n_t, cfg.t_dominant, cfg.snr_db
    )
}

impl RunConfig {
    /// Fully explicit config file that reproduces this run.
    pub fn echo(&self) -> ConfigFile {
        let e = &self.experiment;
        let algorithm = e
            .algorithms
            .iter()
            .map(|s| {
                let mut entry = AlgorithmEntry::new(s.family, s.penalty);
                if s.family.is_fourth_order() {
                    entry.mu_f = Some(s.mu_f);
                } else {
                    entry.mu_s = Some(s.mu_s);
                }
                match s.penalty {
                    Penalty::None => {}
                    Penalty::Lp => {
                        entry.lambda = Some(s.lambda_reg);
                        entry.p = Some(s.p);
                        entry.eps_lp = Some(s.eps_lp);
                    }
                    Penalty::L0 => {
                        entry.lambda = Some(s.lambda_reg);
                        entry.beta = Some(s.beta);
                        entry.paper_sign_l0 = Some(s.l0_sign == L0Sign::Literal);
                    }
                }
                entry
            })
            .collect();
        ConfigFile {
            n: Some(e.n),
            n_t: Some(e.n_t),
            t_dominant: Some(e.t_dominant),
            snr_db: Some(e.snr_db),
            e0: Some(e.e0),
            trials: Some(e.trials),
            iterations: Some(e.iterations),
            seed: Some(e.master_seed),
            log_base: Some(self.log_base),
            workers: Some(self.workers),
            out_csv: Some(self.out_csv.clone()),
            out_svg: Some(self.out_svg.clone()),
            db: Some(self.db_scale),
            title: Some(self.title.clone()),
            algorithm,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ConfigFile> {
        toml::from_str(text).map_err(|e| CliError::validation(e.to_string()))
    }

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = resolve(Some(parse("").unwrap()), &Overrides {
            seed: Some(1),
            ..Default::default()
        })
        .unwrap();
        let e = &cfg.experiment;
        assert_eq!((e.n, e.n_t, e.t_dominant), (16, 2, 3));
        assert_eq!((e.snr_db, e.trials, e.iterations, e.master_seed), (3.0, 200, 2000, 1));
        assert_eq!(e.algorithms.len(), 6);
        assert!(e.algorithms.iter().all(|a| a.mu_s == 0.5 && a.mu_f == 1.5));
        assert!(cfg.db_scale);
    }

    #[test]
    fn flags_override_file() {
        let file = parse("snr_db = 3.0\nt_dominant = 3\n").unwrap();
        let cfg = resolve(Some(file), &Overrides {
            snr_db: Some(9.0),
            t_dominant: Some(1),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(cfg.experiment.snr_db, 9.0);
        assert_eq!(cfg.experiment.t_dominant, 1);
    }

    #[test]
    fn mu_f_out_of_range_names_field() {
        let err = resolve(None, &Overrides {
            mu_f: Some(2.5),
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("mu_f"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse("snr = 3.0").is_err());
        assert!(parse("[[algorithm]]\nfamily = \"nlms\"\npenalty = \"l0\"\nstep = 1.0\n").is_err());
    }

    #[test]
    fn conflicting_hyperparameters() {
        let file = parse("[[algorithm]]\nfamily = \"nlms\"\npenalty = \"none\"\nlambda = 0.1\n").unwrap();
        let err = resolve(Some(file), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("lambda"), "{err}");
        let file = parse("[[algorithm]]\nfamily = \"nlms\"\npenalty = \"lp\"\nmu_f = 1.0\n").unwrap();
        assert!(resolve(Some(file), &Overrides::default()).is_err());
        let file = parse("[[algorithm]]\nfamily = \"lmf\"\npenalty = \"lp\"\nbeta = 3.0\n").unwrap();
        assert!(resolve(Some(file), &Overrides::default()).is_err());
    }

    #[test]
    fn algos_list() {
        let list = parse_algos("NLMS, lp-nlmf,l0-lms-literal").unwrap();
        assert_eq!(list.len(), 3);
        assert_eq!((list[1].family, list[1].penalty), (Family::Nlmf, Penalty::Lp));
        assert_eq!(list[2].paper_sign_l0, Some(true));
        assert!(parse_algos("rls").is_err());
        assert!(parse_algos("nlms-literal").is_err());
        assert!(parse_algos("").is_err());
    }

    #[test]
    fn table_lambda_applied_unless_explicit() {
        let file = parse(
            "t_dominant = 1\n[[algorithm]]\nfamily = \"nlms\"\npenalty = \"l0\"\n\
             [[algorithm]]\nfamily = \"nlmf\"\npenalty = \"l0\"\nlambda = 0.25\n",
        )
        .unwrap();
        let cfg = resolve(Some(file), &Overrides::default()).unwrap();
        let sigma2 = sparse_adapt::sigma_from_snr(3.0, 1.0);
        let expect = 2e-3 * sigma2 * 16f64.ln();
        assert!((cfg.experiment.algorithms[0].lambda_reg - expect).abs() < 1e-18);
        assert_eq!(cfg.experiment.algorithms[1].lambda_reg, 0.25);
    }

    #[test]
    fn dense_channel_with_table_lambda_is_rejected() {
        let err = resolve(None, &Overrides {
            t_dominant: Some(16),
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        // without a penalty the log(N/T) term is never needed
        assert!(resolve(None, &Overrides {
            t_dominant: Some(16),
            algos: Some(parse_algos("nlms").unwrap()),
            ..Default::default()
        })
        .is_ok());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = resolve(None, &Overrides {
            algos: Some(parse_algos("lms,lp-nlms,l0-nlmf-literal,lmf").unwrap()),
            seed: Some(9),
            ..Default::default()
        })
        .unwrap();
        let text = toml::to_string(&cfg.echo()).unwrap();
        let again = resolve(Some(parse(&text).unwrap()), &Overrides::default()).unwrap();
        assert_eq!(again, cfg);
    }
}
