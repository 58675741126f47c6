//! Seeded Monte-Carlo harness.
//!
//! Each trial draws one channel and one training stream from seeds split off the
//! master seed (see [`crate::seed`]), then runs every configured algorithm on
//! that same data. Trials are reduced in index order, so the averaged curves are
//! bit-identical for any worker count.

mod exec;

pub use exec::Execution;

use serde::{Deserialize, Serialize};

use crate::channel::{generate_channel, training_stream, ChannelRealization, NoiseSpec, Sample};
use crate::error::{Error, Result};
use crate::filters::{AlgorithmSpec, Family, FilterState, Penalty};
use crate::seed::{mix, LANE_CHANNEL, LANE_STREAM};

/// Trials handed to the scheduler at once. Bounds memory; has no effect on results.
const TRIAL_BLOCK: usize = 256;

/// Base of the logarithm in the regularization schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    E,
    Ten,
    Two,
}

impl LogBase {
    pub fn log(self, v: f64) -> f64 {
        match self {
            LogBase::E => v.ln(),
            LogBase::Ten => v.log10(),
            LogBase::Two => v.log2(),
        }
    }
}

/// Coefficient `c` of `λ = c·σ_n²·log(N/T)`.
///
/// LMS shares the NLMS coefficients and LMF shares the NLMF ones.
pub fn table1_coefficient(family: Family, penalty: Penalty) -> f64 {
    match (family.is_fourth_order(), penalty) {
        (_, Penalty::None) => 0.0,
        (false, Penalty::Lp) => 2e-4,
        (true, Penalty::Lp) => 2e-6,
        (false, Penalty::L0) => 2e-3,
        (true, Penalty::L0) => 2e-5,
    }
}

/// Regularization weight from the simulation table, natural logarithm.
pub fn table1_lambda(
    family: Family,
    penalty: Penalty,
    sigma_n2: f64,
    n: usize,
    t_dominant: usize,
) -> Result<f64> {
    table1_lambda_with_base(family, penalty, sigma_n2, n, t_dominant, LogBase::E)
}

pub fn table1_lambda_with_base(
    family: Family,
    penalty: Penalty,
    sigma_n2: f64,
    n: usize,
    t_dominant: usize,
    base: LogBase,
) -> Result<f64> {
    if t_dominant == 0 {
        return Err(Error::invalid("t_dominant", "must be >= 1"));
    }
    if n <= t_dominant {
        return Err(Error::invalid(
            "n",
            format!("log(N/T) needs N > T (N = {n}, T = {t_dominant})"),
        ));
    }
    if !(sigma_n2 > 0.0 && sigma_n2.is_finite()) {
        return Err(Error::invalid("sigma_n2", format!("{sigma_n2} must be > 0")));
    }
    let ratio = n as f64 / t_dominant as f64;
    Ok(table1_coefficient(family, penalty) * sigma_n2 * base.log(ratio))
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub n_t: usize,
    pub t_dominant: usize,
    pub snr_db: f64,
    pub e0: f64,
    pub trials: usize,
    pub iterations: usize,
    pub algorithms: Vec<AlgorithmSpec>,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 16,
            n_t: 2,
            t_dominant: 3,
            snr_db: 3.0,
            e0: 1.0,
            trials: 200,
            iterations: 2000,
            algorithms: Vec::new(),
            master_seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn noise(&self) -> Result<NoiseSpec> {
        NoiseSpec::from_snr(self.snr_db, self.e0)
    }

    /// Stacked channel length `N·N_t`.
    pub fn stacked_len(&self) -> usize {
        self.n * self.n_t
    }

    /// `spec` with `lambda_reg` taken from the regularization table for this
    /// configuration's noise level and sparsity.
    pub fn with_table1(&self, spec: AlgorithmSpec, base: LogBase) -> Result<AlgorithmSpec> {
        let lambda = match spec.penalty {
            Penalty::None => 0.0,
            _ => table1_lambda_with_base(
                spec.family,
                spec.penalty,
                self.noise()?.sigma_n2,
                self.n,
                self.t_dominant,
                base,
            )?,
        };
        Ok(spec.with_lambda(lambda))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        if self.n_t == 0 {
            return Err(Error::invalid("n_t", "must be >= 1"));
        }
        if self.t_dominant == 0 || self.t_dominant > self.n {
            return Err(Error::invalid(
                "t_dominant",
                format!("{} not in [1, n = {}]", self.t_dominant, self.n),
            ));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::invalid("snr_db", "must be finite"));
        }
        if !(self.e0 > 0.0 && self.e0.is_finite()) {
            return Err(Error::invalid("e0", "must be > 0"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be >= 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("algorithms", "no algorithm selected"));
        }
        for spec in &self.algorithms {
            spec.validate()?;
        }
        Ok(())
    }

    fn draw(&self, trial_index: usize) -> Result<(ChannelRealization, Vec<Sample>)> {
        let trial = trial_index as u64;
        let channel = generate_channel(
            self.n,
            self.n_t,
            self.t_dominant,
            mix(self.master_seed, trial, LANE_CHANNEL),
        )?;
        let noise = self.noise()?;
        let samples = training_stream(
            &channel,
            &noise,
            self.iterations,
            mix(self.master_seed, trial, LANE_STREAM),
        )?
        .collect();
        Ok((channel, samples))
    }
}

/// Averaged learning curve of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct MseTrajectory {
    pub algorithm_label: String,
    pub spec: AlgorithmSpec,
    /// `E{‖h − h(n)‖²}` over completed trials; empty when every trial diverged.
    pub per_iteration_mse: Vec<f64>,
    pub per_iteration_mse_db: Vec<f64>,
    pub trials: usize,
    pub diverged_trials: usize,
}

impl MseTrajectory {
    pub fn all_diverged(&self) -> bool {
        self.diverged_trials == self.trials
    }

    /// Mean linear MSE over the last `fraction` of iterations (at least one).
    pub fn terminal_mse(&self, fraction: f64) -> Option<f64> {
        terminal_mean(&self.per_iteration_mse, fraction)
    }

    pub fn terminal_mse_db(&self, fraction: f64) -> Option<f64> {
        self.terminal_mse(fraction).map(to_db)
    }
}

/// Mean of the trailing `fraction` of `curve`.
pub fn terminal_mean(curve: &[f64], fraction: f64) -> Option<f64> {
    if curve.is_empty() {
        return None;
    }
    let len = ((curve.len() as f64 * fraction).round() as usize).clamp(1, curve.len());
    let tail = &curve[curve.len() - len..];
    Some(tail.iter().sum::<f64>() / len as f64)
}

pub fn to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

/// Per-algorithm outcomes of one trial, in the order of `config.algorithms`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    /// Squared error after each step, or the divergence error.
    pub outcomes: Vec<Result<Vec<f64>>>,
}

fn run_filter(
    spec: &AlgorithmSpec,
    truth: &[f64],
    samples: &[Sample],
) -> Result<Vec<f64>> {
    let mut state = FilterState::zeros(truth.len());
    let mut curve = Vec::with_capacity(samples.len());
    for sample in samples {
        match state.update(spec, &sample.regressor, sample.observation) {
            Ok(_) | Err(Error::DegenerateRegressor) => {}
            Err(e) => return Err(e),
        }
        let sq: f64 = truth
            .iter()
            .zip(&state.estimate)
            .map(|(h, g)| (h - g) * (h - g))
            .sum();
        curve.push(sq);
    }
    Ok(curve)
}

/// Squared-error curve `‖h − h(n)‖²` of `spec` on trial `trial_index`.
///
/// Uses the same channel and stream as every other algorithm at that index.
/// Only the structural parts of `config` are checked so degenerate specs
/// (zero step sizes) can be run.
pub fn run_trial(config: &ExperimentConfig, spec: &AlgorithmSpec, trial_index: usize) -> Result<Vec<f64>> {
    let (channel, samples) = config.draw(trial_index)?;
    run_filter(spec, &channel.stacked, &samples)
}

fn trial_record(config: &ExperimentConfig, trial_index: usize) -> Result<TrialRecord> {
    let (channel, samples) = config.draw(trial_index)?;
    let outcomes = config
        .algorithms
        .iter()
        .map(|spec| run_filter(spec, &channel.stacked, &samples))
        .collect();
    Ok(TrialRecord {
        trial_index,
        outcomes,
    })
}

/// Every trial's raw curves, in trial order.
pub fn run_trials(config: &ExperimentConfig, exec: Execution) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    exec::map_indices(0..config.trials, exec, |i| trial_record(config, i))
}

struct Accumulator {
    sum: Vec<f64>,
    completed: usize,
    diverged: usize,
}

/// Averaged curves, one per configured algorithm, using the default scheduler.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<MseTrajectory>> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<Vec<MseTrajectory>> {
    config.validate()?;
    let mut acc: Vec<Accumulator> = config
        .algorithms
        .iter()
        .map(|_| Accumulator {
            sum: vec![0.0; config.iterations],
            completed: 0,
            diverged: 0,
        })
        .collect();

    let mut start = 0;
    while start < config.trials {
        let end = (start + TRIAL_BLOCK).min(config.trials);
        let block = exec::map_indices(start..end, exec, |i| trial_record(config, i))?;
        for record in block {
            for (a, outcome) in acc.iter_mut().zip(record.outcomes) {
                match outcome {
                    Ok(curve) => {
                        for (s, v) in a.sum.iter_mut().zip(&curve) {
                            *s += v;
                        }
                        a.completed += 1;
                    }
                    Err(Error::Diverged { .. }) => a.diverged += 1,
                    Err(e) => return Err(e),
                }
            }
        }
        start = end;
    }

    Ok(config
        .algorithms
        .iter()
        .zip(acc)
        .map(|(spec, a)| {
            let per_iteration_mse: Vec<f64> = if a.completed == 0 {
                Vec::new()
            } else {
                let k = a.completed as f64;
                a.sum.iter().map(|s| s / k).collect()
            };
            let per_iteration_mse_db = per_iteration_mse.iter().map(|&v| to_db(v)).collect();
            MseTrajectory {
                algorithm_label: spec.label(),
                spec: *spec,
                per_iteration_mse,
                per_iteration_mse_db,
                trials: config.trials,
                diverged_trials: a.diverged,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small(algorithms: Vec<AlgorithmSpec>) -> ExperimentConfig {
        ExperimentConfig {
            n: 8,
            n_t: 1,
            t_dominant: 2,
            trials: 4,
            iterations: 50,
            algorithms,
            ..Default::default()
        }
    }

    #[test]
    fn table1_examples() {
        let l = table1_lambda(Family::Nlms, Penalty::Lp, 1.0, 16, 1).unwrap();
        assert_relative_eq!(l, 5.545_177_444_479_562e-4, max_relative = 1e-12);
        let s2 = crate::channel::sigma_from_snr(3.0, 1.0);
        let l = table1_lambda(Family::Nlms, Penalty::L0, s2, 16, 3).unwrap();
        // 2e-3 · 10^(-0.15) · ln(16/3)
        assert_relative_eq!(l, 2.370_169_118_610_917_6e-3, max_relative = 1e-12);
        assert!(table1_lambda(Family::Nlmf, Penalty::L0, 1.0, 16, 16).is_err());
        assert!(table1_lambda(Family::Nlmf, Penalty::L0, 0.0, 16, 1).is_err());
        assert_eq!(table1_lambda(Family::Nlmf, Penalty::None, 1.0, 16, 1).unwrap(), 0.0);
    }

    #[test]
    fn frozen_spec_is_constant_unit_curve() {
        let spec = AlgorithmSpec::new(Family::Nlms, Penalty::None).with_steps(0.0, 0.0);
        let cfg = small(vec![spec]);
        let curve = run_trial(&cfg, &spec, 0).unwrap();
        assert_eq!(curve.len(), 50);
        for v in curve {
            assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn single_trial_average_is_the_trial() {
        let spec = AlgorithmSpec::new(Family::Nlms, Penalty::L0).with_lambda(1e-3);
        let mut cfg = small(vec![spec]);
        cfg.trials = 1;
        let traj = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        assert_eq!(traj[0].per_iteration_mse, run_trial(&cfg, &spec, 0).unwrap());
    }

    #[test]
    fn all_diverged_is_reported() {
        let mut spec = AlgorithmSpec::new(Family::Lmf, Penalty::None);
        spec.mu_f = 1.9;
        let mut cfg = small(vec![spec, AlgorithmSpec::new(Family::Nlms, Penalty::None)]);
        cfg.snr_db = 40.0;
        cfg.n = 16;
        cfg.n_t = 4;
        cfg.iterations = 400;
        let traj = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        assert!(traj[0].all_diverged());
        assert!(traj[0].per_iteration_mse.is_empty());
        assert_eq!(traj[0].terminal_mse(0.1), None);
        assert_eq!(traj[1].diverged_trials, 0);
    }

    #[test]
    fn invalid_config() {
        let mut cfg = small(vec![AlgorithmSpec::new(Family::Nlms, Penalty::None)]);
        cfg.trials = 0;
        assert!(run_experiment(&cfg).is_err());
        let cfg = small(Vec::new());
        assert!(matches!(
            run_experiment(&cfg),
            Err(Error::InvalidParameter { field: "algorithms", .. })
        ));
    }

    #[test]
    fn terminal_window() {
        let curve: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(terminal_mean(&curve, 0.1), Some(19.5));
        assert_eq!(terminal_mean(&curve, 0.0), Some(20.0));
        assert_eq!(terminal_mean(&[], 0.1), None);
    }
}
