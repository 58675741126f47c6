//! Adaptive sparse channel estimation for MISO links.
//!
//! The crate is split into three layers:
//!
//! * [`filters`]: the twelve single-step update rules (LMS, NLMS, LMF and NLMF,
//!   each with no penalty, an Lp-norm penalty or an approximate L0-norm penalty).
//! * [`channel`]: sparse stacked MISO channels, sliding-window Gaussian training
//!   regressors and noisy observations `y = hᵀx + z`.
//! * [`harness`]: seeded, paired Monte-Carlo trials that average `‖h − h(n)‖²`
//!   over trials. Trials run on rayon when the `parallel` feature is on and
//!   always reduce in trial order, so results do not depend on the worker count.

pub mod channel;
pub mod error;
pub mod filters;
pub mod harness;
pub mod invariants;
pub mod seed;

pub use channel::{
    generate_channel, sigma_from_snr, training_stream, ChannelRealization, NoiseSpec, Sample,
    TrainingStream,
};
pub use error::{Error, Result};
pub use filters::{
    nlmf_step,
    compute_error, l0_penalty_term, lp_penalty_term, step, AlgorithmSpec, Family, FilterState,
    L0Sign, Penalty, StepRecord,
};
pub use harness::{
    run_experiment_with,
    run_experiment, run_trial, run_trials, table1_lambda, Execution, ExperimentConfig, LogBase,
    MseTrajectory, TrialRecord,
};
