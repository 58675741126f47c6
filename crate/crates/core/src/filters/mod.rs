//! Single-step adaptive update rules.
//!
//! Every variant shares the same shape:
//!
//! ```text
//! e(n)   = y − h(n)ᵀx(n)
//! h(n+1) = h(n) + data(e, x) − ρ·penalty(h(n))
//! ```
//!
//! | family | data term                           |
//! |--------|-------------------------------------|
//! | LMS    | `μ_s·e·x`                           |
//! | NLMS   | `μ_s·e·x / ‖x‖²`                    |
//! | LMF    | `μ_f·e³·x`                          |
//! | NLMF   | `μ_f(n)·e·x / ‖x‖²`, `μ_f(n) = μ_f·e² / (‖x‖² + e²)` |
//!
//! and `ρ = step size × λ`. The penalty is evaluated on the pre-update estimate.
//!
//! For LMS/NLMS the classical stability condition is `μ_s < 1/γ_max` with `γ_max`
//! the largest eigenvalue of `E{x xᵀ}`. It is not checked here since only the
//! caller knows the training statistics; with unit-power white training
//! `γ_max ≈ 1` and the default `μ_s = 0.5` is inside the range.

mod penalty;

pub use penalty::{l0_penalty_term, lp_penalty_term, sgn};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use penalty::{l0_coord, lp_coord, lp_scale};

pub const DEFAULT_MU_S: f64 = 0.5;
pub const DEFAULT_MU_F: f64 = 1.5;
pub const DEFAULT_P: f64 = 0.5;
pub const DEFAULT_EPS_LP: f64 = 0.05;
pub const DEFAULT_BETA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lms,
    Nlms,
    Lmf,
    Nlmf,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Lms, Family::Nlms, Family::Lmf, Family::Nlmf];

    pub fn is_normalized(self) -> bool {
        matches!(self, Family::Nlms | Family::Nlmf)
    }

    /// LMS and NLMS are driven by `μ_s`, LMF and NLMF by `μ_f`.
    pub fn is_fourth_order(self) -> bool {
        matches!(self, Family::Lmf | Family::Nlmf)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Lms => "LMS",
            Family::Nlms => "NLMS",
            Family::Lmf => "LMF",
            Family::Nlmf => "NLMF",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    None,
    Lp,
    L0,
}

impl Penalty {
    pub const ALL: [Penalty; 3] = [Penalty::None, Penalty::Lp, Penalty::L0];
}

/// Orientation of the L0 penalty.
///
/// `Attracting` subtracts `ρ·Z(h)` with `Z = −J`, which pulls small taps to zero.
/// `Literal` subtracts `ρ·J(h)` directly, which pushes small taps away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum L0Sign {
    #[default]
    Attracting,
    Literal,
}

/// Which variant to run and all of its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub family: Family,
    pub penalty: Penalty,
    pub mu_s: f64,
    pub mu_f: f64,
    /// Regularization weight of the active penalty; ignored for `Penalty::None`.
    pub lambda_reg: f64,
    pub p: f64,
    pub eps_lp: f64,
    pub beta: f64,
    #[serde(default)]
    pub l0_sign: L0Sign,
}

impl AlgorithmSpec {
    pub fn new(family: Family, penalty: Penalty) -> Self {
        AlgorithmSpec {
            family,
            penalty,
            mu_s: DEFAULT_MU_S,
            mu_f: DEFAULT_MU_F,
            lambda_reg: 0.0,
            p: DEFAULT_P,
            eps_lp: DEFAULT_EPS_LP,
            beta: DEFAULT_BETA,
            l0_sign: L0Sign::Attracting,
        }
    }

    pub fn with_lambda(mut self, lambda_reg: f64) -> Self {
        self.lambda_reg = lambda_reg;
        self
    }

    pub fn with_steps(mut self, mu_s: f64, mu_f: f64) -> Self {
        self.mu_s = mu_s;
        self.mu_f = mu_f;
        self
    }

    pub fn with_l0_sign(mut self, sign: L0Sign) -> Self {
        self.l0_sign = sign;
        self
    }

    /// Step size of the data term: `μ_s` or `μ_f`.
    pub fn step_size(&self) -> f64 {
        if self.family.is_fourth_order() {
            self.mu_f
        } else {
            self.mu_s
        }
    }

    /// Effective penalty weight `ρ = step size × λ`. Zero without a penalty.
    pub fn rho(&self) -> f64 {
        match self.penalty {
            Penalty::None => 0.0,
            _ => self.step_size() * self.lambda_reg,
        }
    }

    /// Display label such as `NLMS`, `LP-NLMF` or `L0-LMS`.
    pub fn label(&self) -> String {
        let base = self.family.name();
        match (self.penalty, self.l0_sign) {
            (Penalty::None, _) => base.to_string(),
            (Penalty::Lp, _) => format!("LP-{base}"),
            (Penalty::L0, L0Sign::Attracting) => format!("L0-{base}"),
            (Penalty::L0, L0Sign::Literal) => format!("L0-{base}-literal"),
        }
    }

    /// Checks the hyperparameter ranges used by experiments.
    ///
    /// [`step`] itself accepts zero step sizes so that degenerate filters can
    /// be exercised in tests.
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_s > 0.0 && self.mu_s.is_finite()) {
            return Err(Error::invalid("mu_s", format!("{} must be > 0", self.mu_s)));
        }
        if !(self.mu_f > 0.0 && self.mu_f < 2.0) {
            return Err(Error::invalid(
                "mu_f",
                format!("{} must lie in (0, 2)", self.mu_f),
            ));
        }
        if !(self.lambda_reg >= 0.0 && self.lambda_reg.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                format!("{} must be >= 0", self.lambda_reg),
            ));
        }
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::invalid("p", format!("{} not in [0, 1)", self.p)));
        }
        if !(self.eps_lp > 0.0 && self.eps_lp.is_finite()) {
            return Err(Error::invalid(
                "eps_lp",
                format!("{} must be > 0", self.eps_lp),
            ));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta", format!("{} must be > 0", self.beta)));
        }
        Ok(())
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Current estimate `h(n)` and iteration counter `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub estimate: Vec<f64>,
    pub iteration: u64,
}

/// Diagnostics of one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// A-priori error `e(n)`.
    pub error: f64,
    /// `μ_s` for LMS/NLMS, `μ_f·e²` for LMF, `μ_f(n)` for NLMF.
    pub effective_step: f64,
}

impl FilterState {
    /// All-zero estimate of length `len`.
    pub fn zeros(len: usize) -> Self {
        FilterState {
            estimate: vec![0.0; len],
            iteration: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.estimate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimate.is_empty()
    }

    /// In-place version of [`step`].
    ///
    /// On `Err(Diverged)` the estimate holds the non-finite result; every other
    /// error leaves the state untouched.
    pub fn update(&mut self, spec: &AlgorithmSpec, x: &[f64], y: f64) -> Result<StepRecord> {
        let e = compute_error(self, x, y)?;

        let xx = if spec.family.is_normalized() {
            let xx: f64 = x.iter().map(|v| v * v).sum();
            if xx == 0.0 {
                return Err(Error::DegenerateRegressor);
            }
            xx
        } else {
            1.0
        };

        let (gain, effective_step) = match spec.family {
            Family::Lms => (spec.mu_s * e, spec.mu_s),
            Family::Nlms => (spec.mu_s * e / xx, spec.mu_s),
            Family::Lmf => (spec.mu_f * e * e * e, spec.mu_f * e * e),
            Family::Nlmf => {
                let mu_n = nlmf_step(spec.mu_f, e * e, xx);
                (mu_n * e / xx, mu_n)
            }
        };

        let rho = spec.rho();
        let h = &mut self.estimate;
        match spec.penalty {
            Penalty::None => {
                for (h_i, x_i) in h.iter_mut().zip(x) {
                    *h_i += gain * x_i;
                }
            }
            Penalty::Lp => {
                let scale = lp_scale(h, spec.p);
                for (h_i, x_i) in h.iter_mut().zip(x) {
                    let pen = lp_coord(*h_i, scale, spec.p, spec.eps_lp);
                    *h_i = *h_i + gain * x_i - rho * pen;
                }
            }
            Penalty::L0 => {
                let orient = match spec.l0_sign {
                    L0Sign::Attracting => -1.0,
                    L0Sign::Literal => 1.0,
                };
                for (h_i, x_i) in h.iter_mut().zip(x) {
                    let pen = orient * l0_coord(*h_i, spec.beta);
                    *h_i = *h_i + gain * x_i - rho * pen;
                }
            }
        }

        self.iteration += 1;
        if self.estimate.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                iteration: self.iteration,
            });
        }
        Ok(StepRecord {
            error: e,
            effective_step,
        })
    }
}

/// Variable NLMF step `μ_f·e² / (‖x‖² + e²)`.
///
/// Always in `[0, μ_f)`: when `e²` dwarfs `‖x‖²` so much that the ratio rounds
/// to one, the largest double below `μ_f` is returned instead.
pub fn nlmf_step(mu_f: f64, e2: f64, xx: f64) -> f64 {
    let mu_n = mu_f * (e2 / (xx + e2));
    if mu_n >= mu_f && mu_f > 0.0 {
        mu_f.next_down()
    } else {
        mu_n
    }
}

/// A-priori error `e(n) = y − h(n)ᵀx`.
pub fn compute_error(state: &FilterState, x: &[f64], y: f64) -> Result<f64> {
    if x.len() != state.estimate.len() {
        return Err(Error::DimensionMismatch {
            expected: state.estimate.len(),
            actual: x.len(),
        });
    }
    if !y.is_finite() {
        return Err(Error::NonFinite("observation"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regressor"));
    }
    if state.estimate.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("estimate"));
    }
    let yhat: f64 = state.estimate.iter().zip(x).map(|(h, x)| h * x).sum();
    Ok(y - yhat)
}

/// One update of the selected variant. Pure: the input state is not modified.
pub fn step(
    state: &FilterState,
    spec: &AlgorithmSpec,
    x: &[f64],
    y: f64,
) -> Result<(FilterState, StepRecord)> {
    let mut next = state.clone();
    let record = next.update(spec, x, y)?;
    Ok((next, record))
}
