//! Sparsity penalty gradients.
//!
//! Both terms are odd in every coordinate and vanish at `h_i = 0`, which relies
//! on the `sgn(0) = 0` convention of [`sgn`].

use crate::error::{Error, Result};

/// Sign function with `sgn(0) = 0`.
#[inline]
pub fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `‖h‖_p^(1-p)`, the coordinate-independent factor of the Lp gradient.
///
/// For `p = 0` the quasi-norm degenerates to the count of nonzero taps.
pub(crate) fn lp_scale(h: &[f64], p: f64) -> f64 {
    if p == 0.0 {
        return h.iter().filter(|v| **v != 0.0).count() as f64;
    }
    let sum: f64 = h.iter().map(|v| v.abs().powf(p)).sum();
    if sum == 0.0 {
        return 0.0;
    }
    sum.powf((1.0 - p) / p)
}

#[inline]
pub(crate) fn lp_coord(h_i: f64, scale: f64, p: f64, eps_lp: f64) -> f64 {
    if h_i == 0.0 {
        return 0.0;
    }
    scale * sgn(h_i) / (eps_lp + h_i.abs().powf(1.0 - p))
}

/// Truncated-Taylor L0 gradient `J(h_i)`: `2β²h − 2β·sgn(h)` inside
/// `|h| ≤ 1/β`, zero outside. This gradient points away from zero.
#[inline]
pub(crate) fn l0_coord(h_i: f64, beta: f64) -> f64 {
    if h_i.abs() <= 1.0 / beta {
        2.0 * beta * beta * h_i - 2.0 * beta * sgn(h_i)
    } else {
        0.0
    }
}

fn check_finite(h: &[f64]) -> Result<()> {
    if h.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("estimate"))
    }
}

/// Elementwise Lp penalty gradient
/// `‖h‖_p^(1-p) · sgn(h_i) / (eps_lp + |h_i|^(1-p))`.
///
/// Returns the zero vector for `h = 0`.
pub fn lp_penalty_term(h: &[f64], p: f64, eps_lp: f64) -> Result<Vec<f64>> {
    check_finite(h)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::invalid("p", format!("{p} not in [0, 1)")));
    }
    if eps_lp.is_nan() || eps_lp <= 0.0 {
        return Err(Error::invalid("eps_lp", format!("{eps_lp} must be > 0")));
    }
    let scale = lp_scale(h, p);
    Ok(h.iter().map(|&v| lp_coord(v, scale, p, eps_lp)).collect())
}

/// Elementwise approximate-L0 gradient `J(h_i)`.
pub fn l0_penalty_term(h: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_finite(h)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", format!("{beta} must be > 0")));
    }
    Ok(h.iter().map(|&v| l0_coord(v, beta)).collect())
}
