//! CSV output: `iteration,<label>_mse,<label>_mse_db,...`, one row per
//! iteration, 12 significant digits in plain decimal notation, LF endings.

use std::fmt::Write as _;
use std::path::Path;

use sparse_adapt::MseTrajectory;

use crate::error::{CliError, Result};

/// Formats `v` with 12 significant digits without an exponent.
pub fn format_decimal(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0.00000000000".into();
    }
    // correctly rounded scientific form: [-]d.ddddddddddde[-]x
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let mut out = String::from(sign);
    if exp < 0 {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            for _ in digits.len()..int_len {
                out.push('0');
            }
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    out
}

/// Renders the CSV text. All trajectories must be non-empty and equally long.
pub fn format_csv(trajectories: &[MseTrajectory]) -> Result<String> {
    let len = match trajectories.first() {
        Some(t) => t.per_iteration_mse.len(),
        None => return Err(CliError::validation("no trajectories to write")),
    };
    if len == 0 {
        return Err(CliError::validation(format!(
            "trajectory {} is empty",
            trajectories[0].algorithm_label
        )));
    }
    if let Some(t) = trajectories.iter().find(|t| {
        t.per_iteration_mse.len() != len || t.per_iteration_mse_db.len() != len
    }) {
        return Err(CliError::validation(format!(
            "trajectory {} has {} points, expected {len}",
            t.algorithm_label,
            t.per_iteration_mse.len()
        )));
    }

    let mut out = String::from("iteration");
    for t in trajectories {
        let _ = write!(out, ",{0}_mse,{0}_mse_db", t.algorithm_label);
    }
    out.push('\n');
    for k in 0..len {
        let _ = write!(out, "{}", k + 1);
        for t in trajectories {
            out.push(',');
            out.push_str(&format_decimal(t.per_iteration_mse[k]));
            out.push(',');
            out.push_str(&format_decimal(t.per_iteration_mse_db[k]));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(trajectories: &[MseTrajectory], path: &Path) -> Result<()> {
    let text = format_csv(trajectories)?;
    crate::write_file(path, text.as_bytes())
}

/// Reads back the linear MSE columns of a CSV produced by [`write_csv`].
pub fn read_mse_columns(text: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::validation("empty CSV"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let mut out: Vec<(String, Vec<f64>)> = cols
        .iter()
        .skip(1)
        .step_by(2)
        .map(|c| (c.trim_end_matches("_mse").to_string(), Vec::new()))
        .collect();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(CliError::validation(format!("ragged CSV row `{line}`")));
        }
        for (i, col) in out.iter_mut().enumerate() {
            let v = fields[1 + 2 * i]
                .parse()
                .map_err(|_| CliError::validation(format!("bad number `{}`", fields[1 + 2 * i])))?;
            col.1.push(v);
        }
    }
    Ok(out)
}
