//! CSV serialization of the three result tables, and empirical CDF
//! points. Numbers are written with Rust's shortest round-trip float
//! formatting, so equal values always serialize to equal bytes;
//! `inf` and `NaN` appear literally.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::harness::experiment::{BoundsRow, RateRow, TraceRow};

pub const RATES_HEADER: &str = "drop_id,seed,algorithm,mode,threshold_db,edge_snr_db,n_t,num_users,expected_rate_bps_hz,actual_rate_bps_hz,iterations,restarts_used,wall_ms,csi_coeffs,precoder_weights";
pub const BOUNDS_HEADER: &str = "drop_id,mode,bb_ub,bb_lb,ssocp_rate,rounds,feasibility_calls";
pub const TRACE_HEADER: &str = "drop_id,algorithm,restart,iteration,objective";

pub fn write_rates<W: Write>(out: &mut W, rows: &[RateRow]) -> io::Result<()> {
    writeln!(out, "{RATES_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.drop_id,
            r.seed,
            r.algorithm,
            r.mode,
            r.threshold_db,
            r.edge_snr_db,
            r.n_t,
            r.num_users,
            r.expected_rate_bps_hz,
            r.actual_rate_bps_hz,
            r.iterations,
            r.restarts_used,
            r.wall_ms,
            r.csi_coeffs,
            r.precoder_weights,
        )?;
    }
    Ok(())
}

pub fn write_bounds<W: Write>(out: &mut W, rows: &[BoundsRow]) -> io::Result<()> {
    writeln!(out, "{BOUNDS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.drop_id, r.mode, r.bb_ub, r.bb_lb, r.ssocp_rate, r.rounds, r.feasibility_calls,
        )?;
    }
    Ok(())
}

pub fn write_trace<W: Write>(out: &mut W, rows: &[TraceRow]) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.drop_id, r.algorithm, r.restart, r.iteration, r.objective,
        )?;
    }
    Ok(())
}

/// Empirical CDF of `samples`: sorted `(value, probability)` pairs with
/// probabilities `(i+1)/n`. Rejects empty and non-numeric input.
pub fn cdf_points(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::InvalidInput(
            "cannot build a CDF from zero samples".into(),
        ));
    }
    if samples.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("CDF samples must not be NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, value)| (value, (i + 1) as f64 / n))
        .collect())
}
