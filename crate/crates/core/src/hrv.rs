//! Time-domain HRV metrics and RR artifact rejection.

use thiserror::Error;

use crate::samples::RrSample;

/// Physiologically plausible RR range in milliseconds (inclusive).
pub const RR_VALID_MS: (f64, f64) = (300.0, 2000.0);

/// Largest accepted relative change against the previous retained interval.
pub const MAX_SUCCESSIVE_CHANGE: f64 = 0.20;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum HrvError {
    #[error("need at least 2 RR intervals, got {0}")]
    InsufficientData(usize),
}

/// Removes out-of-range intervals and ectopic-looking jumps.
///
/// A sample is kept when its interval lies in [`RR_VALID_MS`] and differs
/// from the last *retained* interval by at most [`MAX_SUCCESSIVE_CHANGE`].
/// The output may be empty; callers decide what that means.
pub fn reject_artifacts(rr: &[RrSample]) -> Vec<RrSample> {
    let (lo, hi) = RR_VALID_MS;
    let mut out: Vec<RrSample> = Vec::with_capacity(rr.len());
    for s in rr {
        if !(lo..=hi).contains(&s.rr) {
            continue;
        }
        if let Some(prev) = out.last() {
            if (s.rr - prev.rr).abs() > MAX_SUCCESSIVE_CHANGE * prev.rr {
                continue;
            }
        }
        out.push(*s);
    }
    out
}

/// Root mean square of successive differences.
pub fn compute_rmssd(rr: &[f64]) -> Result<f64, HrvError> {
    if rr.len() < 2 {
        return Err(HrvError::InsufficientData(rr.len()));
    }
    let sum_sq: f64 = rr.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((sum_sq / (rr.len() - 1) as f64).sqrt())
}

/// Population standard deviation of the intervals.
///
/// Accumulation runs over a sorted copy, so the result is bit-identical for
/// every ordering of the input.
pub fn compute_sdnn(rr: &[f64]) -> Result<f64, HrvError> {
    if rr.len() < 2 {
        return Err(HrvError::InsufficientData(rr.len()));
    }
    if rr.iter().all(|&x| x == rr[0]) {
        return Ok(0.0);
    }
    let mut sorted = rr.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt())
}
