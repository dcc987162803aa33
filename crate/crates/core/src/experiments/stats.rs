//! Empirical distribution helpers.

use crate::error::{invalid_arg, Result};

/// Copy of `samples` sorted ascending (total order, NaNs last).
pub fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical CDF: unique sorted values paired with `#{x ≤ value} / n`.
pub fn ecdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(invalid_arg("ecdf of an empty sample"));
    }
    let v = sorted(samples);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = p,
            _ => out.push((*x, p)),
        }
    }
    Ok(out)
}

/// Per-sample CDF values, aligned with the ascending order of `samples`.
///
/// Tied samples share the CDF of their last occurrence, so every sample keeps
/// its own row.
pub fn ecdf_per_sample(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    let points = ecdf(samples)?;
    let mut out = Vec::with_capacity(samples.len());
    let v = sorted(samples);
    let mut j = 0;
    for x in v {
        while points[j].0 != x {
            j += 1;
        }
        out.push((x, points[j].1));
    }
    Ok(out)
}

/// Nearest-rank percentile: the sorted sample at 1-based rank ⌈p·n/100⌉.
pub fn percentile(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid_arg("percentile of an empty sample"));
    }
    if !(p > 0.0 && p < 100.0) {
        return Err(invalid_arg(format!(
            "percentile must lie in (0, 100), got {p}"
        )));
    }
    let v = sorted(samples);
    let rank = (p * v.len() as f64 / 100.0).ceil() as usize;
    Ok(v[rank.clamp(1, v.len()) - 1])
}
