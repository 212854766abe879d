//! Dyadic residual sweeps and log-log order fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::dyadic_partition;

/// Residuals below this are treated as floating-point noise.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Residual magnitudes per dyadic scale with a fitted power law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub kind: String,
    pub f_id: String,
    /// Window lengths, decreasing.
    pub scales: Vec<f64>,
    /// Largest residual over all window positions at each scale.
    pub max_residuals: Vec<f64>,
    /// Fitted exponent `a` in `residual ~ C scale^a`.
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    /// Set when fewer than two scales sit above the noise floor.
    pub below_noise_floor: bool,
}

impl ResidualReport {
    /// `slope > threshold` with a fit of quality at least `min_r2`.
    pub fn passes(&self, threshold: f64, min_r2: f64) -> bool {
        match (self.slope, self.r_squared) {
            (Some(a), Some(r2)) => a > threshold && r2 >= min_r2,
            _ => false,
        }
    }
}

/// Least-squares fit of `ln residual` against `ln scale`, skipping scales
/// under the noise floor.
pub fn fit_order(scales: &[f64], residuals: &[f64], kind: &str, f_id: &str) -> ResidualReport {
    let points: Vec<(f64, f64)> = scales
        .iter()
        .zip(residuals)
        .filter(|(h, r)| **h > 0.0 && r.is_finite() && **r >= NOISE_FLOOR)
        .map(|(h, r)| (h.ln(), r.ln()))
        .collect();
    let (slope, r_squared) = if points.len() >= 2 {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        let a = sxy / sxx;
        let r2 = if syy == 0.0 {
            1.0
        } else {
            (sxy * sxy) / (sxx * syy)
        };
        (Some(a), Some(r2))
    } else {
        (None, None)
    };
    ResidualReport {
        kind: kind.to_string(),
        f_id: f_id.to_string(),
        scales: scales.to_vec(),
        max_residuals: residuals.to_vec(),
        slope,
        r_squared,
        below_noise_floor: slope.is_none(),
    }
}

/// The `2^level` dyadic windows of `[start, end]`.
pub fn dyadic_windows(start: f64, end: f64, level: u32) -> Vec<(f64, f64)> {
    dyadic_partition(start, end, level)
        .windows(2)
        .map(|w| (w[0], w[1]))
        .collect()
}

/// For each level, evaluates `measure(s, t)` on every dyadic window in
/// parallel and keeps the componentwise maximum. Returns
/// `(scales, maxima[level][component])`.
pub fn dyadic_sweep<M>(
    start: f64,
    end: f64,
    levels: &[u32],
    measure: M,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    M: Fn(f64, f64) -> Result<Vec<f64>> + Sync,
{
    if levels.is_empty() {
        return Err(Error::InvalidConfig("empty level range".into()));
    }
    let mut scales = Vec::with_capacity(levels.len());
    let mut maxima = Vec::with_capacity(levels.len());
    for &level in levels {
        let windows = dyadic_windows(start, end, level);
        let values = windows
            .par_iter()
            .map(|&(s, t)| measure(s, t))
            .collect::<Result<Vec<_>>>()?;
        let mut max = vec![0.0f64; values.first().map_or(0, Vec::len)];
        for v in &values {
            for (m, x) in max.iter_mut().zip(v) {
                *m = m.max(x.abs());
            }
        }
        scales.push((end - start) / (1u64 << level) as f64);
        maxima.push(max);
    }
    Ok((scales, maxima))
}

/// Splits sweep output into one fitted report per component.
pub fn reports_from_sweep(
    scales: &[f64],
    maxima: &[Vec<f64>],
    labels: &[(String, String)],
) -> Vec<ResidualReport> {
    labels
        .iter()
        .enumerate()
        .map(|(c, (kind, f_id))| {
            let column: Vec<f64> = maxima.iter().map(|row| row[c]).collect();
            fit_order(scales, &column, kind, f_id)
        })
        .collect()
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
