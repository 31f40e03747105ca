//! Tail-index diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub eta_hat: f64,
    pub k_used: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// `round(√n)` order statistics, kept within `[2, n − 1]`.
pub fn default_k(n: usize) -> usize {
    let k = (n as f64).sqrt().round() as usize;
    k.clamp(2, n.saturating_sub(1).max(2))
}

/// Hill estimator on absolute values using the `k` largest observations:
/// `η̂ = [k⁻¹ Σ_{i=1..k} ln(X_(n−i+1) / X_(n−k))]⁻¹`.
///
/// The 95% interval is `η̂ (1 ± 1.96/√k)`. For `k < 4` that lower end would
/// be negative, so it is replaced by `η̂ / (1 + 1.96/√k)`.
pub fn hill_estimator(sample: &[f64], k: usize) -> Result<TailEstimate> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "Hill estimator needs k >= 2, got {k}"
        )));
    }
    let mut abs: Vec<f64> = sample
        .iter()
        .map(|x| x.abs())
        .filter(|&x| x > 0.0 && x.is_finite())
        .collect();
    if abs.len() < k + 1 {
        return Err(Error::InsufficientTail {
            needed: k + 1,
            got: abs.len(),
        });
    }
    abs.sort_by(|a, b| b.total_cmp(a));
    let threshold = abs[k];
    let mean_excess: f64 = abs[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    if mean_excess <= 0.0 {
        return Err(Error::InsufficientTail {
            needed: k + 1,
            got: abs.iter().filter(|&&x| x > threshold).count(),
        });
    }
    let eta_hat = 1.0 / mean_excess;
    let half = Z_95 / (k as f64).sqrt();
    let ci_low = if half < 1.0 {
        eta_hat * (1.0 - half)
    } else {
        eta_hat / (1.0 + half)
    };
    Ok(TailEstimate {
        eta_hat,
        k_used: k,
        ci_low,
        ci_high: eta_hat * (1.0 + half),
    })
}
