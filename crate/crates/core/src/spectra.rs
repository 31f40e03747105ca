//! Second-moment matrices of levels and differences and the spectrum of
//! the pencil `S11 - λ S00`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::TimeSeriesPanel;

/// Relative size below which negative eigenvalues are treated as rounding.
const NEG_CLAMP: f64 = 1e-8;

/// `s11 = Σ_{t=1..T} y_t y_t'` and `s00 = Σ_{t=2..T} Δy_t Δy_t'`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPair {
    pub s11: DMatrix<f64>,
    pub s00: DMatrix<f64>,
    pub t_used_levels: usize,
    pub t_used_diffs: usize,
}

/// Eigenvalues of `S00^{-1} S11` in descending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSpectrum {
    pub lambdas: Vec<f64>,
    pub cond_s00: f64,
}

impl EigenSpectrum {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// The j-th largest eigenvalue, 1-based.
    pub fn lambda(&self, j: usize) -> f64 {
        self.lambdas[j - 1]
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

pub fn moment_matrices(panel: &TimeSeriesPanel) -> Result<MomentPair> {
    panel.require_estimable()?;
    let y = panel.values();
    let dy = panel.differences();
    let mut s11 = y * y.transpose();
    let mut s00 = &dy * dy.transpose();
    symmetrize(&mut s11);
    symmetrize(&mut s00);
    Ok(MomentPair {
        s11,
        s00,
        t_used_levels: y.ncols(),
        t_used_diffs: dy.ncols(),
    })
}

/// Spectrum of `S00^{-1} S11`, computed through the symmetric matrix
/// `S00^{-1/2} S11 S00^{-1/2}`.
///
/// `ridge` is added to the diagonal of `S00` before inversion. Estimation
/// fails with [`Error::SingularS00`] instead of regularizing silently.
pub fn relative_spectrum(mp: &MomentPair, ridge: f64) -> Result<EigenSpectrum> {
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ridge must be >= 0, got {ridge}"
        )));
    }
    let n = mp.s00.nrows();
    let mut s00 = mp.s00.clone();
    for i in 0..n {
        s00[(i, i)] += ridge;
    }
    let eig = SymmetricEigen::new(s00);
    let min_eig = eig.eigenvalues.min();
    let max_eig = eig.eigenvalues.max();
    let threshold = n as f64 * f64::EPSILON * mp.s00.trace();
    if min_eig.is_nan() || min_eig <= threshold {
        return Err(Error::SingularS00 { min_eig, threshold });
    }

    let inv_sqrt = eig.eigenvalues.map(|d| 1.0 / d.sqrt());
    let v = &eig.eigenvectors;
    let w = v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose();
    let mut c = &w * &mp.s11 * &w;
    symmetrize(&mut c);

    let mut lambdas: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let scale = lambdas.first().copied().unwrap_or(0.0).max(0.0);
    for l in &mut lambdas {
        if *l < 0.0 && *l >= -NEG_CLAMP * scale {
            *l = 0.0;
        }
    }
    Ok(EigenSpectrum {
        lambdas,
        cond_s00: max_eig / min_eig,
    })
}

/// Spectrum of the panel's pencil from the data rather than the moments.
///
/// With `ΔY' = QR` (stacked on `√ridge I`), `R'R = S00 + ridge I` and the
/// eigenvalues are the squared singular values of `R^{-T} Y`. This avoids
/// squaring the condition number of `S00`, which matters when one extreme
/// innovation dominates the differences.
pub fn panel_spectrum(panel: &TimeSeriesPanel, ridge: f64) -> Result<EigenSpectrum> {
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ridge must be >= 0, got {ridge}"
        )));
    }
    panel.require_estimable()?;
    let n = panel.n_series();
    let dy = panel.differences();
    let rows = dy.ncols();
    let extra = if ridge > 0.0 { n } else { 0 };
    let d = DMatrix::from_fn(rows + extra, n, |r, c| {
        if r < rows {
            dy[(c, r)]
        } else if r - rows == c {
            ridge.sqrt()
        } else {
            0.0
        }
    });
    if d.nrows() < n {
        return Err(Error::SingularS00 {
            min_eig: 0.0,
            threshold: 0.0,
        });
    }
    let r = d.qr().r();
    let sv = r.singular_values();
    let (s_min, s_max) = (sv.min(), sv.max());
    let floor = n as f64 * f64::EPSILON * r.norm();
    if s_min.is_nan() || s_min <= floor {
        return Err(Error::SingularS00 {
            min_eig: s_min * s_min,
            threshold: floor * floor,
        });
    }
    let b = r
        .transpose()
        .solve_lower_triangular(panel.values())
        .ok_or(Error::SingularS00 {
            min_eig: s_min * s_min,
            threshold: floor * floor,
        })?;
    let mut lambdas: Vec<f64> = b.singular_values().iter().map(|s| s * s).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok(EigenSpectrum {
        lambdas,
        cond_s00: (s_max / s_min).powi(2),
    })
}
