//! Principal-component estimates of the common trends and their loadings.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::panel::TimeSeriesPanel;
use crate::spectra::MomentPair;

#[derive(Debug, Clone, PartialEq)]
pub struct TrendDecomposition {
    /// N×m loadings. Row k belongs to series `ordering[k]`.
    pub loadings: DMatrix<f64>,
    /// m×T estimated trends.
    pub trends: DMatrix<f64>,
    /// m×m matrix applied to the raw principal-component trends.
    pub rotation: DMatrix<f64>,
    /// N×T residuals, rows ordered like `loadings`.
    pub residuals: DMatrix<f64>,
    pub identified: bool,
    /// Zero-based series index of every row.
    pub ordering: Vec<usize>,
}

impl TrendDecomposition {
    pub fn m(&self) -> usize {
        self.loadings.ncols()
    }

    /// `loadings · trends + residuals`, the panel in `ordering` row order.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.loadings * &self.trends + &self.residuals
    }
}

/// Flip `v` so its entry of largest magnitude is positive; ties go to the
/// lowest index.
fn normalize_sign(mut v: nalgebra::DVectorViewMut<'_, f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Loadings are the leading `m` unit eigenvectors of `S11`; trends are
/// `x̂_t = P̂' y_t`.
pub fn pc_decompose(
    panel: &TimeSeriesPanel,
    m: usize,
    mp: &MomentPair,
) -> Result<TrendDecomposition> {
    let n = panel.n_series();
    if m == 0 || m > n {
        return Err(Error::InvalidM { m, n });
    }
    let eig = SymmetricEigen::new(mp.s11.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut loadings = DMatrix::zeros(n, m);
    for (k, &idx) in order.iter().take(m).enumerate() {
        loadings.set_column(k, &eig.eigenvectors.column(idx));
        normalize_sign(loadings.column_mut(k));
    }
    let y = panel.values();
    let trends = loadings.transpose() * y;
    let residuals = y - &loadings * &trends;
    Ok(TrendDecomposition {
        loadings,
        trends,
        rotation: DMatrix::identity(m, m),
        residuals,
        identified: false,
        ordering: (0..n).collect(),
    })
}

/// Complete a prefix of distinct zero-based series indices to a permutation.
pub fn complete_ordering(prefix: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut seen = vec![false; n];
    for &i in prefix {
        if i >= n {
            return Err(Error::InvalidOrdering(format!(
                "series index {} out of range 1..={n}",
                i + 1
            )));
        }
        if seen[i] {
            return Err(Error::InvalidOrdering(format!(
                "series {} listed twice",
                i + 1
            )));
        }
        seen[i] = true;
    }
    let mut full = prefix.to_vec();
    full.extend((0..n).filter(|&i| !seen[i]));
    Ok(full)
}

/// Rotate so the loadings of the first `m` series in `ordering` form the
/// identity: `P* = P̂ B⁻¹`, `x* = B x̂` with `B` that leading block.
///
/// `ordering` lists zero-based series indices; at least `m` are required
/// and the rest are appended in natural order.
pub fn identify(dec: &TrendDecomposition, ordering: &[usize]) -> Result<TrendDecomposition> {
    let n = dec.loadings.nrows();
    let m = dec.m();
    if ordering.len() < m {
        return Err(Error::InvalidOrdering(format!(
            "need at least {m} series to identify {m} trends, got {}",
            ordering.len()
        )));
    }
    let ordering = complete_ordering(ordering, n)?;
    // rows of `dec` are already permuted by dec.ordering
    let position: Vec<usize> = {
        let mut pos = vec![0; n];
        for (row, &series) in dec.ordering.iter().enumerate() {
            pos[series] = row;
        }
        ordering.iter().map(|&s| pos[s]).collect()
    };
    let loadings = DMatrix::from_fn(n, m, |r, c| dec.loadings[(position[r], c)]);
    let residuals = DMatrix::from_fn(n, dec.residuals.ncols(), |r, c| {
        dec.residuals[(position[r], c)]
    });

    let block = loadings.rows(0, m).into_owned();
    let det = block.determinant();
    let scale = block.norm().powi(m as i32);
    if det.is_nan() || det.abs() <= 1e-10 * scale {
        return Err(Error::SingularBlock { m, det });
    }
    let inv = block
        .clone()
        .try_inverse()
        .ok_or(Error::SingularBlock { m, det })?;
    let mut identified = &loadings * inv;
    // the leading block is the identity by construction; drop the rounding
    identified.rows_mut(0, m).fill_with_identity();
    Ok(TrendDecomposition {
        loadings: identified,
        trends: &block * &dec.trends,
        rotation: &block * &dec.rotation,
        residuals,
        identified: true,
        ordering,
    })
}

/// Least-squares fit `H = argmin ‖P̂ − P H‖_F` for a reference loading matrix
/// `p` (N×m) and returns `(H, ‖P̂ − P H‖_F)`.
pub fn rotation_fit(p_hat: &DMatrix<f64>, p: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let ptp = p.transpose() * p;
    let h = ptp
        .try_inverse()
        .expect("reference loadings must have full column rank")
        * p.transpose()
        * p_hat;
    let err = (p_hat - p * &h).norm();
    (h, err)
}
