//! Monte Carlo data-generating process: `y_t = A y_{t−1} + ε_t` with
//! `A = I − P P'`, so that `A` keeps exactly `m` unit roots.
//!
//! `P` here is the N×(N−m) orthonormal matrix spanning the stationary
//! directions. It is unrelated to the trend loadings estimated in
//! [`crate::trends`].

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::TimeSeriesPanel;
use crate::seeding::{stream_rng, tag};

const D_ATTEMPTS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Innovations {
    /// `(1 − v)^{−1/η}` with `v ~ U[0, 1)`, then centered.
    PowerLaw(f64),
    Gaussian,
}

impl Innovations {
    /// Label used in output tables: η, or "gauss".
    pub fn label(&self) -> String {
        match self {
            Innovations::PowerLaw(eta) => format_eta(*eta),
            Innovations::Gaussian => "gauss".into(),
        }
    }
}

fn format_eta(eta: f64) -> String {
    if eta.fract() == 0.0 {
        format!("{eta:.0}")
    } else {
        format!("{eta}")
    }
}

/// Deterministic scale function `h(r)`, `r ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleFn {
    #[default]
    None,
    /// `(breakpoint, level)` pairs: `level_i` applies on `[c_{i−1}, c_i)`,
    /// with `c_0 = 0`. Values past the last breakpoint keep the last level.
    PiecewiseSteps(Vec<(f64, f64)>),
    /// `h(r) = Σ_k coeffs[k] r^k`.
    Polynomial(Vec<f64>),
}

impl ScaleFn {
    pub fn validate(&self) -> Result<()> {
        match self {
            ScaleFn::None => Ok(()),
            ScaleFn::PiecewiseSteps(steps) => {
                if steps.is_empty() {
                    return Err(Error::InvalidDgp(
                        "piecewise scale needs at least one step".into(),
                    ));
                }
                let mut prev = 0.0;
                for (k, &(c, level)) in steps.iter().enumerate() {
                    if !(0.0..=1.0).contains(&c) || (k > 0 && c <= prev) {
                        return Err(Error::InvalidDgp(
                            "breakpoints must be increasing within [0, 1]".into(),
                        ));
                    }
                    if !(level > 0.0 && level.is_finite()) {
                        return Err(Error::InvalidDgp("scale levels must be positive".into()));
                    }
                    prev = c;
                }
                Ok(())
            }
            ScaleFn::Polynomial(coeffs) => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidDgp(
                        "polynomial needs finite coefficients".into(),
                    ));
                }
                let grid = (0..=1000).map(|k| k as f64 / 1000.0);
                let values: Vec<f64> = grid.map(|r| self.eval(r)).collect();
                if values.iter().any(|&h| h < 0.0) {
                    return Err(Error::InvalidDgp(
                        "scale polynomial is negative on [0, 1]".into(),
                    ));
                }
                if values.iter().all(|&h| h == 0.0) {
                    return Err(Error::InvalidDgp(
                        "scale polynomial is identically zero".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            ScaleFn::None => 1.0,
            ScaleFn::PiecewiseSteps(steps) => steps
                .iter()
                .find(|&&(c, _)| r < c)
                .or_else(|| steps.last())
                .map_or(1.0, |&(_, level)| level),
            ScaleFn::Polynomial(coeffs) => coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub n_dim: usize,
    pub m_trends: usize,
    pub t_len: usize,
    pub innovations: Innovations,
    /// AR(1) coefficient of the innovation filter.
    pub ar_theta: f64,
    pub scale_fn: ScaleFn,
    /// Discarded initial periods; 0 means the returned panel starts from `y_0 = 0`.
    pub burn_in: usize,
    pub seed: u64,
    /// Seed of the matrix `D`, held fixed across replications.
    pub d_matrix_seed: u64,
}

impl DgpConfig {
    pub fn new(n_dim: usize, m_trends: usize, t_len: usize, innovations: Innovations) -> Self {
        Self {
            n_dim,
            m_trends,
            t_len,
            innovations,
            ar_theta: 0.0,
            scale_fn: ScaleFn::None,
            burn_in: 0,
            seed: 0,
            d_matrix_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dim == 0 {
            return Err(Error::InvalidDgp("n_dim must be positive".into()));
        }
        if self.m_trends > self.n_dim {
            return Err(Error::InvalidDgp(format!(
                "m_trends {} exceeds n_dim {}",
                self.m_trends, self.n_dim
            )));
        }
        if self.t_len == 0 {
            return Err(Error::InvalidDgp("t_len must be positive".into()));
        }
        if let Innovations::PowerLaw(eta) = self.innovations {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidDgp(format!(
                    "tail index must be positive, got {eta}"
                )));
            }
        }
        if !(self.ar_theta > -1.0 && self.ar_theta < 1.0) {
            return Err(Error::InvalidDgp(format!(
                "ar_theta must lie in (-1, 1), got {}",
                self.ar_theta
            )));
        }
        self.scale_fn.validate()
    }
}

/// `A = I − P P'` with `P = D (D'D)^{−1/2}` and `D = 1 + d`, `d` standard
/// normal N×(N−m) drawn from `d_matrix_seed`.
#[allow(non_snake_case)]
pub fn make_A(n_dim: usize, m_trends: usize, d_matrix_seed: u64) -> Result<DMatrix<f64>> {
    if m_trends > n_dim {
        return Err(Error::InvalidDgp(format!(
            "m_trends {m_trends} exceeds n_dim {n_dim}"
        )));
    }
    let k = n_dim - m_trends;
    let identity = DMatrix::identity(n_dim, n_dim);
    if k == 0 {
        return Ok(identity);
    }
    for attempt in 0..D_ATTEMPTS {
        let mut rng = stream_rng(d_matrix_seed, (tag::D_MATRIX << 32) | attempt);
        let d = DMatrix::from_fn(n_dim, k, |_, _| 1.0 + rng.sample::<f64, _>(StandardNormal));
        let Some(chol) = Cholesky::new(d.transpose() * &d) else {
            continue;
        };
        // P' = L^{-1} D'
        let Some(p_t) = chol.l().solve_lower_triangular(&d.transpose()) else {
            continue;
        };
        let p = p_t.transpose();
        let mut a = identity - &p * p.transpose();
        // exact symmetry
        a = 0.5 * (&a + a.transpose());
        return Ok(a);
    }
    Err(Error::RankDeficientD {
        attempts: D_ATTEMPTS as usize,
    })
}

/// Innovations for `burn_in + T` periods, an N×(burn_in + T) matrix.
///
/// Power-law draws are centered by `η/(η−1)` when `η > 1` and by the
/// per-series sample mean otherwise. The AR(1) filter is applied next, then
/// each column is scaled by `h(r)` with `r = t/T` on the retained periods
/// and `r = 0` during burn-in.
pub fn draw_innovations<R: Rng + ?Sized>(config: &DgpConfig, rng: &mut R) -> Result<DMatrix<f64>> {
    config.validate()?;
    let n = config.n_dim;
    let total = config.burn_in + config.t_len;
    let mut e = DMatrix::zeros(n, total);
    match config.innovations {
        Innovations::Gaussian => {
            for t in 0..total {
                for i in 0..n {
                    e[(i, t)] = rng.sample(StandardNormal);
                }
            }
        }
        Innovations::PowerLaw(eta) => {
            let inv = -1.0 / eta;
            for t in 0..total {
                for i in 0..n {
                    let v: f64 = rng.random();
                    e[(i, t)] = (1.0 - v).powf(inv);
                }
            }
            if eta > 1.0 {
                e.add_scalar_mut(-eta / (eta - 1.0));
            } else {
                for mut row in e.row_iter_mut() {
                    let mean = row.sum() / total as f64;
                    row.add_scalar_mut(-mean);
                }
            }
        }
    }
    if config.ar_theta != 0.0 {
        for i in 0..n {
            for t in 1..total {
                e[(i, t)] += config.ar_theta * e[(i, t - 1)];
            }
        }
    }
    if config.scale_fn != ScaleFn::None {
        for t in 0..total {
            let r = (t + 1).saturating_sub(config.burn_in) as f64 / config.t_len as f64;
            let h = config.scale_fn.eval(r);
            e.column_mut(t).scale_mut(h);
        }
    }
    Ok(e)
}

/// Generate a panel from `y_0 = 0`, discarding the first `burn_in` periods.
pub fn simulate_panel(config: &DgpConfig) -> Result<TimeSeriesPanel> {
    config.validate()?;
    let a = make_A(config.n_dim, config.m_trends, config.d_matrix_seed)?;
    let mut rng = stream_rng(config.seed, tag::DGP);
    let eps = draw_innovations(config, &mut rng)?;
    TimeSeriesPanel::new(iterate_var(&a, &eps, config.burn_in))
}

/// Run `y_t = A y_{t−1} + ε_t` over every column of `eps` from `y_0 = 0`
/// and keep all but the first `skip` periods.
pub fn iterate_var(a: &DMatrix<f64>, eps: &DMatrix<f64>, skip: usize) -> DMatrix<f64> {
    let n = eps.nrows();
    let total = eps.ncols();
    let mut out = DMatrix::zeros(n, total - skip);
    let mut y = nalgebra::DVector::zeros(n);
    for t in 0..total {
        y = a * &y + eps.column(t);
        if t >= skip {
            out.set_column(t - skip, &y);
        }
    }
    out
}
