//! Randomized one-shot test of `H0: m >= j`.
//!
//! The statistic `φ = exp(T^{-κ} λ_j) − 1` diverges under the null and
//! vanishes under the alternative. It is never materialized: only the
//! indicators `I(φ ξ ≤ u)` enter the test, and those are computed exactly
//! from `L = log(1 + φ)`.

mod chisq;
mod quadrature;

pub use chisq::{chi2_1_cdf, chi2_1_critical, chi2_1_sf};
pub use quadrature::{
    gauss_hermite, hermite, hermite_roots, standard_normal_rule, Node, Quadrature,
};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{stream_rng, test_stream};

/// Above this value of `log(1 + φ)` the statistic is treated as infinite.
pub const SATURATION: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandTestConfig {
    pub kappa: f64,
    pub m_draws: usize,
    pub quadrature: Quadrature,
    pub alpha: f64,
    /// Strong-rule repetitions; 1 means a single randomized test.
    pub s_reps: usize,
    pub seed: u64,
}

impl Default for RandTestConfig {
    fn default() -> Self {
        Self {
            kappa: 1e-4,
            m_draws: 100,
            quadrature: Quadrature::GH2,
            alpha: 0.05,
            s_reps: 1,
            seed: 0,
        }
    }
}

impl RandTestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "kappa must lie in (0,1), got {}",
                self.kappa
            )));
        }
        if self.m_draws == 0 {
            return Err(Error::InvalidConfig("m_draws must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidLevel(self.alpha));
        }
        if self.s_reps == 0 {
            return Err(Error::InvalidConfig("s_reps must be positive".into()));
        }
        self.quadrature.nodes()?;
        Ok(())
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }
}

/// `log(1 + φ)`, the only form in which φ is stored.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogPhi(pub f64);

impl LogPhi {
    /// From `φ` itself, for callers that hold a finite φ.
    pub fn from_phi(phi: f64) -> Self {
        LogPhi(phi.ln_1p())
    }

    pub fn infinite() -> Self {
        LogPhi(f64::INFINITY)
    }

    pub fn is_saturated(self) -> bool {
        self.0 > SATURATION
    }

    /// φ, or `+∞` on the saturated branch.
    pub fn phi(self) -> f64 {
        if self.is_saturated() {
            f64::INFINITY
        } else {
            self.0.exp_m1()
        }
    }

    fn cutoff(self, u: f64) -> Cutoff {
        if self.0 == 0.0 {
            Cutoff::Constant(0.0 <= u)
        } else if self.is_saturated() {
            Cutoff::Below(0.0)
        } else {
            Cutoff::Below(u / self.0.exp_m1())
        }
    }
}

/// `I(φ ξ ≤ u)` rewritten as a condition on ξ alone.
#[derive(Debug, Clone, Copy)]
enum Cutoff {
    Constant(bool),
    Below(f64),
}

impl Cutoff {
    fn count(self, xi: &[f64]) -> usize {
        match self {
            Cutoff::Constant(true) => xi.len(),
            Cutoff::Constant(false) => 0,
            Cutoff::Below(c) => xi.iter().filter(|&&x| x <= c).count(),
        }
    }
}

/// `L = T^{-κ} λ_j`.
pub fn phi_statistic(lambda_j: f64, t_len: usize, kappa: f64) -> Result<LogPhi> {
    if lambda_j < 0.0 || lambda_j.is_nan() {
        return Err(Error::NegativeEigenvalue(lambda_j));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "kappa must lie in (0,1), got {kappa}"
        )));
    }
    Ok(LogPhi(scaled_eigenvalue(lambda_j, t_len as f64, kappa)))
}

/// `T^{-κ} λ` for a real-valued sample length.
pub fn scaled_eigenvalue(lambda: f64, t: f64, kappa: f64) -> f64 {
    t.powf(-kappa) * lambda
}

/// `θ(u) = (2/√M) Σ_i (I(φ ξ_i ≤ u) − ½)`.
pub fn theta_small(phi: LogPhi, u: f64, xi: &[f64]) -> f64 {
    let m = xi.len() as f64;
    let hits = phi.cutoff(u).count(xi) as f64;
    (2.0 * hits - m) / m.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandTestResult {
    pub j: usize,
    pub phi_log: f64,
    pub theta_by_node: Vec<f64>,
    pub theta_big: f64,
    pub c_alpha: f64,
    pub reject: bool,
    pub q_strong: Option<f64>,
    pub strong_threshold: Option<f64>,
}

/// One randomized test. A single artificial sample of size M is drawn from
/// `rng` and shared by every quadrature node.
pub fn theta_big<R: Rng + ?Sized>(
    config: &RandTestConfig,
    j: usize,
    phi: LogPhi,
    rng: &mut R,
) -> Result<RandTestResult> {
    config.validate()?;
    let nodes = config.quadrature.nodes()?;
    let c_alpha = chi2_1_critical(config.alpha);
    Ok(theta_big_with(&nodes, c_alpha, config.m_draws, j, phi, rng))
}

fn theta_big_with<R: Rng + ?Sized>(
    nodes: &[Node],
    c_alpha: f64,
    m_draws: usize,
    j: usize,
    phi: LogPhi,
    rng: &mut R,
) -> RandTestResult {
    let xi: Vec<f64> = (0..m_draws).map(|_| rng.sample(StandardNormal)).collect();
    let theta_by_node: Vec<f64> = nodes.iter().map(|n| theta_small(phi, n.u, &xi)).collect();
    let big: f64 = nodes
        .iter()
        .zip(&theta_by_node)
        .map(|(n, t)| n.weight * t * t)
        .sum();
    RandTestResult {
        j,
        phi_log: phi.0,
        theta_by_node,
        theta_big: big,
        c_alpha,
        reject: big > c_alpha,
        q_strong: None,
        strong_threshold: None,
    }
}

/// Acceptance threshold for the fraction of non-rejections out of `s` runs:
/// `(1−α) − √(α(1−α)) √(2 ln ln S / S)`, with `ln ln S` floored at zero.
pub fn strong_threshold(alpha: f64, s: usize) -> f64 {
    let s_f = s as f64;
    let lnln = if s_f > 1.0 {
        s_f.ln().ln().max(0.0)
    } else {
        0.0
    };
    (1.0 - alpha) - (alpha * (1.0 - alpha)).sqrt() * (2.0 * lnln / s_f).sqrt()
}

/// Repeat the test `S = config.s_reps` times and decide with the strong
/// rule. Repetition `s` of hypothesis `j` reads stream
/// [`test_stream`]`(j, s)` of `config.seed`, so repetitions may run in any
/// order. The reported per-node values are those of the first repetition.
pub fn strong_rule(config: &RandTestConfig, j: usize, phi: LogPhi) -> Result<RandTestResult> {
    config.validate()?;
    if config.s_reps < 2 {
        return Err(Error::InvalidConfig("strong rule needs s_reps >= 2".into()));
    }
    let nodes = config.quadrature.nodes()?;
    let c_alpha = chi2_1_critical(config.alpha);
    let runs: Vec<RandTestResult> = (0..config.s_reps)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(config.seed, test_stream(j, s));
            theta_big_with(&nodes, c_alpha, config.m_draws, j, phi, &mut rng)
        })
        .collect();
    let accepted = runs.iter().filter(|r| r.theta_big <= c_alpha).count();
    let q = accepted as f64 / config.s_reps as f64;
    let threshold = strong_threshold(config.alpha, config.s_reps);
    let mut first = runs.into_iter().next().expect("s_reps >= 2");
    first.q_strong = Some(q);
    first.strong_threshold = Some(threshold);
    first.reject = q < threshold;
    Ok(first)
}

/// Test `H0: m >= j`: single-shot when `s_reps == 1` (stream
/// `test_stream(j, 0)`), strong rule otherwise.
pub fn run_test(config: &RandTestConfig, j: usize, phi: LogPhi) -> Result<RandTestResult> {
    if config.s_reps > 1 {
        strong_rule(config, j, phi)
    } else {
        let mut rng = stream_rng(config.seed, test_stream(j, 0));
        theta_big(config, j, phi, &mut rng)
    }
}
