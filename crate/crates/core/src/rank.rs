//! Sequential determination of the number of common trends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::TimeSeriesPanel;
use crate::rtest::{phi_statistic, run_test, RandTestConfig};
use crate::spectra::{panel_spectrum, EigenSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelKind {
    OverT,
    OverLogT,
    OverN,
    Fixed(f64),
}

/// Per-test level as a function of the sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSchedule {
    pub kind: LevelKind,
    pub base: f64,
}

impl Default for LevelSchedule {
    fn default() -> Self {
        Self {
            kind: LevelKind::OverT,
            base: 0.05,
        }
    }
}

impl LevelSchedule {
    pub fn new(kind: LevelKind) -> Self {
        Self { kind, base: 0.05 }
    }
}

pub fn resolve_alpha(schedule: &LevelSchedule, t_len: usize, n_dim: usize) -> Result<f64> {
    let alpha = match schedule.kind {
        LevelKind::OverT => schedule.base / t_len as f64,
        LevelKind::OverLogT => schedule.base / (t_len as f64).ln(),
        LevelKind::OverN => schedule.base / n_dim as f64,
        LevelKind::Fixed(a) => a,
    };
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(Error::InvalidLevel(alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    BottomUp,
    TopDown,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BottomUp => "bottom-up",
            Algorithm::TopDown => "top-down",
        }
    }
}

/// One executed test. `statistic` is Θ for single-shot tests and the
/// acceptance fraction Q under the strong rule; `threshold` is the matching
/// critical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrailStep {
    pub j: usize,
    pub phi_log: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEstimate {
    pub m_hat: usize,
    pub algorithm: Algorithm,
    pub trail: Vec<TrailStep>,
    pub alpha_used: f64,
}

fn test_step(
    spectrum: &EigenSpectrum,
    t_len: usize,
    config: &RandTestConfig,
    j: usize,
) -> Result<TrailStep> {
    let phi = phi_statistic(spectrum.lambda(j), t_len, config.kappa)?;
    let r = run_test(config, j, phi)?;
    let (statistic, threshold) = match (r.q_strong, r.strong_threshold) {
        (Some(q), Some(th)) => (q, th),
        _ => (r.theta_big, r.c_alpha),
    };
    Ok(TrailStep {
        j,
        phi_log: phi.0,
        statistic,
        threshold,
        reject: r.reject,
    })
}

fn prepare(
    spectrum: &EigenSpectrum,
    t_len: usize,
    config: &RandTestConfig,
    schedule: &LevelSchedule,
) -> Result<RandTestConfig> {
    if spectrum.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let alpha = resolve_alpha(schedule, t_len, spectrum.len())?;
    let cfg = config.with_alpha(alpha);
    cfg.validate()?;
    Ok(cfg)
}

/// Test `m >= 1, 2, …` upward; the first rejection at `j` gives `m̂ = j − 1`.
pub fn estimate_bottom_up(
    spectrum: &EigenSpectrum,
    t_len: usize,
    config: &RandTestConfig,
    schedule: &LevelSchedule,
) -> Result<RankEstimate> {
    let cfg = prepare(spectrum, t_len, config, schedule)?;
    let n = spectrum.len();
    let mut trail = Vec::new();
    let mut m_hat = n;
    for j in 1..=n {
        let step = test_step(spectrum, t_len, &cfg, j)?;
        let reject = step.reject;
        trail.push(step);
        if reject {
            m_hat = j - 1;
            break;
        }
    }
    Ok(RankEstimate {
        m_hat,
        algorithm: Algorithm::BottomUp,
        trail,
        alpha_used: cfg.alpha,
    })
}

/// Test `m >= N, N−1, …` downward; the first non-rejection at `j` gives
/// `m̃ = j`, and `m̃ = 0` when every test rejects.
pub fn estimate_top_down(
    spectrum: &EigenSpectrum,
    t_len: usize,
    config: &RandTestConfig,
    schedule: &LevelSchedule,
) -> Result<RankEstimate> {
    let cfg = prepare(spectrum, t_len, config, schedule)?;
    let n = spectrum.len();
    let mut trail = Vec::new();
    let mut m_hat = 0;
    for j in (1..=n).rev() {
        let step = test_step(spectrum, t_len, &cfg, j)?;
        let reject = step.reject;
        trail.push(step);
        if !reject {
            m_hat = j;
            break;
        }
    }
    Ok(RankEstimate {
        m_hat,
        algorithm: Algorithm::TopDown,
        trail,
        alpha_used: cfg.alpha,
    })
}

pub fn estimate(
    spectrum: &EigenSpectrum,
    t_len: usize,
    config: &RandTestConfig,
    schedule: &LevelSchedule,
    algorithm: Algorithm,
) -> Result<RankEstimate> {
    match algorithm {
        Algorithm::BottomUp => estimate_bottom_up(spectrum, t_len, config, schedule),
        Algorithm::TopDown => estimate_top_down(spectrum, t_len, config, schedule),
    }
}

/// Panel → spectrum → rank.
pub fn estimate_panel(
    panel: &TimeSeriesPanel,
    ridge: f64,
    config: &RandTestConfig,
    schedule: &LevelSchedule,
    algorithm: Algorithm,
) -> Result<(EigenSpectrum, RankEstimate)> {
    let spectrum = panel_spectrum(panel, ridge)?;
    let est = estimate(&spectrum, panel.t_len(), config, schedule, algorithm)?;
    Ok((spectrum, est))
}
