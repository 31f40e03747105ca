//! Monte Carlo experiments over grids of simulation designs.
//!
//! Replication `r` of every grid point uses DGP seed
//! `derive_seed(seed, tag::DGP, r)` and test seed
//! `derive_seed(seed, tag::TEST, r)`; the matrix `D` comes from
//! `d_matrix_seed` and is shared by all replications. Cells are therefore
//! identical whether replications run sequentially or in parallel.

mod grid;
mod tables;

pub use grid::parse_experiment;
pub use tables::{emit_tables, TableFormat};

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{apply_chain, Transform};
use crate::rank::{estimate, Algorithm, LevelSchedule};
use crate::rtest::RandTestConfig;
use crate::seeding::{derive_seed, tag};
use crate::simulate::{simulate_panel, DgpConfig, Innovations, ScaleFn};
use crate::spectra::panel_spectrum;

/// Share of failed replications above which a cell is flagged.
pub const DEGRADED_SHARE: f64 = 0.01;

/// Lists of design parameters; the experiment runs their Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpGrid {
    pub n_dims: Vec<usize>,
    /// Trend counts to simulate; `None` means every `m` in `0..=N`.
    pub m_trends: Option<Vec<usize>>,
    pub t_lens: Vec<usize>,
    pub innovations: Vec<Innovations>,
    pub ar_thetas: Vec<f64>,
    pub scale_fns: Vec<ScaleFn>,
    pub burn_in: usize,
    pub d_matrix_seed: u64,
}

impl Default for DgpGrid {
    fn default() -> Self {
        Self {
            n_dims: vec![3],
            m_trends: None,
            t_lens: vec![100, 200],
            innovations: vec![
                Innovations::PowerLaw(0.5),
                Innovations::PowerLaw(1.0),
                Innovations::PowerLaw(1.5),
                Innovations::PowerLaw(2.0),
            ],
            ar_thetas: vec![0.0],
            scale_fns: vec![ScaleFn::None],
            burn_in: 0,
            d_matrix_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McExperiment {
    pub grid: DgpGrid,
    pub test: RandTestConfig,
    pub schedule: LevelSchedule,
    pub replications: usize,
    pub algorithms: Vec<Algorithm>,
    /// Applied to every simulated panel before estimation.
    pub transforms: Vec<Transform>,
    pub ridge: f64,
    pub seed: u64,
}

impl Default for McExperiment {
    fn default() -> Self {
        Self {
            grid: DgpGrid::default(),
            test: RandTestConfig::default(),
            schedule: LevelSchedule::default(),
            replications: 1000,
            algorithms: vec![Algorithm::BottomUp],
            transforms: Vec::new(),
            ridge: 0.0,
            seed: 1,
        }
    }
}

/// One design in the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub innovations: Innovations,
    pub ar_theta: f64,
    pub scale_fn: ScaleFn,
}

impl GridPoint {
    pub fn dgp(&self, grid: &DgpGrid, seed: u64) -> DgpConfig {
        DgpConfig {
            n_dim: self.n,
            m_trends: self.m,
            t_len: self.t,
            innovations: self.innovations,
            ar_theta: self.ar_theta,
            scale_fn: self.scale_fn.clone(),
            burn_in: grid.burn_in,
            seed,
            d_matrix_seed: grid.d_matrix_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    /// Relative frequency of every `m̂` in `0..=N` among successful runs.
    pub freq_table: BTreeMap<usize, f64>,
    pub me: f64,
    /// Mean squared deviation of `m̂` from `me`.
    pub std_msd: f64,
    /// Square root of `std_msd`.
    pub std_sqrt: f64,
    pub pcw: f64,
    pub replications: usize,
    pub failures: usize,
    pub degraded: bool,
    pub wall_time: f64,
    /// Per-replication estimates; `None` marks a failed replication.
    pub m_hats: Vec<Option<usize>>,
}

impl McCell {
    /// Aggregate per-replication estimates for true trend count `m` in an
    /// `n`-dimensional system.
    pub fn from_estimates(m_hats: Vec<Option<usize>>, m: usize, n: usize, wall_time: f64) -> Self {
        let ok: Vec<usize> = m_hats.iter().flatten().copied().collect();
        let failures = m_hats.len() - ok.len();
        let n_ok = ok.len() as f64;
        let mut counts = vec![0usize; n + 1];
        for &v in &ok {
            counts[v.min(n)] += 1;
        }
        let freq_table: BTreeMap<usize, f64> = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (k, if ok.is_empty() { 0.0 } else { c as f64 / n_ok }))
            .collect();
        let (me, std_msd) = if ok.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let me = ok.iter().map(|&v| v as f64).sum::<f64>() / n_ok;
            let var = ok.iter().map(|&v| (v as f64 - me).powi(2)).sum::<f64>() / n_ok;
            (me, var)
        };
        let pcw = 1.0 - freq_table.get(&m).copied().unwrap_or(0.0);
        Self {
            freq_table,
            me,
            std_msd,
            std_sqrt: std_msd.sqrt(),
            pcw,
            replications: m_hats.len(),
            failures,
            degraded: failures as f64 > DEGRADED_SHARE * m_hats.len() as f64,
            wall_time,
            m_hats,
        }
    }

    pub fn freq(&self, m_hat: usize) -> f64 {
        self.freq_table.get(&m_hat).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub point: GridPoint,
    pub algorithm: Algorithm,
    pub cell: McCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl McExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one algorithm is required".into(),
            ));
        }
        let g = &self.grid;
        if g.n_dims.is_empty()
            || g.t_lens.is_empty()
            || g.innovations.is_empty()
            || g.ar_thetas.is_empty()
            || g.scale_fns.is_empty()
            || g.m_trends.as_ref().is_some_and(Vec::is_empty)
        {
            return Err(Error::InvalidConfig("experiment grid is empty".into()));
        }
        self.test.validate()?;
        for p in self.points() {
            p.dgp(g, 0).validate()?;
        }
        Ok(())
    }

    /// Grid points in the order N, m (descending, as in the printed
    /// tables), T, η, θ, h.
    pub fn points(&self) -> Vec<GridPoint> {
        let g = &self.grid;
        let mut out = Vec::new();
        for &n in &g.n_dims {
            let ms: Vec<usize> = match &g.m_trends {
                Some(ms) => ms.clone(),
                None => (0..=n).rev().collect(),
            };
            for &m in &ms {
                for &t in &g.t_lens {
                    for &innovations in &g.innovations {
                        for &ar_theta in &g.ar_thetas {
                            for scale_fn in &g.scale_fns {
                                out.push(GridPoint {
                                    n,
                                    m,
                                    t,
                                    innovations,
                                    ar_theta,
                                    scale_fn: scale_fn.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// One replication at `point`: one estimate per algorithm, in the order
    /// of `self.algorithms`. Both algorithms see the same panel and the same
    /// test seed.
    pub fn replicate(&self, point: &GridPoint, r: usize) -> Result<Vec<usize>> {
        let dgp = point.dgp(&self.grid, derive_seed(self.seed, tag::DGP, r as u64));
        let panel = apply_chain(&simulate_panel(&dgp)?, &self.transforms)?;
        let spectrum = panel_spectrum(&panel, self.ridge)?;
        let test = RandTestConfig {
            seed: derive_seed(self.seed, tag::TEST, r as u64),
            ..self.test.clone()
        };
        self.algorithms
            .iter()
            .map(|&a| Ok(estimate(&spectrum, panel.t_len(), &test, &self.schedule, a)?.m_hat))
            .collect()
    }
}

pub fn run_experiment(exp: &McExperiment) -> Result<Vec<CellResult>> {
    run_experiment_with(exp, Execution::Parallel)
}

pub fn run_experiment_with(exp: &McExperiment, mode: Execution) -> Result<Vec<CellResult>> {
    exp.validate()?;
    let mut results = Vec::new();
    for point in exp.points() {
        let start = Instant::now();
        let run = |r: usize| exp.replicate(&point, r).ok();
        let per_rep: Vec<Option<Vec<usize>>> = match mode {
            Execution::Sequential => (0..exp.replications).map(run).collect(),
            Execution::Parallel => (0..exp.replications).into_par_iter().map(run).collect(),
        };
        let elapsed = start.elapsed().as_secs_f64();
        for (k, &algorithm) in exp.algorithms.iter().enumerate() {
            let m_hats = per_rep.iter().map(|o| o.as_ref().map(|v| v[k])).collect();
            results.push(CellResult {
                point: point.clone(),
                algorithm,
                cell: McCell::from_estimates(m_hats, point.m, point.n, elapsed),
            });
        }
    }
    Ok(results)
}
