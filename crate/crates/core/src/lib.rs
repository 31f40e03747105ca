//! Estimation of the number of common stochastic trends in possibly
//! heavy-tailed, heteroskedastic multivariate time series.
//!
//! The pipeline is
//! [`preprocess`] → [`spectra`] (eigenvalues of `S00⁻¹ S11`) →
//! [`rtest`] (randomized test of `m ≥ j`) → [`rank`] (sequential estimate of
//! `m`) → [`trends`] (principal-component loadings and trends).
//! [`simulate`] and [`harness`] generate synthetic panels and aggregate
//! Monte Carlo frequency tables; [`diagnostics`] holds the Hill estimator.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod io;
pub mod panel;
pub mod parse;
pub mod preprocess;
pub mod rank;
pub mod rtest;
pub mod seeding;
pub mod simulate;
pub mod spectra;
pub mod trends;

pub use error::{Error, Result};
pub use panel::TimeSeriesPanel;
