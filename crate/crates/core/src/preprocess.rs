//! Deterministic-term handling applied before estimation.
//!
//! All transforms return a fresh panel and leave the input untouched.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::panel::TimeSeriesPanel;

/// Entrywise natural logarithm. Every entry must be strictly positive.
pub fn log_transform(panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
    let v = panel.values();
    for t in 0..v.ncols() {
        for i in 0..v.nrows() {
            if v[(i, t)] <= 0.0 {
                return Err(Error::NonPositiveEntry {
                    series: i,
                    t: t + 1,
                });
            }
        }
    }
    panel.with_values(v.map(f64::ln))
}

/// Subtract each series' time mean.
pub fn demean(panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
    let v = panel.values();
    let t_len = v.ncols() as f64;
    let mut out = v.clone();
    for mut row in out.row_iter_mut() {
        let mean = row.sum() / t_len;
        row.add_scalar_mut(-mean);
    }
    panel.with_values(out)
}

/// Subtract each series' least-squares fit on an intercept and t = 1..T.
pub fn detrend(panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
    let v = panel.values();
    let t_len = v.ncols();
    if t_len < 2 {
        return demean(panel);
    }
    let t_bar = (t_len as f64 + 1.0) / 2.0;
    let centered_t: Vec<f64> = (1..=t_len).map(|t| t as f64 - t_bar).collect();
    let sxx: f64 = centered_t.iter().map(|c| c * c).sum();
    let mut out = DMatrix::zeros(v.nrows(), t_len);
    for i in 0..v.nrows() {
        let mean = v.row(i).sum() / t_len as f64;
        let sxy: f64 = (0..t_len).map(|t| centered_t[t] * (v[(i, t)] - mean)).sum();
        let slope = sxy / sxx;
        for t in 0..t_len {
            out[(i, t)] = (v[(i, t)] - mean) - slope * centered_t[t];
        }
    }
    panel.with_values(out)
}

/// Subtract the first observation of each series, so the transformed
/// panel starts at zero.
pub fn deviations_from_initial(panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
    let v = panel.values();
    let mut out = v.clone();
    for mut row in out.row_iter_mut() {
        let first = row[0];
        row.add_scalar_mut(-first);
    }
    panel.with_values(out)
}

/// One step of a preprocessing chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Log,
    Demean,
    Detrend,
    Initial,
}

impl Transform {
    pub fn apply(self, panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
        match self {
            Transform::Log => log_transform(panel),
            Transform::Demean => demean(panel),
            Transform::Detrend => detrend(panel),
            Transform::Initial => deviations_from_initial(panel),
        }
    }
}

/// Apply transforms left to right.
pub fn apply_chain(panel: &TimeSeriesPanel, chain: &[Transform]) -> Result<TimeSeriesPanel> {
    chain
        .iter()
        .try_fold(panel.clone(), |p, step| step.apply(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn row_panel(r: &[f64]) -> TimeSeriesPanel {
        TimeSeriesPanel::from_rows(&[r.to_vec()]).unwrap()
    }

    fn max_abs_diff(a: &TimeSeriesPanel, b: &TimeSeriesPanel) -> f64 {
        (a.values() - b.values()).abs().max()
    }

    #[test]
    fn log_of_powers_of_e() {
        let p = log_transform(&row_panel(&[1.0, E, E * E])).unwrap();
        let v = p.values();
        assert_eq!(v[(0, 0)], 0.0);
        assert!((v[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((v[(0, 2)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn log_two_four() {
        let p = log_transform(&row_panel(&[2.0, 4.0])).unwrap();
        assert!((p.values()[(0, 1)] - 2.0 * p.values()[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn log_rejects_zero() {
        let err = log_transform(&row_panel(&[1.0, 0.0, 2.0])).unwrap_err();
        assert_eq!(err, Error::NonPositiveEntry { series: 0, t: 2 });
    }

    #[test]
    fn demean_constant() {
        let p = demean(&row_panel(&[5.0, 5.0, 5.0])).unwrap();
        assert!(p.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn detrend_exact_line() {
        let line: Vec<f64> = (1..=50).map(|t| 2.0 + 3.0 * t as f64).collect();
        let p = detrend(&row_panel(&line)).unwrap();
        assert!(p.values().abs().max() < 1e-10);
    }

    #[test]
    fn deviations_example() {
        let p = deviations_from_initial(&row_panel(&[4.0, 7.0, 9.0])).unwrap();
        assert_eq!(p.values().as_slice(), &[0.0, 3.0, 5.0]);
    }

    #[test]
    fn deviations_keep_dyadic_increments_bitwise() {
        let p = row_panel(&[1.5, -2.25, 8.0, 0.125, 3.0]);
        let d = deviations_from_initial(&p).unwrap();
        assert_eq!(p.differences(), d.differences());
    }

    #[test]
    fn input_untouched() {
        let p = row_panel(&[1.0, 2.0, 4.0]);
        let before = p.clone();
        let _ = detrend(&p).unwrap();
        let _ = demean(&p).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn chain_applies_in_order() {
        let p = row_panel(&[E, E * E, E * E * E]);
        let out = apply_chain(&p, &[Transform::Log, Transform::Initial]).unwrap();
        let v = out.values();
        assert!((v[(0, 2)] - 2.0).abs() < 1e-12);
    }

    fn panel_strategy() -> impl Strategy<Value = TimeSeriesPanel> {
        (1usize..4, 3usize..40).prop_flat_map(|(n, t)| {
            prop::collection::vec(-1e3f64..1e3, n * t)
                .prop_map(move |v| TimeSeriesPanel::new(DMatrix::from_vec(n, t, v)).unwrap())
        })
    }

    proptest! {
        #[test]
        fn transforms_are_idempotent(p in panel_strategy()) {
            for f in [demean, detrend, deviations_from_initial] {
                let once = f(&p).unwrap();
                let twice = f(&once).unwrap();
                prop_assert!(max_abs_diff(&once, &twice) < 1e-10);
            }
        }

        #[test]
        fn detrend_absorbs_demean(p in panel_strategy()) {
            let a = detrend(&demean(&p).unwrap()).unwrap();
            let b = detrend(&p).unwrap();
            prop_assert!(max_abs_diff(&a, &b) < 1e-10);
        }

        #[test]
        fn deviations_preserve_increments(p in panel_strategy()) {
            let d = deviations_from_initial(&p).unwrap();
            let diff = (p.differences() - d.differences()).abs().max();
            prop_assert!(diff <= 1e-12 * (1.0 + p.values().abs().max()));
        }
    }
}
