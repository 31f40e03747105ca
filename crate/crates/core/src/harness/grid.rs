//! Plain-text experiment files: one `key = value` per line, `#` comments,
//! list values separated by commas.
//!
//! ```text
//! n = 3
//! m = all
//! t = 100, 200
//! eta = 0.5, 1, 1.5, 2
//! replications = 1000
//! seed = 1
//! ```

use crate::error::{Error, Result};
use crate::parse::{
    parse_algorithm, parse_f64, parse_innovations, parse_level_kind, parse_list, parse_quadrature,
    parse_scale, parse_transform, parse_u64, parse_usize,
};
use crate::rank::LevelSchedule;

use super::McExperiment;

/// Keys accepted in an experiment file.
pub const KEYS: &[&str] = &[
    "n",
    "m",
    "t",
    "eta",
    "theta",
    "scale",
    "burn_in",
    "d_seed",
    "replications",
    "seed",
    "kappa",
    "m_draws",
    "quadrature",
    "s_reps",
    "schedule",
    "alpha_base",
    "algorithms",
    "transforms",
    "ridge",
];

/// Parse an experiment file. Unset keys keep the values of
/// [`McExperiment::default`]; `seed` is mandatory.
pub fn parse_experiment(text: &str) -> Result<McExperiment> {
    let mut exp = McExperiment::default();
    let mut schedule = LevelSchedule::default();
    let mut seen_seed = false;
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ParseError {
            line: line_no,
            col: 1,
            msg: "expected 'key = value'".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::ParseError {
                line: line_no,
                col: 1,
                msg: format!("duplicate key '{key}'"),
            });
        }
        let at_line = |e: Error| match e {
            Error::InvalidConfig(msg) => Error::ParseError {
                line: line_no,
                col: raw.find('=').map_or(1, |p| p + 2),
                msg,
            },
            other => other,
        };
        let g = &mut exp.grid;
        match key {
            "n" => g.n_dims = parse_list(value, parse_usize).map_err(at_line)?,
            "m" => {
                g.m_trends = if value == "all" {
                    None
                } else {
                    Some(parse_list(value, parse_usize).map_err(at_line)?)
                }
            }
            "t" => g.t_lens = parse_list(value, parse_usize).map_err(at_line)?,
            "eta" => g.innovations = parse_list(value, parse_innovations).map_err(at_line)?,
            "theta" => g.ar_thetas = parse_list(value, parse_f64).map_err(at_line)?,
            "scale" => g.scale_fns = parse_list(value, parse_scale).map_err(at_line)?,
            "burn_in" => g.burn_in = parse_usize(value).map_err(at_line)?,
            "d_seed" => g.d_matrix_seed = parse_u64(value).map_err(at_line)?,
            "replications" => exp.replications = parse_usize(value).map_err(at_line)?,
            "seed" => {
                exp.seed = parse_u64(value).map_err(at_line)?;
                seen_seed = true;
            }
            "kappa" => exp.test.kappa = parse_f64(value).map_err(at_line)?,
            "m_draws" => exp.test.m_draws = parse_usize(value).map_err(at_line)?,
            "quadrature" => exp.test.quadrature = parse_quadrature(value).map_err(at_line)?,
            "s_reps" => exp.test.s_reps = parse_usize(value).map_err(at_line)?,
            "schedule" => schedule.kind = parse_level_kind(value).map_err(at_line)?,
            "alpha_base" => schedule.base = parse_f64(value).map_err(at_line)?,
            "algorithms" => exp.algorithms = parse_list(value, parse_algorithm).map_err(at_line)?,
            "transforms" => {
                exp.transforms = if value == "none" {
                    Vec::new()
                } else {
                    parse_list(value, parse_transform).map_err(at_line)?
                }
            }
            "ridge" => exp.ridge = parse_f64(value).map_err(at_line)?,
            other => {
                return Err(Error::ParseError {
                    line: line_no,
                    col: 1,
                    msg: format!("unknown key '{other}' (known: {})", KEYS.join(", ")),
                })
            }
        }
    }
    if !seen_seed {
        return Err(Error::InvalidConfig(
            "experiment files must set 'seed'".into(),
        ));
    }
    exp.schedule = schedule;
    exp.validate()?;
    Ok(exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::{Algorithm, LevelKind};
    use crate::rtest::Quadrature;
    use crate::simulate::{Innovations, ScaleFn};

    #[test]
    fn full_file() {
        let text = "\
# Table reproduction
n = 3, 4
m = 0, 2
t = 100
eta = 0.5, gauss
theta = 0, 0.5
scale = none, steps(0.5:1, 1.0:3)
burn_in = 1000
d_seed = 5
replications = 10
seed = 42
kappa = 1e-3
m_draws = 200
quadrature = gh4
s_reps = 1
schedule = over-log-t
alpha_base = 0.1
algorithms = bottom-up, top-down
transforms = demean
ridge = 0
";
        let exp = parse_experiment(text).unwrap();
        assert_eq!(exp.grid.n_dims, vec![3, 4]);
        assert_eq!(exp.grid.m_trends, Some(vec![0, 2]));
        assert_eq!(
            exp.grid.innovations,
            vec![Innovations::PowerLaw(0.5), Innovations::Gaussian]
        );
        assert_eq!(
            exp.grid.scale_fns[1],
            ScaleFn::PiecewiseSteps(vec![(0.5, 1.0), (1.0, 3.0)])
        );
        assert_eq!(exp.grid.burn_in, 1000);
        assert_eq!(exp.seed, 42);
        assert_eq!(exp.test.quadrature, Quadrature::GH4);
        assert_eq!(
            exp.schedule,
            LevelSchedule {
                kind: LevelKind::OverLogT,
                base: 0.1
            }
        );
        assert_eq!(
            exp.algorithms,
            vec![Algorithm::BottomUp, Algorithm::TopDown]
        );
        assert_eq!(exp.points().len(), 2 * 2 * 2 * 2 * 2);
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(parse_experiment("n = 3\n").is_err());
    }

    #[test]
    fn unknown_key_and_bad_value_report_line() {
        let err = parse_experiment("seed = 1\nfoo = 2\n").unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 2, .. }));
        let err = parse_experiment("seed = 1\n\nt = 100, abc\n").unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 3, .. }));
        let err = parse_experiment("seed = 1\nseed = 2\n").unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 2, .. }));
    }

    #[test]
    fn invalid_design_is_rejected() {
        assert!(parse_experiment("seed = 1\nn = 3\nm = 5\n").is_err());
    }
}
