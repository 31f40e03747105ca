//! Text syntax shared by CLI flags and experiment files.
//!
//! | value        | syntax                                              |
//! |--------------|-----------------------------------------------------|
//! | schedule     | `over-t`, `over-log-t`, `over-n`, `fixed:<alpha>`   |
//! | quadrature   | `gh2`, `gh4`, `grid(<u>:<w>, <u>:<w>, …)`           |
//! | scale        | `none`, `steps(<c>:<h>, …)`, `poly(<a0>, <a1>, …)`  |
//! | innovations  | `<eta>` or `gauss`                                  |
//! | algorithm    | `bottom-up`, `top-down`                             |
//! | transform    | `log`, `demean`, `detrend`, `initial`               |

use crate::error::{Error, Result};
use crate::preprocess::Transform;
use crate::rank::{Algorithm, LevelKind};
use crate::rtest::Quadrature;
use crate::simulate::{Innovations, ScaleFn};

fn bad(what: &str, s: &str) -> Error {
    Error::InvalidConfig(format!("cannot parse {what} from '{s}'"))
}

/// Split on commas that are not inside parentheses, trimming each element.
pub fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| bad("number", s))
}

pub fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| bad("non-negative integer", s))
}

pub fn parse_u64(s: &str) -> Result<u64> {
    s.trim().parse::<u64>().map_err(|_| bad("seed", s))
}

fn parenthesized<'a>(s: &'a str, head: &str) -> Option<&'a str> {
    s.strip_prefix(head)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
}

fn parse_pairs(body: &str, what: &str) -> Result<Vec<(f64, f64)>> {
    split_top_level(body)
        .iter()
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| bad(what, p))?;
            Ok((parse_f64(a)?, parse_f64(b)?))
        })
        .collect()
}

pub fn parse_level_kind(s: &str) -> Result<LevelKind> {
    let s = s.trim();
    match s {
        "over-t" => Ok(LevelKind::OverT),
        "over-log-t" => Ok(LevelKind::OverLogT),
        "over-n" => Ok(LevelKind::OverN),
        _ => match s.strip_prefix("fixed:") {
            Some(a) => Ok(LevelKind::Fixed(parse_f64(a)?)),
            None => Err(bad("level schedule", s)),
        },
    }
}

pub fn parse_quadrature(s: &str) -> Result<Quadrature> {
    let s = s.trim();
    match s {
        "gh2" => Ok(Quadrature::GH2),
        "gh4" => Ok(Quadrature::GH4),
        _ => match parenthesized(s, "grid") {
            Some(body) => Ok(Quadrature::ExplicitGrid(parse_pairs(body, "grid node")?)),
            None => Err(bad("quadrature", s)),
        },
    }
}

pub fn parse_scale(s: &str) -> Result<ScaleFn> {
    let s = s.trim();
    if s == "none" {
        return Ok(ScaleFn::None);
    }
    if let Some(body) = parenthesized(s, "steps") {
        return Ok(ScaleFn::PiecewiseSteps(parse_pairs(body, "scale step")?));
    }
    if let Some(body) = parenthesized(s, "poly") {
        let coeffs = split_top_level(body)
            .iter()
            .map(|c| parse_f64(c))
            .collect::<Result<Vec<_>>>()?;
        return Ok(ScaleFn::Polynomial(coeffs));
    }
    Err(bad("scale function", s))
}

pub fn scale_label(f: &ScaleFn) -> String {
    match f {
        ScaleFn::None => "none".into(),
        ScaleFn::PiecewiseSteps(steps) => {
            let body: Vec<String> = steps.iter().map(|(c, h)| format!("{c}:{h}")).collect();
            format!("steps({})", body.join(", "))
        }
        ScaleFn::Polynomial(c) => {
            let body: Vec<String> = c.iter().map(|a| a.to_string()).collect();
            format!("poly({})", body.join(", "))
        }
    }
}

pub fn parse_innovations(s: &str) -> Result<Innovations> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("gauss") || s.eq_ignore_ascii_case("gaussian") {
        Ok(Innovations::Gaussian)
    } else {
        Ok(Innovations::PowerLaw(parse_f64(s)?))
    }
}

pub fn parse_algorithm(s: &str) -> Result<Algorithm> {
    match s.trim() {
        "bottom-up" => Ok(Algorithm::BottomUp),
        "top-down" => Ok(Algorithm::TopDown),
        other => Err(bad("algorithm", other)),
    }
}

pub fn parse_transform(s: &str) -> Result<Transform> {
    match s.trim() {
        "log" => Ok(Transform::Log),
        "demean" => Ok(Transform::Demean),
        "detrend" => Ok(Transform::Detrend),
        "initial" => Ok(Transform::Initial),
        other => Err(bad("transform", other)),
    }
}

pub fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    split_top_level(s).iter().map(|x| f(x)).collect()
}
