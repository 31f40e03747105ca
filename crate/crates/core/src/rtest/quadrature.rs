//! Weight functions for aggregating the per-node statistics.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node `u` with its probability weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub u: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// Two-point Gauss–Hermite rule: u = ±1, weights ½.
    #[default]
    GH2,
    /// Four-point Gauss–Hermite rule.
    GH4,
    /// User-supplied finite grid of `(u, weight)` pairs.
    ExplicitGrid(Vec<(f64, f64)>),
}

impl Quadrature {
    /// Nodes on the `u` scale with weights normalized to sum to one.
    pub fn nodes(&self) -> Result<Vec<Node>> {
        match self {
            Quadrature::GH2 => Ok(vec![
                Node {
                    u: -1.0,
                    weight: 0.5,
                },
                Node {
                    u: 1.0,
                    weight: 0.5,
                },
            ]),
            Quadrature::GH4 => Ok(gh4_closed_form()),
            Quadrature::ExplicitGrid(grid) => {
                if grid.is_empty() {
                    return Err(Error::InvalidConfig("empty quadrature grid".into()));
                }
                if grid
                    .iter()
                    .any(|&(u, w)| !u.is_finite() || !w.is_finite() || w < 0.0)
                {
                    return Err(Error::InvalidConfig(
                        "grid nodes must be finite with non-negative weights".into(),
                    ));
                }
                let total: f64 = grid.iter().map(|&(_, w)| w).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidConfig(format!(
                        "grid weights sum to {total}, expected 1"
                    )));
                }
                Ok(grid.iter().map(|&(u, weight)| Node { u, weight }).collect())
            }
        }
    }
}

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Roots of H_n in ascending order, as eigenvalues of the Jacobi matrix.
pub fn hermite_roots(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut roots: Vec<f64> = SymmetricEigen::new(jacobi)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Gauss–Hermite nodes `z_s` and weights for `∫ e^{-z²} f(z) dz`, with
/// `w_s = √π 2^{n-1} (n-1)! / (n H_{n-1}(z_s)²)`.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let factorial: f64 = (1..n).map(|k| k as f64).product();
    let numer = std::f64::consts::PI.sqrt() * 2f64.powi(n as i32 - 1) * factorial;
    hermite_roots(n)
        .into_iter()
        .map(|z| {
            let h = hermite(n - 1, z);
            (z, numer / (n as f64 * h * h))
        })
        .collect()
}

/// The n-point rule mapped to N(0, 1): `u = √2 z`, weight `w / √π`.
/// `u = ±√(3 ∓ √6)` with weights `1 / (4 (3 ∓ √6))`.
fn gh4_closed_form() -> Vec<Node> {
    let r6 = 6f64.sqrt();
    let (inner, outer) = (3.0 - r6, 3.0 + r6);
    let node = |u: f64, s: f64| Node {
        u,
        weight: 1.0 / (4.0 * s),
    };
    vec![
        node(-outer.sqrt(), outer),
        node(-inner.sqrt(), inner),
        node(inner.sqrt(), inner),
        node(outer.sqrt(), outer),
    ]
}

/// Rule for `N(0, 1)` expectations built from the physicists' nodes.
pub fn standard_normal_rule(n: usize) -> Vec<Node> {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    gauss_hermite(n)
        .into_iter()
        .map(|(z, w)| Node {
            u: std::f64::consts::SQRT_2 * z,
            weight: w / sqrt_pi,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gh2_is_plus_minus_one() {
        let nodes = Quadrature::GH2.nodes().unwrap();
        assert_eq!(nodes.len(), 2);
        assert_eq!((nodes[0].u, nodes[1].u), (-1.0, 1.0));
        assert!(nodes.iter().all(|n| n.weight == 0.5));
    }

    #[test]
    fn closed_forms_match_general_rule() {
        for (q, n) in [(Quadrature::GH2, 2), (Quadrature::GH4, 4)] {
            for (a, b) in q.nodes().unwrap().iter().zip(standard_normal_rule(n)) {
                assert!((a.u - b.u).abs() < 1e-13 && (a.weight - b.weight).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gh4_roots_and_moments() {
        // H_4 = 16z^4 - 48z^2 + 12 has z^2 = (3 ± √6) / 2
        let roots = hermite_roots(4);
        let small = ((3.0 - 6f64.sqrt()) / 2.0).sqrt();
        let large = ((3.0 + 6f64.sqrt()) / 2.0).sqrt();
        let expected = [-large, -small, small, large];
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).abs() < 1e-13);
            assert!(hermite(4, *r).abs() < 1e-10);
        }
        let nodes = Quadrature::GH4.nodes().unwrap();
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        let second: f64 = nodes.iter().map(|n| n.weight * n.u * n.u).sum();
        let fourth: f64 = nodes.iter().map(|n| n.weight * n.u.powi(4)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((second - 1.0).abs() < 1e-10);
        assert!((fourth - 3.0).abs() < 1e-10);
    }

    #[test]
    fn weights_match_golub_welsch() {
        // second route: w_s = √π v_{1s}² from the Jacobi eigenvectors
        for n in 1..=12 {
            let jacobi = DMatrix::from_fn(n, n, |i, j| {
                if i + 1 == j || j + 1 == i {
                    (i.max(j) as f64 / 2.0).sqrt()
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(jacobi);
            let mut pairs: Vec<(f64, f64)> = (0..n)
                .map(|k| {
                    let v0 = eig.eigenvectors[(0, k)];
                    (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * v0 * v0)
                })
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            for ((z1, w1), (z2, w2)) in gauss_hermite(n).into_iter().zip(pairs) {
                assert!((z1 - z2).abs() < 1e-12);
                assert!((w1 - w2).abs() < 1e-10 * w2.max(1e-3));
            }
        }
    }

    #[test]
    fn explicit_grid_validation() {
        assert!(Quadrature::ExplicitGrid(vec![(0.5, 0.25), (-0.5, 0.75)])
            .nodes()
            .is_ok());
        assert!(Quadrature::ExplicitGrid(vec![(0.5, 0.4)]).nodes().is_err());
        assert!(Quadrature::ExplicitGrid(vec![]).nodes().is_err());
        assert!(Quadrature::ExplicitGrid(vec![(1.0, 1.5), (0.0, -0.5)])
            .nodes()
            .is_err());
    }
}
