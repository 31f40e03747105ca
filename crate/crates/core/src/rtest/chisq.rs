//! χ² distribution with one degree of freedom.

/// `P(χ²₁ ≤ x)`.
pub fn chi2_1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::erf((x / 2.0).sqrt())
    }
}

/// `P(χ²₁ > x)`, accurate in the far tail.
pub fn chi2_1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        libm::erfc((x / 2.0).sqrt())
    }
}

/// Upper-tail critical value `c` with `P(χ²₁ > c) = alpha`, by bisection.
pub fn chi2_1_critical(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let mut lo = 0.0;
    let mut hi = 1.0;
    while chi2_1_sf(hi) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_1_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}
