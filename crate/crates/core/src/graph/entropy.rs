use crate::error::{check_probability, param, Error, Result};

use super::Side;

/// Binary entropy in bits, with `h2(0) = h2(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_probability("x", x)?;
    Ok(h2(x))
}

fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        // ln_1p keeps the second term accurate for tiny x
        -(x * x.ln() + (1.0 - x) * (-x).ln_1p()) / std::f64::consts::LN_2
    }
}

/// BSC crossover probability `eps` in `[0, 1/2]` with `h2(eps) = 1 - rate`.
pub fn shannon_threshold(rate: f64) -> Result<f64> {
    check_probability("rate", rate)?;
    let target = 1.0 - rate;
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    // h2 is increasing on [0, 1/2]
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Expansion exponent whose positive root is `alpha_max`.
///
/// `(d-1)/d h2(a) - (1/k) h2(a g k) - a g k h2(1/(g k))` with `(d, k) = (l, r)`
/// for left expansion and `(r, l)` for right expansion. It is positive for
/// small `a` exactly when `g < 1 - 1/d`.
pub fn alpha_max_residual(l: usize, r: usize, gamma: f64, side: Side, alpha: f64) -> f64 {
    let (d, k) = match side {
        Side::Left => (l as f64, r as f64),
        Side::Right => (r as f64, l as f64),
    };
    let gk = gamma * k;
    (d - 1.0) / d * h2(alpha) - h2(alpha * gk) / k - alpha * gk * h2(1.0 / gk)
}

/// Smallest positive root of the expansion equation.
///
/// Sets of at most `alpha_max * n` variables (left) expand by `gamma` with
/// high probability. The root can be tiny when `gamma` approaches
/// `1 - 1/d`, so the bracket is searched on a log-spaced grid.
pub fn alpha_max(l: usize, r: usize, gamma: f64, side: Side) -> Result<f64> {
    let (d, k) = match side {
        Side::Left => (l, r),
        Side::Right => (r, l),
    };
    if d < 2 || k < 2 {
        return param(format!("degrees must be >= 2 (got l={l}, r={r})"));
    }
    let limit = 1.0 - 1.0 / d as f64;
    if !(gamma > 0.0 && gamma < limit - 1e-12) {
        return Err(Error::Domain(format!("gamma = {gamma} must lie in (0, {limit})")));
    }
    let f = |a: f64| alpha_max_residual(l, r, gamma, side, a);
    let upper = (1.0 / (gamma * k as f64)).min(1.0);

    // walk upward from 1e-300 to `upper`, 16 points per octave
    const STEPS_PER_OCTAVE: f64 = 16.0;
    let octaves = (upper / 1e-300).log2();
    let count = (octaves * STEPS_PER_OCTAVE).ceil() as usize;
    let grid = |i: usize| 1e-300 * (2f64).powf(octaves * i as f64 / count as f64);
    let mut prev = grid(0);
    let mut prev_val = f(prev);
    for i in 1..=count {
        let a = if i == count { upper } else { grid(i) };
        let val = f(a);
        if prev_val > 0.0 && val <= 0.0 {
            return Ok(bisect_root(f, prev, a));
        }
        prev = a;
        prev_val = val;
    }
    Err(Error::Numeric(format!(
        "no sign change of the expansion equation on (0, {upper}] for l={l}, r={r}, gamma={gamma}; value at upper end {prev_val}"
    )))
}

fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) > 0 >= f(hi)
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
