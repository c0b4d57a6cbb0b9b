use serde::{Deserialize, Serialize};

use crate::error::{check_probability, param, Result};

use super::{DeRecursion, CONVERGED_BELOW};

/// Scalar state: probability that a variable-to-check message is bad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarDEState {
    pub x: f64,
    pub iteration: usize,
}

/// Hard-decision decoders whose DE is a scalar recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalarDecoder {
    GalB,
    LGalB,
}

fn check_degrees(l: usize, r: usize) -> Result<()> {
    if l < 2 || r < 2 {
        return param(format!("degrees must be >= 2 (got l={l}, r={r})"));
    }
    Ok(())
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that the variable-node majority outputs a bad message, given
/// that each of the `l - 1` incoming check messages is good with probability
/// `y` independently. The channel casts the `l`-th vote and ties are split
/// evenly.
fn vote_bad(y: f64, eps: f64, l: usize) -> f64 {
    let d = l - 1;
    let z = 1.0 - y;
    // channel bad: bad wins while the good count k stays below l/2
    let mut bad_channel = 0.0;
    for k in 0..=(d / 2) {
        if 2 * k < l {
            bad_channel += binom(d, k) * y.powi(k as i32) * z.powi((d - k) as i32);
        }
    }
    // channel good: needs more than l/2 bad messages
    let mut good_channel = 0.0;
    for b in (l / 2 + 1)..=d {
        good_channel += binom(d, b) * z.powi(b as i32) * y.powi((d - b) as i32);
    }
    let mut out = eps * bad_channel + (1.0 - eps) * good_channel;
    if l % 2 == 0 {
        let h = l / 2;
        let c = binom(d, h);
        out += 0.5 * c * (eps * y.powi(h as i32) * z.powi(h as i32 - 1) + (1.0 - eps) * z.powi(h as i32) * y.powi(h as i32 - 1));
    }
    out
}

/// One step of the linearized Gallager B recursion.
///
/// A check message is good only if all `r - 1` inputs are good, so
/// `y = (1 - x)^(r-1)`; the variable node then takes a majority vote.
pub fn lgalb_map(x: f64, eps: f64, l: usize, r: usize) -> Result<f64> {
    check_probability("x", x)?;
    check_probability("eps", eps)?;
    check_degrees(l, r)?;
    Ok(lgalb_unchecked(x, eps, l, r))
}

pub(crate) fn lgalb_unchecked(x: f64, eps: f64, l: usize, r: usize) -> f64 {
    let y = (1.0 - x).powi(r as i32 - 1);
    vote_bad(y, eps, l).clamp(0.0, 1.0)
}

/// One step of Gallager B density evolution over the BSC.
///
/// The check output is bad with probability `(1 - (1-2x)^(r-1)) / 2`
/// (odd number of bad inputs); the variable majority is the same vote as in
/// [`lgalb_map`], with ties broken by a fair coin.
pub fn galb_de_step(x: f64, eps: f64, l: usize, r: usize) -> Result<f64> {
    check_probability("x", x)?;
    check_probability("eps", eps)?;
    check_degrees(l, r)?;
    Ok(galb_unchecked(x, eps, l, r))
}

pub(crate) fn galb_unchecked(x: f64, eps: f64, l: usize, r: usize) -> f64 {
    let q = 0.5 * (1.0 - (1.0 - 2.0 * x).powi(r as i32 - 1));
    vote_bad(1.0 - q, eps, l).clamp(0.0, 1.0)
}

/// A scalar DE map bound to its degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarMap {
    pub decoder: ScalarDecoder,
    pub l: usize,
    pub r: usize,
}

impl ScalarMap {
    pub fn new(decoder: ScalarDecoder, l: usize, r: usize) -> Result<Self> {
        check_degrees(l, r)?;
        Ok(Self { decoder, l, r })
    }

    pub fn apply(&self, x: f64, eps: f64) -> f64 {
        match self.decoder {
            ScalarDecoder::GalB => galb_unchecked(x, eps, self.l, self.r),
            ScalarDecoder::LGalB => lgalb_unchecked(x, eps, self.l, self.r),
        }
    }

    pub fn step(&self, s: ScalarDEState, eps: f64) -> ScalarDEState {
        ScalarDEState { x: self.apply(s.x, eps), iteration: s.iteration + 1 }
    }

    /// `x_1 = eps, x_2, ..., x_iters`.
    pub fn trajectory(&self, eps: f64, iters: usize) -> Result<Vec<ScalarDEState>> {
        check_probability("eps", eps)?;
        let mut out = Vec::with_capacity(iters);
        let mut s = ScalarDEState { x: eps, iteration: 1 };
        for _ in 0..iters {
            out.push(s);
            s = self.step(s, eps);
        }
        Ok(out)
    }
}

impl DeRecursion for ScalarMap {
    fn converges(&self, eps: f64, max_iters: usize) -> Result<bool> {
        check_probability("eps", eps)?;
        let mut x = eps;
        for _ in 0..max_iters {
            if x < CONVERGED_BELOW {
                return Ok(true);
            }
            x = self.apply(x, eps);
        }
        Ok(x < CONVERGED_BELOW)
    }
}

/// Threshold of LGalB by the fixed-point characterization: the smallest `eps`
/// for which `f(x; eps) = x` has a solution in `(0, eps]`.
///
/// The existence test scans `f(x) - x` on a grid that is log-spaced near 0
/// and linear near `eps`; the outer search bisects on `eps` to width `tol`.
pub fn lgalb_fixed_point_threshold(l: usize, r: usize, tol: f64) -> Result<f64> {
    check_degrees(l, r)?;
    if !(tol > 0.0) {
        return param(format!("tol = {tol} must be positive"));
    }
    let has_root = |eps: f64| -> bool {
        const LOG_POINTS: usize = 2000;
        const LIN_POINTS: usize = 4000;
        let g = |x: f64| lgalb_unchecked(x, eps, l, r) - x;
        let lo = eps * 1e-12;
        for i in 0..=LOG_POINTS {
            let x = lo * (eps / lo).powf(i as f64 / LOG_POINTS as f64);
            if g(x) >= 0.0 {
                return true;
            }
        }
        (1..=LIN_POINTS).any(|i| g(eps * i as f64 / LIN_POINTS as f64) >= 0.0)
    };
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    if !has_root(hi) {
        return Err(crate::error::Error::Numeric(format!("no fixed point in (0, {hi}] for l={l}, r={r}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if has_root(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
