//! Tail of the stopping time of a lazy birth-death walk.
//!
//! `X_0 = a`; while `X >= 1` the walk moves to `X - 1 + Y` where `Y = mu/p`
//! with probability `p` and `0` otherwise. `T` is the first time `X < 1`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::trial_rng;

/// Largest horizon `beta a` for which [`bd_exact_tail`] runs.
pub const BD_EXACT_LIMIT: u64 = 20_000;

// slack for comparing lattice positions with the absorbing level
const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdParams {
    pub a: u64,
    pub p: f64,
    pub mu: f64,
    pub beta: f64,
}

impl BdParams {
    pub fn new(a: u64, p: f64, mu: f64, beta: f64) -> Result<Self> {
        let s = Self { a, p, mu, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a == 0 {
            return param("initial value a must be at least 1");
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return param(format!("p = {} is not in (0, 1]", self.p));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return param(format!("mu = {} is not in (0, 1)", self.mu));
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return param(format!("beta = {} must exceed 1", self.beta));
        }
        Ok(())
    }

    /// Time horizon `floor(beta a)`.
    pub fn horizon(&self) -> u64 {
        (self.beta * self.a as f64 + LEVEL_TOL).floor() as u64
    }

    /// `mu < p` and `beta >= p/(p - mu)`: every path stops by time `beta a`.
    pub fn certain_stop(&self) -> bool {
        self.mu < self.p && self.beta * (self.p - self.mu) >= self.p * (1.0 - 1e-12)
    }

    fn jump(&self) -> f64 {
        self.mu / self.p
    }

    /// Walk position after `t` steps with `k` jumps, if it never stopped.
    fn level(&self, t: u64, k: u64) -> f64 {
        self.a as f64 + k as f64 * self.jump() - t as f64
    }
}

/// Chernoff bound on `P{T > beta a}` and the exponent it was evaluated at.
///
/// Returns `(0, None)` in the certain-stop regime and `(1, None)` when the
/// optimizing exponent is not positive (the bound is then vacuous).
pub fn bd_chernoff(bp: &BdParams) -> Result<(f64, Option<f64>)> {
    bp.validate()?;
    if bp.certain_stop() {
        return Ok((0.0, None));
    }
    let BdParams { a, p, mu, beta } = *bp;
    let num = (beta - 1.0) * (1.0 - p);
    let den = p + beta * (mu - p);
    if num <= 0.0 || den <= 0.0 {
        return Ok((1.0, None));
    }
    let s = (p / mu) * (num / den).ln();
    if !(s > 0.0 && s.is_finite()) {
        return Ok((1.0, None));
    }
    let a = a as f64;
    let m = (1.0 - p) * (-s).exp() + p * ((mu / p - 1.0) * s).exp();
    let log_bound = a * s + beta * a * m.ln();
    Ok((log_bound.exp().min(1.0), Some(s)))
}

/// `P{T > beta a}` by dynamic programming over `(t, number of jumps)`.
pub fn bd_exact_tail(bp: &BdParams) -> Result<f64> {
    bp.validate()?;
    let horizon = bp.horizon();
    if horizon > BD_EXACT_LIMIT {
        return Err(Error::BudgetExceeded { needed: horizon as u128, budget: BD_EXACT_LIMIT as u128 });
    }
    // f[k]: probability of surviving to the current time with k jumps
    let mut f = vec![1.0f64];
    for t in 1..=horizon {
        let mut next = vec![0.0; f.len() + 1];
        for (k, &m) in f.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let k = k as u64;
            if bp.level(t, k) >= 1.0 - LEVEL_TOL {
                next[k as usize] += m * (1.0 - bp.p);
            }
            if bp.level(t, k + 1) >= 1.0 - LEVEL_TOL {
                next[k as usize + 1] += m * bp.p;
            }
        }
        f = next;
    }
    Ok(f.iter().sum())
}

/// Monte Carlo, Chernoff and (when affordable) exact values of `P{T > beta a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdTail {
    pub params: BdParams,
    pub trials: usize,
    pub survivors: usize,
    pub empirical: f64,
    /// Binomial standard error of `empirical`.
    pub stderr: f64,
    pub chernoff: f64,
    pub s: Option<f64>,
    pub exact: Option<f64>,
}

/// Estimate `P{T > beta a}` from `trials` independent walks.
pub fn bd_tail(bp: &BdParams, trials: usize, seed: u64) -> Result<BdTail> {
    bp.validate()?;
    if trials == 0 {
        return param("trials must be positive");
    }
    let horizon = bp.horizon();
    let survivors = (0..trials)
        .into_par_iter()
        .filter(|&k| {
            let mut rng = trial_rng(seed, k as u64);
            let mut jumps = 0u64;
            for t in 1..=horizon {
                jumps += u64::from(rng.random_bool(bp.p));
                if bp.level(t, jumps) < 1.0 - LEVEL_TOL {
                    return false;
                }
            }
            true
        })
        .count();
    let empirical = survivors as f64 / trials as f64;
    let (chernoff, s) = bd_chernoff(bp)?;
    let exact = if horizon <= BD_EXACT_LIMIT { Some(bd_exact_tail(bp)?) } else { None };
    Ok(BdTail {
        params: *bp,
        trials,
        survivors,
        empirical,
        stderr: (empirical * (1.0 - empirical) / trials as f64).sqrt(),
        chernoff,
        s,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_walk_stops_on_schedule() {
        // p = 1: X_t = a - t (1 - mu), so T = floor((a - 1)/(1 - mu)) + 1
        for (a, mu) in [(5u64, 0.5), (10, 0.25), (7, 0.75)] {
            let t = ((a - 1) as f64 / (1.0 - mu)).floor() as u64 + 1;
            let below = BdParams::new(a, 1.0, mu, (t - 1) as f64 / a as f64).ok();
            if let Some(bp) = below.filter(|b| b.horizon() == t - 1) {
                assert_eq!(bd_exact_tail(&bp).unwrap(), 1.0);
            }
            let at = BdParams::new(a, 1.0, mu, t as f64 / a as f64).unwrap();
            assert_eq!(bd_exact_tail(&at).unwrap(), 0.0);
        }
    }

    #[test]
    fn certain_stop_is_zero() {
        let bp = BdParams::new(20, 0.5, 0.25, 2.0).unwrap();
        assert!(bp.certain_stop());
        assert_eq!(bd_chernoff(&bp).unwrap().0, 0.0);
        assert_eq!(bd_exact_tail(&bp).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BdParams::new(0, 0.5, 0.2, 2.0).is_err());
        assert!(BdParams::new(3, 0.0, 0.2, 2.0).is_err());
        assert!(BdParams::new(3, 0.5, 1.0, 2.0).is_err());
        assert!(BdParams::new(3, 0.5, 0.2, 1.0).is_err());
    }
}
