//! Density evolution: scalar Gallager B / linearized Gallager B maps,
//! exact discrete DE for saturated min-sum decoders, witness-size DE, and a
//! bisection threshold search shared by all of them.

mod discrete;
mod scalar;
mod witness;

pub use discrete::{
    channel_density, ms_check_step, ms_de_step, ms_variable_step, variable_alphabet, DiscreteDensity, DiscreteMap,
    MinSumVariant,
};
pub use scalar::{galb_de_step, lgalb_fixed_point_threshold, lgalb_map, ScalarDEState, ScalarDecoder, ScalarMap};
pub use witness::{
    ms2_index, ms2_witness_de_step, witness_bound_step, witness_de_step, witness_ratio_bound, witness_trajectory,
    Ms2WitnessState, WitnessDEState,
};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// DE is considered converged once the error measure drops below this.
pub const CONVERGED_BELOW: f64 = 1e-12;

/// Default iteration cap for the convergence predicate.
pub const DEFAULT_MAX_ITERS: usize = 5000;

/// A DE recursion parametrized by the channel parameter.
pub trait DeRecursion {
    /// Whether DE started from the channel reaches an error measure below
    /// [`CONVERGED_BELOW`] within `max_iters` iterations.
    fn converges(&self, eps: f64, max_iters: usize) -> Result<bool>;
}

/// Result of a threshold bisection. The predicate holds at `lo` and fails
/// at `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub bisections: usize,
}

/// Number of evenly spaced spot checks used to detect a non-monotone
/// predicate before bisecting.
const SPOT_CHECKS: usize = 32;

/// Largest `eps` in `[0, upper]` for which `map` converges, located by
/// bisection to bracket width `tol`.
///
/// The predicate is first evaluated on an even grid; any success above a
/// failure is reported as [`Error::NonMonotone`].
pub fn find_threshold<D: DeRecursion + ?Sized>(map: &D, tol: f64, max_iters: usize, upper: f64) -> Result<Threshold> {
    if !(tol > 0.0) {
        return param(format!("tol = {tol} must be positive"));
    }
    if !(upper > 0.0 && upper <= 1.0) {
        return param(format!("upper = {upper} must lie in (0, 1]"));
    }
    let grid: Vec<f64> = (0..=SPOT_CHECKS).map(|i| upper * i as f64 / SPOT_CHECKS as f64).collect();
    let mut verdicts = Vec::with_capacity(grid.len());
    for &e in &grid {
        verdicts.push(map.converges(e, max_iters)?);
    }
    if !verdicts[0] {
        return Err(Error::Numeric("DE does not converge on a noiseless channel".into()));
    }
    let first_fail = match verdicts.iter().position(|v| !v) {
        Some(i) => i,
        None => return Err(Error::Numeric(format!("DE converges on the whole range [0, {upper}]"))),
    };
    if let Some(j) = verdicts[first_fail..].iter().position(|v| *v) {
        return Err(Error::NonMonotone(format!(
            "converges at eps = {} but not at eps = {}",
            grid[first_fail + j],
            grid[first_fail]
        )));
    }
    let (mut lo, mut hi) = (grid[first_fail - 1], grid[first_fail]);
    let mut bisections = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if map.converges(mid, max_iters)? {
            lo = mid;
        } else {
            hi = mid;
        }
        bisections += 1;
    }
    Ok(Threshold { estimate: 0.5 * (lo + hi), lo, hi, bisections })
}

/// One row of a `(l, iteration, x, witness size)` trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub x: f64,
    pub witness: f64,
}

/// LGalB trajectory on `(3, r)` with the expected witness size per message.
pub fn lgalb_witness_trajectory(eps: f64, r: usize, iters: usize) -> Result<Vec<TrajectoryPoint>> {
    Ok(witness_trajectory(eps, r, iters)?
        .into_iter()
        .map(|s| TrajectoryPoint { iteration: s.iteration, x: s.p_val, witness: s.p_der })
        .collect())
}
