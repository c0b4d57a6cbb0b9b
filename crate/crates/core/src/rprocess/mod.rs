//! The R-process that bounds marked-set growth on expanders, its greedy
//! strategy, the birth-death tail estimate behind it and an exhaustive FKG
//! toolkit on the Boolean lattice.
//!
//! States are integer vectors `(C, S, B, I)`. The expansion constraint
//! `gamma r C <= S + B + I` with `gamma = 1 - (1 + delta)/r` is evaluated in
//! exact integer arithmetic: `delta = 1/(2N + 1)` for a cycle length `N`,
//! which is exactly the family of `delta` with `(1 - delta)/(2 delta) = N`.

mod birthdeath;
mod fkg;

pub use birthdeath::{bd_chernoff, bd_exact_tail, bd_tail, BdParams, BdTail, BD_EXACT_LIMIT};
pub use fkg::{fkg_expectations, fkg_verify, monotonicity, random_increasing_table, Monotonicity, ProductMeasure};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, param, Error, Result};
use crate::rng::{derive, substream};

/// R-process state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RState {
    /// Internal checks.
    pub c: i64,
    /// Surviving edges.
    pub s: i64,
    /// Boundary variables; may go negative since `B > 0` is not required.
    pub b: i64,
    /// Internal variables.
    pub i: i64,
}

impl RState {
    pub fn new(c: i64, s: i64, b: i64, i: i64) -> Self {
        Self { c, s, b, i }
    }

    pub fn initial(s0: i64) -> Self {
        Self { s: s0, ..Self::default() }
    }

    fn add(self, d: [i64; 4]) -> Self {
        Self { c: self.c + d[0], s: self.s + d[1], b: self.b + d[2], i: self.i + d[3] }
    }

    pub fn stopped(&self) -> bool {
        self.s <= 0
    }
}

/// Rows of the transition table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// `(2, 2r-3, 0, 1)`, the dominating extension.
    Extend,
    /// `(1, r-3, 0, 1)`.
    ExtendOneCheck,
    /// `(0, -3, 0, 1)`.
    ExtendNoCheck,
    /// `(0, -1, 1, 0)`.
    Prune,
    /// `(1, r-2, -1, 1)`, the dominating boundary step.
    Boundary,
    /// `(0, -2, -1, 1)`.
    BoundaryNoCheck,
}

impl Transition {
    pub const ALL: [Transition; 6] = [
        Transition::Extend,
        Transition::ExtendOneCheck,
        Transition::ExtendNoCheck,
        Transition::Prune,
        Transition::Boundary,
        Transition::BoundaryNoCheck,
    ];

    /// `(dC, dS, dB, dI)` for check degree `r`.
    pub fn delta(self, r: i64) -> [i64; 4] {
        match self {
            Self::Extend => [2, 2 * r - 3, 0, 1],
            Self::ExtendOneCheck => [1, r - 3, 0, 1],
            Self::ExtendNoCheck => [0, -3, 0, 1],
            Self::Prune => [0, -1, 1, 0],
            Self::Boundary => [1, r - 2, -1, 1],
            Self::BoundaryNoCheck => [0, -2, -1, 1],
        }
    }

    pub fn is_bold(self) -> bool {
        matches!(self, Self::Extend | Self::Prune | Self::Boundary)
    }

    /// The bold row of the same step type.
    pub fn bold(self) -> Self {
        match self {
            Self::Extend | Self::ExtendOneCheck | Self::ExtendNoCheck => Self::Extend,
            Self::Prune => Self::Prune,
            Self::Boundary | Self::BoundaryNoCheck => Self::Boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Regular,
    Boundary,
}

/// Check degree and `delta = 1/(2 cycle + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RParams {
    pub r: u32,
    /// `N = (1 - delta)/(2 delta)`, the number of extensions per boundary
    /// step in the greedy steady state.
    pub cycle: u32,
    /// Reject boundary steps that violate the expansion constraint.
    pub enforce: bool,
}

impl RParams {
    pub fn new(r: u32, cycle: u32) -> Result<Self> {
        if r < 3 {
            return param(format!("check degree r = {r} must be at least 3"));
        }
        if cycle == 0 {
            return param("cycle length must be positive");
        }
        Ok(Self { r, cycle, enforce: true })
    }

    /// Parameters for `delta = 1/(2N + 1)`; fails for other values.
    pub fn from_delta(r: u32, delta: f64) -> Result<Self> {
        let n = ((1.0 / delta) - 1.0) / 2.0;
        if !(delta > 0.0 && delta < 1.0) || (n - n.round()).abs() > 1e-9 || n.round() < 1.0 {
            return param(format!("(1 - delta)/(2 delta) must be a positive integer, got delta = {delta}"));
        }
        Self::new(r, n.round() as u32)
    }

    pub fn delta(&self) -> f64 {
        1.0 / (2.0 * self.cycle as f64 + 1.0)
    }

    pub fn gamma(&self) -> f64 {
        1.0 - (1.0 + self.delta()) / self.r as f64
    }

    fn denom(&self) -> i64 {
        2 * self.cycle as i64 + 1
    }

    /// `(S + B + I - gamma r C) (2N + 1)`, an integer.
    pub fn scaled_slack(&self, u: &RState) -> i64 {
        let q = self.denom();
        (u.s + u.b + u.i) * q - ((self.r as i64 - 1) * q - 1) * u.c
    }

    pub fn slack(&self, u: &RState) -> f64 {
        self.scaled_slack(u) as f64 / self.denom() as f64
    }

    /// `gamma r C <= S + B + I`.
    pub fn admissible(&self, u: &RState) -> bool {
        self.scaled_slack(u) >= 0
    }

    /// `gamma r C <= S + B + I - (1 - delta)`: a bold boundary step keeps
    /// the state admissible.
    pub fn boundary_admissible(&self, u: &RState) -> bool {
        self.scaled_slack(u) >= 2 * self.cycle as i64
    }

    /// `u` dominates `v`: more survivors, more internal variables and at
    /// least as much expansion slack.
    pub fn dominates(&self, u: &RState, v: &RState) -> bool {
        u.s >= v.s && u.i >= v.i && self.scaled_slack(u) >= self.scaled_slack(v)
    }

    pub fn apply(&self, u: RState, t: Transition) -> RState {
        u.add(t.delta(self.r as i64))
    }

    /// Bold-row transition of one step. Regular steps extend when `extend`
    /// is set and prune otherwise. Stopped states do not move.
    pub fn transition(&self, u: RState, kind: StepKind, extend: bool) -> Result<RState> {
        if u.stopped() {
            return Ok(u);
        }
        match kind {
            StepKind::Regular => Ok(self.apply(u, if extend { Transition::Extend } else { Transition::Prune })),
            StepKind::Boundary => {
                if self.enforce && !self.boundary_admissible(&u) {
                    return Err(Error::Precondition(format!(
                        "boundary step from {u:?} violates the expansion constraint (scaled slack {} < {})",
                        self.scaled_slack(&u),
                        2 * self.cycle
                    )));
                }
                Ok(self.apply(u, Transition::Boundary))
            }
        }
    }

    /// One step with fresh randomness: extend with probability `eps`.
    pub fn r_step<R: Rng + ?Sized>(&self, u: RState, kind: StepKind, eps: f64, rng: &mut R) -> Result<RState> {
        check_probability("eps", eps)?;
        let extend = kind == StepKind::Regular && rng.random_bool(eps);
        self.transition(u, kind, extend)
    }

    /// Whether each bold row dominates the other rows of its step type.
    pub fn bold_rows_dominate(&self, u: &RState) -> bool {
        Transition::ALL.iter().all(|&t| self.dominates(&self.apply(*u, t.bold()), &self.apply(*u, t)))
    }
}

/// Uniform `[0, 1)` value attached to `(seed, index)`.
fn unit(seed: u64, index: u64) -> f64 {
    (derive(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Decision rules for choosing regular or boundary steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Boundary step whenever it is admissible.
    Greedy,
    /// Regular steps only.
    NeverBoundary,
    /// Admissible boundary steps taken with probability `prob`.
    RandomAdmissible { prob: f64 },
}

/// Summary of one R-process run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RRun {
    pub final_state: RState,
    /// `I_infinity`.
    pub i_inf: i64,
    /// Stopping time `T` (number of steps until `S = 0`).
    pub steps: u64,
    pub regular_steps: u64,
    pub boundary_steps: u64,
    pub extends: u64,
    /// Boundary steps before the first regular step.
    pub initial_boundary_steps: u64,
    /// Largest scaled slack seen after the first regular step.
    pub max_slack_after_start: i64,
    pub decisions: Vec<StepKind>,
    pub trajectory: Option<Vec<RState>>,
}

/// Step cap; subcritical runs end long before it.
pub const MAX_R_STEPS: u64 = 50_000_000;

/// Coupled R-process run.
///
/// The `k`-th regular step extends iff `unit(seed, k) < eps`, so two runs
/// with the same seed see the same regular outcomes regardless of how
/// they interleave boundary steps. `script` decisions are replayed first
/// (a mimicking strategy), then `strategy` takes over.
pub fn run_coupled(
    params: &RParams,
    init: RState,
    strategy: Strategy,
    script: &[StepKind],
    eps: f64,
    seed: u64,
    record: bool,
) -> Result<RRun> {
    check_probability("eps", eps)?;
    let outcome_seed = substream(seed, "regular");
    let strategy_seed = substream(seed, "strategy");
    let mut u = init;
    let mut run = RRun {
        final_state: u,
        i_inf: 0,
        steps: 0,
        regular_steps: 0,
        boundary_steps: 0,
        extends: 0,
        initial_boundary_steps: 0,
        max_slack_after_start: i64::MIN,
        decisions: Vec::new(),
        trajectory: record.then(|| vec![u]),
    };
    while !u.stopped() {
        if run.steps >= MAX_R_STEPS {
            return Err(Error::Numeric(format!("R-process did not stop within {MAX_R_STEPS} steps")));
        }
        let t = run.steps as usize;
        let kind = if t < script.len() {
            script[t]
        } else {
            match strategy {
                Strategy::Greedy if params.boundary_admissible(&u) => StepKind::Boundary,
                Strategy::RandomAdmissible { prob }
                    if params.boundary_admissible(&u) && unit(strategy_seed, run.steps) < prob =>
                {
                    StepKind::Boundary
                }
                _ => StepKind::Regular,
            }
        };
        let extend = kind == StepKind::Regular && unit(outcome_seed, run.regular_steps) < eps;
        u = params.transition(u, kind, extend)?;
        run.steps += 1;
        match kind {
            StepKind::Regular => {
                run.regular_steps += 1;
                run.extends += u64::from(extend);
            }
            StepKind::Boundary => {
                run.boundary_steps += 1;
                if run.regular_steps == 0 {
                    run.initial_boundary_steps += 1;
                }
            }
        }
        if run.regular_steps > 0 {
            run.max_slack_after_start = run.max_slack_after_start.max(params.scaled_slack(&u));
        }
        run.decisions.push(kind);
        if let Some(tr) = &mut run.trajectory {
            tr.push(u);
        }
    }
    run.final_state = u;
    run.i_inf = u.i;
    Ok(run)
}

fn check_subcritical(params: &RParams, eps: f64) -> Result<()> {
    check_probability("eps", eps)?;
    let limit = 1.0 / (2.0 * (params.r as f64 - 1.0));
    if params.delta() >= limit {
        return param(format!("delta = {} must be below 1/(2(r-1)) = {limit}", params.delta()));
    }
    if eps >= limit {
        return param(format!("eps = {eps} must be below 1/(2(r-1)) = {limit}"));
    }
    if greedy_drift(eps, params) >= 0.0 {
        return param(format!("eps = {eps} gives non-negative drift for delta = {}", params.delta()));
    }
    Ok(())
}

/// Greedy R-process from `(0, S0, 0, 0)`.
pub fn greedy_run(s0: u64, eps: f64, params: &RParams, seed: u64, record: bool) -> Result<RRun> {
    check_subcritical(params, eps)?;
    if s0 == 0 {
        return param("S0 must be positive");
    }
    run_coupled(params, RState::initial(s0 as i64), Strategy::Greedy, &[], eps, seed, record)
}

/// Expected change of `S` per regular step of the greedy steady state,
/// with the induced boundary steps folded in.
pub fn greedy_drift(eps: f64, params: &RParams) -> f64 {
    let r = params.r as f64;
    let d = params.delta();
    eps * (2.0 * r - 3.0 + (r - 2.0) * 2.0 * d / (1.0 - d)) - (1.0 - eps)
}

/// Per-pair comparison of a strategy against the greedy one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub pairs: usize,
    /// Pairs where the challenger ended with more internal variables.
    pub violations: usize,
    pub equal: usize,
    pub mean_greedy: f64,
    pub mean_other: f64,
    pub sd_greedy: f64,
    pub sd_other: f64,
}

/// Couple `greedy` against `other` on `trials` shared regular-step streams.
pub fn strategy_domination_check(
    params: &RParams,
    init: RState,
    other: Strategy,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<DominationReport> {
    let pairs = (0..trials)
        .into_par_iter()
        .map(|k| {
            let s = derive(seed, k as u64);
            let g = run_coupled(params, init, Strategy::Greedy, &[], eps, s, false)?;
            let o = run_coupled(params, init, other, &[], eps, s, false)?;
            Ok((g.i_inf, o.i_inf))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&pairs))
}

fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let k = xs.clone().count();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.clone().sum::<f64>() / k as f64;
    let var = if k > 1 { xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64 } else { 0.0 };
    (mean, var.sqrt())
}

fn summarize(pairs: &[(i64, i64)]) -> DominationReport {
    let (mean_greedy, sd_greedy) = mean_sd(pairs.iter().map(|p| p.0 as f64));
    let (mean_other, sd_other) = mean_sd(pairs.iter().map(|p| p.1 as f64));
    DominationReport {
        pairs: pairs.len(),
        violations: pairs.iter().filter(|(a, b)| b > a).count(),
        equal: pairs.iter().filter(|(a, b)| a == b).count(),
        mean_greedy,
        mean_other,
        sd_greedy,
        sd_other,
    }
}

/// Coupled runs from `u >= v`: the `u` process replays the decisions the
/// `v` process took under `strategy`, then continues greedily. Reports
/// pairs where `I_inf(u) < I_inf(v)` as violations.
pub fn state_monotonicity_check(
    params: &RParams,
    u: RState,
    v: RState,
    strategy: Strategy,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<DominationReport> {
    if !params.dominates(&u, &v) {
        return param(format!("{u:?} does not dominate {v:?}"));
    }
    let pairs = (0..trials)
        .into_par_iter()
        .map(|k| {
            let s = derive(seed, k as u64);
            let low = run_coupled(params, v, strategy, &[], eps, s, false)?;
            let high = run_coupled(params, u, Strategy::Greedy, &low.decisions, eps, s, false)?;
            Ok((high.i_inf, low.i_inf))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&pairs))
}

/// Bold-row domination over every state of a box grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridReport {
    pub states: usize,
    pub violations: usize,
}

pub fn bold_domination_grid(params: &RParams, c: &[i64], s: &[i64], b: &[i64], i: &[i64]) -> GridReport {
    let mut rep = GridReport { states: 0, violations: 0 };
    for &cc in c {
        for &ss in s {
            for &bb in b {
                for &ii in i {
                    rep.states += 1;
                    rep.violations += usize::from(!params.bold_rows_dominate(&RState::new(cc, ss, bb, ii)));
                }
            }
        }
    }
    rep
}

/// Tail probabilities `P{I_inf >= c S0}` over a range of `S0` and their
/// log-linear fit `ln P ~ intercept + slope S0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c: f64,
    pub points: Vec<TailPoint>,
    pub slope: f64,
    pub intercept: f64,
    /// `-slope`, the fitted exponent `c'`.
    pub c_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub s0: u64,
    pub trials: usize,
    pub hits: usize,
    pub prob: f64,
    /// Binomial standard error of `prob`.
    pub stderr: f64,
    /// Mean and standard deviation of `I_inf / S0`.
    pub mean_ratio: f64,
    pub ratio_sd: f64,
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return param("a line fit needs at least two points");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("degenerate abscissae in line fit".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Run greedy R-processes for each `S0` and fit the exponential tail of
/// `I_inf / S0`. With `c = None`, `c` is set 10% above the largest mean
/// ratio `E[I_inf]/S0` observed, so the fitted event is a large deviation.
pub fn fit_tail(
    s0s: &[u64],
    eps: f64,
    params: &RParams,
    c: Option<f64>,
    trials: usize,
    seed: u64,
) -> Result<TailFit> {
    check_subcritical(params, eps)?;
    let mut samples = Vec::with_capacity(s0s.len());
    for (j, &s0) in s0s.iter().enumerate() {
        let base = derive(seed, j as u64);
        let xs = (0..trials)
            .into_par_iter()
            .map(|k| Ok(greedy_run(s0, eps, params, derive(base, k as u64), false)?.i_inf))
            .collect::<Result<Vec<i64>>>()?;
        samples.push(xs);
    }
    let ratio = |xs: &[i64], s0: u64| mean_sd(xs.iter().map(move |&x| x as f64 / s0 as f64));
    let c = match c {
        Some(c) => c,
        None => 1.1 * s0s.iter().zip(&samples).map(|(&s0, xs)| ratio(xs, s0).0).fold(0.0, f64::max),
    };
    let points: Vec<TailPoint> = s0s
        .iter()
        .zip(&samples)
        .map(|(&s0, xs)| {
            let hits = xs.iter().filter(|&&x| x as f64 >= c * s0 as f64).count();
            let prob = hits as f64 / trials as f64;
            let (mean_ratio, ratio_sd) = ratio(xs, s0);
            TailPoint {
                s0,
                trials,
                hits,
                prob,
                stderr: (prob * (1.0 - prob) / trials as f64).sqrt(),
                mean_ratio,
                ratio_sd,
            }
        })
        .collect();
    let used: Vec<&TailPoint> = points.iter().filter(|p| p.hits > 0).collect();
    let (slope, intercept) = fit_line(
        &used.iter().map(|p| p.s0 as f64).collect::<Vec<_>>(),
        &used.iter().map(|p| p.prob.ln()).collect::<Vec<_>>(),
    )
    .map_err(|_| Error::Numeric(format!("fewer than two S0 values with a nonzero tail estimate at c = {c}")))?;
    Ok(TailFit { c, points, slope, intercept, c_prime: -slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p6() -> RParams {
        RParams::from_delta(6, 1.0 / 11.0).unwrap()
    }

    #[test]
    fn table_rows() {
        let p = p6();
        let u = RState::new(0, 5, 0, 0);
        assert_eq!(p.apply(u, Transition::Prune), RState::new(0, 4, 1, 0));
        assert_eq!(p.apply(u, Transition::Boundary), RState::new(1, 9, -1, 1));
        assert_eq!(p.apply(u, Transition::Extend), RState::new(2, 14, 0, 1));
    }

    #[test]
    fn delta_family() {
        let p = p6();
        assert_eq!(p.cycle, 5);
        assert!((p.gamma() - (1.0 - (1.0 + 1.0 / 11.0) / 6.0)).abs() < 1e-15);
        assert!(RParams::from_delta(6, 0.1).is_err());
        // scaled slack matches the real-valued constraint
        let u = RState::new(3, 2, 4, 7);
        let direct = (u.s + u.b + u.i) as f64 - p.gamma() * 6.0 * u.c as f64;
        assert!((p.slack(&u) - direct).abs() < 1e-12);
    }

    #[test]
    fn enforced_boundary_is_rejected() {
        let p = p6();
        let u = RState::new(10, 1, 0, 0);
        assert!(matches!(p.transition(u, StepKind::Boundary, false), Err(Error::Precondition(_))));
        let relaxed = RParams { enforce: false, ..p };
        assert!(relaxed.transition(u, StepKind::Boundary, false).is_ok());
    }

    #[test]
    fn zero_noise_greedy_matches_hand_count() {
        let p = p6();
        for s0 in [1u64, 7, 50, 123] {
            let run = greedy_run(s0, 0.0, &p, 1, false).unwrap();
            // floor(S0 / (1 - delta)) boundary steps, then prunes only
            let k = s0 * 11 / 10;
            assert_eq!(run.boundary_steps, k);
            assert_eq!(run.i_inf, k as i64);
            assert_eq!(run.extends, 0);
            assert_eq!(run.steps, k + s0 + k * 4);
        }
    }

    #[test]
    fn line_fit() {
        let (s, i) = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
    }
}
