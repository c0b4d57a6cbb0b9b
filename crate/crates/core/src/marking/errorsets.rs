use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoders::{Channel, NoiseRealization};
use crate::error::{check_probability, Error, Result};
use crate::graph::TannerGraph;

use super::witness::{build_witness_from_history, lgalb_history, DirectedEdge, WitnessForest};
use super::{run_marking, Schedule};

/// Default cap on the number of decoder runs an exhaustive oracle may do.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 20;

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

fn pow2(k: usize) -> u128 {
    if k >= 127 {
        u128::MAX
    } else {
        1u128 << k
    }
}

fn mask_bits(mask: usize, k: usize) -> Vec<bool> {
    (0..k).map(|i| mask >> i & 1 == 1).collect()
}

/// Product measure `eps^|x| (1-eps)^(k-|x|)` of a `k`-bit mask.
fn mask_prob(mask: usize, k: usize, eps: f64) -> f64 {
    let ones = mask.count_ones() as i32;
    eps.powi(ones) * (1.0 - eps).powi(k as i32 - ones)
}

/// The set of channel values outside a witness that reproduce it.
///
/// Bit `k` of a mask is the channel value (1 = bad) of the `k`-th variable
/// in `free_variables`. `members` is indexed by mask, and left empty when
/// the witness is not a subgraph of the graph (no assignment qualifies).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorSetEnumeration {
    pub free_variables: Vec<usize>,
    pub members: Vec<bool>,
}

impl ErrorSetEnumeration {
    pub fn count(&self) -> usize {
        self.members.iter().filter(|b| **b).count()
    }

    pub fn contains(&self, mask: usize) -> bool {
        self.members.get(mask).copied().unwrap_or(false)
    }

    /// Probability of the set under the iid measure with bad probability `eps`.
    pub fn probability(&self, eps: f64) -> f64 {
        let k = self.free_variables.len();
        self.members.iter().enumerate().filter(|(_, b)| **b).map(|(m, _)| mask_prob(m, k, eps)).sum()
    }

    /// A member and a smaller non-member, if the set is not a down-set.
    pub fn closure_violation(&self) -> Option<(usize, usize)> {
        let k = self.free_variables.len();
        self.members.iter().enumerate().filter(|(_, b)| **b).find_map(|(m, _)| {
            (0..k).filter(|i| m >> i & 1 == 1).map(|i| m & !(1 << i)).find(|&s| !self.contains(s)).map(|s| (m, s))
        })
    }
}

fn witness_of(g: &TannerGraph, e: &NoiseRealization, depth: usize) -> Result<WitnessForest> {
    let h = lgalb_history(g, e, depth)?;
    build_witness_from_history(g, &h, depth, &h.bad_edges(depth))
}

fn scratch_noise(n: usize) -> Result<NoiseRealization> {
    NoiseRealization::clean(Channel::Bsc, 0.0, n)
}

/// Enumerate every channel assignment outside `w` that gives rise to `w`.
///
/// Empty when `w` is not a subgraph of `g`. Refuses with
/// [`Error::BudgetExceeded`] when `2^n'` exceeds `budget`.
pub fn error_sets_for_witness(g: &TannerGraph, w: &WitnessForest, budget: u128) -> Result<ErrorSetEnumeration> {
    let free = w.free_variables(g.n());
    let k = free.len();
    if !w.contained_in(g) {
        return Ok(ErrorSetEnumeration { free_variables: free, members: Vec::new() });
    }
    check_budget(pow2(k), budget)?;
    let template = scratch_noise(g.n())?;
    let members = (0..1usize << k)
        .into_par_iter()
        .map(|mask| {
            let e = w.compose_noise(&template, &mask_bits(mask, k))?;
            Ok(witness_of(g, &e, w.depth)? == *w)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(ErrorSetEnumeration { free_variables: free, members })
}

/// Exhaustive expectations of the channel randomization inequality
/// `E[M 1{E' in set}] <= E[M] P{set}` for one witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessFkgReport {
    pub free_variables: usize,
    pub members: usize,
    /// `E[1{E' in set}]`.
    pub e_f: f64,
    /// `E[M(G, (W, E'), W)]`.
    pub e_g: f64,
    /// `E[1{E' in set} M(G, (W, E'), W)]`.
    pub e_fg: f64,
    pub holds: bool,
    /// The set of reproducing assignments is closed under lowering values.
    pub decreasing: bool,
}

fn marked_count(g: &TannerGraph, e: &NoiseRealization, roots: &[usize]) -> Result<usize> {
    Ok(run_marking(g, e, roots, Schedule::Fifo)?.count())
}

/// Marking counts `M(G, (W, E'), W)` for every assignment `E'` outside `w`.
fn marking_table(g: &TannerGraph, w: &WitnessForest) -> Result<Vec<usize>> {
    let k = w.free_variables(g.n()).len();
    let template = scratch_noise(g.n())?;
    (0..1usize << k)
        .into_par_iter()
        .map(|mask| {
            let e = w.compose_noise(&template, &mask_bits(mask, k))?;
            marked_count(g, &e, &w.roots)
        })
        .collect()
}

/// Check the channel randomization inequality for `w` by exhaustive
/// expectation over the `2^n'` assignments outside the witness.
pub fn witness_fkg_check(g: &TannerGraph, w: &WitnessForest, eps: f64, budget: u128) -> Result<WitnessFkgReport> {
    check_probability("eps", eps)?;
    let set = error_sets_for_witness(g, w, budget / 2)?;
    let k = set.free_variables.len();
    check_budget(pow2(k), budget / 2)?;
    let table = marking_table(g, w)?;
    let (mut e_f, mut e_g, mut e_fg) = (0.0, 0.0, 0.0);
    for (mask, &m) in table.iter().enumerate() {
        let p = mask_prob(mask, k, eps);
        let f = if set.contains(mask) { 1.0 } else { 0.0 };
        e_f += p * f;
        e_g += p * m as f64;
        e_fg += p * f * m as f64;
    }
    let tol = 1e-12 * (1.0 + e_g);
    Ok(WitnessFkgReport {
        free_variables: k,
        members: set.count(),
        e_f,
        e_g,
        e_fg,
        holds: e_fg <= e_f * e_g + tol,
        decreasing: set.closure_violation().is_none(),
    })
}

/// Exhaustive check of the Markov-inequality step on one small graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovStepReport {
    pub n: usize,
    pub depth: usize,
    pub eps: f64,
    /// `E[M(G, E, depth)]`.
    pub expected_marked: f64,
    /// `E[|W(G, E, depth)|]`.
    pub expected_witness: f64,
    pub theta: f64,
    /// `P{|W| >= theta n}`.
    pub large_witness_prob: f64,
    /// Sum over witnesses with `|W| <= theta n` of
    /// `P{E in E_(G,W)} E_E'[M(G, (W, E'), W)]`.
    pub small_witness_term: f64,
    /// `small_witness_term + n P{|W| > theta n}`.
    pub bound_before_markov: f64,
    /// `small_witness_term + theta n`.
    pub bound: f64,
    pub distinct_witnesses: usize,
    /// Witnesses for which the randomization inequality failed.
    pub randomization_violations: usize,
    pub holds: bool,
}

type WitnessKey = (Vec<usize>, Vec<DirectedEdge>, Vec<(usize, bool)>);

fn key_of(w: &WitnessForest) -> WitnessKey {
    (w.roots.clone(), w.edges.iter().copied().collect(), w.variables.iter().map(|(&v, &b)| (v, b)).collect())
}

/// Exhaustively evaluate both sides of
/// `E[M] <= sum_{|W| <= theta n} P{E_(G,W)} E_E'[M(G, (W, E'), W)] + theta n`
/// for a fixed small graph. `theta` defaults to `sqrt(E|W| / n)`, the
/// smallest value allowed by the hypothesis `E|W| <= theta^2 n`.
pub fn markov_step_check(
    g: &TannerGraph,
    eps: f64,
    depth: usize,
    theta: Option<f64>,
    budget: u128,
) -> Result<MarkovStepReport> {
    check_probability("eps", eps)?;
    let n = g.n();
    check_budget(pow2(n), budget)?;
    let template = scratch_noise(n)?;
    let outcomes = (0..1usize << n)
        .into_par_iter()
        .map(|mask| {
            let e = NoiseRealization::new(template.channel, template.eps, mask_bits(mask, n))?;
            let w = witness_of(g, &e, depth)?;
            let m = marked_count(g, &e, &w.roots)?;
            Ok((mask_prob(mask, n, eps), w, m))
        })
        .collect::<Result<Vec<_>>>()?;

    let nf = n as f64;
    let expected_marked: f64 = outcomes.iter().map(|(p, _, m)| p * *m as f64).sum();
    let expected_witness: f64 = outcomes.iter().map(|(p, w, _)| p * w.size() as f64).sum();
    let theta = match theta {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(Error::Parameter(format!("theta must be positive, got {t}"))),
        None => (expected_witness / nf).sqrt(),
    };
    let hypothesis_ok = expected_witness <= theta * theta * nf * (1.0 + 1e-12);

    // group realizations by the witness they produce
    let mut classes: BTreeMap<WitnessKey, (WitnessForest, f64, f64)> = BTreeMap::new();
    for (p, w, m) in outcomes {
        let entry = classes.entry(key_of(&w)).or_insert_with(|| (w, 0.0, 0.0));
        entry.1 += p;
        entry.2 += p * m as f64;
    }
    let needed: u128 = classes.values().map(|(w, _, _)| pow2(n - w.size())).sum::<u128>() + pow2(n);
    check_budget(needed, budget)?;

    let mut small_witness_term = 0.0;
    let mut large_witness_prob = 0.0;
    let mut strictly_large_prob = 0.0;
    let mut randomization_violations = 0;
    for (w, class_prob, class_marked) in classes.values() {
        let size = w.size() as f64;
        if size >= theta * nf {
            large_witness_prob += class_prob;
        }
        // expectation over the channel outside W, independent of W
        let k = n - w.size();
        let table = marking_table(g, w)?;
        let e_m: f64 = table.iter().enumerate().map(|(mask, &m)| mask_prob(mask, k, eps) * m as f64).sum();
        // class_marked = P(W values) E_E'[M 1{E' in set}], class_prob = P(W values) P{set}
        if *class_marked > class_prob * e_m * (1.0 + 1e-12) + 1e-300 {
            randomization_violations += 1;
        }
        if size <= theta * nf {
            small_witness_term += class_prob * e_m;
        } else {
            strictly_large_prob += class_prob;
        }
    }
    let bound_before_markov = small_witness_term + nf * strictly_large_prob;
    let bound = small_witness_term + theta * nf;
    let tol = 1e-12 * (1.0 + expected_marked);
    Ok(MarkovStepReport {
        n,
        depth,
        eps,
        expected_marked,
        expected_witness,
        theta,
        large_witness_prob,
        small_witness_term,
        bound_before_markov,
        bound,
        distinct_witnesses: classes.len(),
        randomization_violations,
        holds: hypothesis_ok
            && randomization_violations == 0
            && expected_marked <= bound_before_markov + tol
            && expected_marked <= bound + tol
            && large_witness_prob <= theta + 1e-12,
    })
}
