use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

use super::TannerGraph;

/// Default cap on the number of subsets an exact expansion check may visit.
pub const DEFAULT_EXPANSION_BUDGET: u128 = 1 << 24;

/// Which side of the bipartite graph must expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Variable subsets, neighbourhoods among checks.
    Left,
    /// Check subsets, neighbourhoods among variables.
    Right,
}

/// Expansion requirement: subsets up to `alpha` of one side have at least
/// `gamma * degree * |subset|` distinct neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSpec {
    pub alpha: f64,
    pub gamma: f64,
    pub side: Side,
}

impl ExpansionSpec {
    pub fn new(alpha: f64, gamma: f64, side: Side) -> Result<Self> {
        let s = Self { alpha, gamma, side };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return param(format!("alpha = {} must lie in (0, 1]", self.alpha));
        }
        // gamma = 1 is allowed: it asks for perfectly disjoint neighbourhoods
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return param(format!("gamma = {} must lie in (0, 1]", self.gamma));
        }
        Ok(())
    }
}

/// Number of subsets of size `1..=k` of an `n`-set, saturating.
pub(crate) fn subsets_up_to(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for s in 1..=k.min(n) {
        binom = binom.saturating_mul((n - s + 1) as u128) / s as u128;
        total = total.saturating_add(binom);
    }
    total
}

/// Exact expansion check with the default work budget.
pub fn check_expander(g: &TannerGraph, spec: &ExpansionSpec) -> Result<bool> {
    check_expander_with_budget(g, spec, DEFAULT_EXPANSION_BUDGET)
}

/// Exact expansion check. Every subset of size at most `floor(alpha * size)`
/// is visited; if that is more than `budget` subsets the call is refused
/// with [`Error::BudgetExceeded`].
pub fn check_expander_with_budget(g: &TannerGraph, spec: &ExpansionSpec, budget: u128) -> Result<bool> {
    spec.validate()?;
    let (count, other, degree) = match spec.side {
        Side::Left => (g.n(), g.m(), g.l()),
        Side::Right => (g.m(), g.n(), g.r()),
    };
    let k = (spec.alpha * count as f64 + 1e-9).floor() as usize;
    let needed = subsets_up_to(count, k);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let neighbours: Vec<Vec<usize>> = (0..count)
        .map(|u| match spec.side {
            Side::Left => g.var_edges(u).iter().map(|&e| g.edge(e).check).collect(),
            Side::Right => g.check_edges(u).iter().map(|&e| g.edge(e).var).collect(),
        })
        .collect();

    let mut search = Search {
        neighbours: &neighbours,
        hits: vec![0u32; other],
        distinct: 0,
        k,
        need_per_node: spec.gamma * degree as f64,
    };
    Ok(search.extend(0, 0))
}

struct Search<'a> {
    neighbours: &'a [Vec<usize>],
    hits: Vec<u32>,
    distinct: usize,
    k: usize,
    need_per_node: f64,
}

impl Search<'_> {
    fn add(&mut self, u: usize) {
        for &w in &self.neighbours[u] {
            if self.hits[w] == 0 {
                self.distinct += 1;
            }
            self.hits[w] += 1;
        }
    }

    fn remove(&mut self, u: usize) {
        for &w in &self.neighbours[u] {
            self.hits[w] -= 1;
            if self.hits[w] == 0 {
                self.distinct -= 1;
            }
        }
    }

    /// Depth-first over subsets in lexicographic order; false on the first
    /// subset that fails to expand.
    fn extend(&mut self, start: usize, size: usize) -> bool {
        if size == self.k {
            return true;
        }
        for u in start..self.neighbours.len() {
            self.add(u);
            let ok = self.distinct as f64 + 1e-9 >= self.need_per_node * (size + 1) as f64
                && self.extend(u + 1, size + 1);
            self.remove(u);
            if !ok {
                return false;
            }
        }
        true
    }
}
