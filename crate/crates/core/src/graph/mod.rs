//! Regular Tanner graphs: configuration-model sampling, a plain-text
//! adjacency format, exact expansion checks and the ensemble expansion
//! equation.

mod entropy;
mod expansion;

pub use entropy::{alpha_max, alpha_max_residual, binary_entropy, shannon_threshold};
pub use expansion::{check_expander, check_expander_with_budget, ExpansionSpec, Side, DEFAULT_EXPANSION_BUDGET};

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::error::{param, Error, Result};
use crate::rng::StreamRng;

/// One variable–check incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub var: usize,
    pub check: usize,
}

/// Bipartite `(l, r)`-regular multigraph with globally indexed edges.
///
/// The global edge index is the canonical order used wherever a tie must be
/// broken by "some fixed order" (witness construction, queue seeding).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n: usize,
    m: usize,
    l: usize,
    r: usize,
    edges: Vec<Edge>,
    // var_adj[v*l..(v+1)*l] = edge indices at v, ascending
    var_adj: Vec<usize>,
    check_adj: Vec<usize>,
    multi_edges: usize,
}

impl TannerGraph {
    /// Build a graph from an explicit edge list (`edges[i]` has index `i`).
    pub fn from_edges(n: usize, m: usize, l: usize, r: usize, edges: Vec<Edge>) -> Result<Self> {
        if n * l != m * r {
            return param(format!("n*l = {} differs from m*r = {}", n * l, m * r));
        }
        if edges.len() != n * l {
            return param(format!("expected {} edges, got {}", n * l, edges.len()));
        }
        let mut var_lists = vec![Vec::with_capacity(l); n];
        let mut check_lists = vec![Vec::with_capacity(r); m];
        for (i, e) in edges.iter().enumerate() {
            if e.var >= n || e.check >= m {
                return param(format!("edge {i} = ({}, {}) out of range", e.var, e.check));
            }
            var_lists[e.var].push(i);
            check_lists[e.check].push(i);
        }
        if let Some(v) = var_lists.iter().position(|a| a.len() != l) {
            return param(format!("variable {v} has degree {}, expected {l}", var_lists[v].len()));
        }
        if let Some(c) = check_lists.iter().position(|a| a.len() != r) {
            return param(format!("check {c} has degree {}, expected {r}", check_lists[c].len()));
        }
        let var_adj: Vec<usize> = var_lists.into_iter().flatten().collect();
        let check_adj: Vec<usize> = check_lists.into_iter().flatten().collect();

        let mut multi_edges = 0;
        for v in 0..n {
            let mut checks: Vec<usize> = var_adj[v * l..(v + 1) * l].iter().map(|&e| edges[e].check).collect();
            checks.sort_unstable();
            multi_edges += checks.windows(2).filter(|w| w[0] == w[1]).count();
        }

        Ok(Self { n, m, l, r, edges, var_adj, check_adj, multi_edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn l(&self) -> usize {
        self.l
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    /// Edge indices incident to variable `v`, ascending.
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_adj[v * self.l..(v + 1) * self.l]
    }

    /// Edge indices incident to check `c`, ascending.
    pub fn check_edges(&self, c: usize) -> &[usize] {
        &self.check_adj[c * self.r..(c + 1) * self.r]
    }

    /// Number of parallel edges beyond the first for each (variable, check) pair.
    pub fn multi_edge_count(&self) -> usize {
        self.multi_edges
    }

    pub fn is_simple(&self) -> bool {
        self.multi_edges == 0
    }

    /// Serialize to the adjacency text format: a header `n m l r`, then one
    /// `edge var check` line per edge in index order.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 * self.edges.len());
        writeln!(s, "{} {} {} {}", self.n, self.m, self.l, self.r).unwrap();
        for (i, e) in self.edges.iter().enumerate() {
            writeln!(s, "{i} {} {}", e.var, e.check).unwrap();
        }
        s
    }

    /// Parse the adjacency text format. Edge lines may come in any order but
    /// every index in `0..n*l` must appear exactly once.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let nums = parse_fields::<4>(header, hl + 1)?;
        let [n, m, l, r] = nums;
        let total = n.checked_mul(l).ok_or(Error::Parse { line: hl + 1, msg: "n*l overflows".into() })?;
        let mut slots: Vec<Option<Edge>> = vec![None; total];
        for (ln, line) in lines {
            let [i, v, c] = parse_fields::<3>(line, ln + 1)?;
            let slot = slots.get_mut(i).ok_or(Error::Parse { line: ln + 1, msg: format!("edge index {i} >= {total}") })?;
            if slot.is_some() {
                return Err(Error::Parse { line: ln + 1, msg: format!("duplicate edge index {i}") });
            }
            *slot = Some(Edge { var: v, check: c });
        }
        let edges = slots
            .into_iter()
            .enumerate()
            .map(|(i, e)| e.ok_or(Error::Parse { line: 0, msg: format!("missing edge index {i}") }))
            .collect::<Result<Vec<_>>>()?;
        Self::from_edges(n, m, l, r, edges)
    }
}

fn parse_fields<const K: usize>(line: &str, ln: usize) -> Result<[usize; K]> {
    let mut out = [0usize; K];
    let mut it = line.split_whitespace();
    for slot in out.iter_mut() {
        let tok = it.next().ok_or(Error::Parse { line: ln, msg: format!("expected {K} fields") })?;
        *slot = tok.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad integer {tok:?}") })?;
    }
    if it.next().is_some() {
        return Err(Error::Parse { line: ln, msg: format!("expected {K} fields") });
    }
    Ok(out)
}

/// Sample from the `(l, r)`-regular configuration model.
///
/// Variable sockets are laid out in order (edge `i` belongs to variable
/// `i / l`) and matched to a uniformly shuffled list of check sockets.
/// Parallel edges are kept; see [`TannerGraph::multi_edge_count`].
pub fn sample_regular_graph(n: usize, l: usize, r: usize, seed: u64) -> Result<TannerGraph> {
    if l == 0 || r < 2 {
        return param(format!("degrees must satisfy l >= 1, r >= 2 (got l={l}, r={r})"));
    }
    if (n * l) % r != 0 {
        return param(format!("n*l = {} is not divisible by r = {r}", n * l));
    }
    if n < r {
        return param(format!("n = {n} must be at least r = {r}"));
    }
    let m = n * l / r;
    let mut sockets: Vec<usize> = (0..m).flat_map(|c| std::iter::repeat_n(c, r)).collect();
    let mut rng = StreamRng::seed_from_u64(seed);
    sockets.shuffle(&mut rng);
    let edges = sockets
        .into_iter()
        .enumerate()
        .map(|(i, check)| Edge { var: i / l, check })
        .collect();
    TannerGraph::from_edges(n, m, l, r, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graph_has_forced_degrees() {
        let g = sample_regular_graph(6, 3, 6, 1).unwrap();
        assert_eq!(g.m(), 3);
        assert_eq!(g.num_edges(), 18);
        for v in 0..6 {
            assert_eq!(g.var_edges(v).len(), 3);
        }
        for c in 0..3 {
            assert_eq!(g.check_edges(c).len(), 6);
        }
    }

    #[test]
    fn divisibility_is_checked() {
        assert!(matches!(sample_regular_graph(6, 3, 4, 1), Err(Error::Parameter(_))));
        assert!(matches!(sample_regular_graph(4, 3, 6, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_regular_graph(1000, 3, 6, 7).unwrap();
        let b = sample_regular_graph(1000, 3, 6, 7).unwrap();
        assert_eq!(a.edges(), b.edges());
        let c = sample_regular_graph(1000, 3, 6, 8).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let g = sample_regular_graph(24, 3, 4, 3).unwrap();
        let text = g.to_text();
        let h = TannerGraph::from_text(&text).unwrap();
        assert_eq!(g, h);
        assert_eq!(h.to_text(), text);
    }

    #[test]
    fn text_parser_rejects_garbage() {
        assert!(TannerGraph::from_text("").is_err());
        assert!(TannerGraph::from_text("2 1 1 2\n0 0 0\n0 1 0\n").is_err());
        assert!(TannerGraph::from_text("2 1 1 2\n0 0 0\n").is_err());
        assert!(TannerGraph::from_text("2 1 1 2\n0 0 0\n1 1 x\n").is_err());
        // shuffled lines are fine
        let g = TannerGraph::from_text("2 1 1 2\n1 1 0\n0 0 0\n").unwrap();
        assert_eq!(g.edge(1), Edge { var: 1, check: 0 });
    }

    #[test]
    fn multi_edges_are_counted() {
        // var 0 hits check 0 twice
        let edges = vec![
            Edge { var: 0, check: 0 },
            Edge { var: 0, check: 0 },
            Edge { var: 1, check: 1 },
            Edge { var: 1, check: 1 },
        ];
        let g = TannerGraph::from_edges(2, 2, 2, 2, edges).unwrap();
        assert_eq!(g.multi_edge_count(), 2);
        assert!(!g.is_simple());
    }
}
