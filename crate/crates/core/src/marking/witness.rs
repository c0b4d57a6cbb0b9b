use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::decoders::{Decoder, DecoderSpec, NoiseRealization};
use crate::error::{param, Error, Result};
use crate::graph::TannerGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    VarToCheck,
    CheckToVar,
}

/// An edge of the graph together with a direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub edge: usize,
    pub var: usize,
    pub check: usize,
    pub orientation: Orientation,
}

impl DirectedEdge {
    pub fn v2c(g: &TannerGraph, edge: usize) -> Self {
        let e = g.edge(edge);
        Self { edge, var: e.var, check: e.check, orientation: Orientation::VarToCheck }
    }

    pub fn c2v(g: &TannerGraph, edge: usize) -> Self {
        let e = g.edge(edge);
        Self { edge, var: e.var, check: e.check, orientation: Orientation::CheckToVar }
    }
}

/// Bad-message indicators of an LGalB run for iterations `1..=depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct LgalbHistory {
    depth: usize,
    channel_bad: Vec<bool>,
    v2c: Vec<Vec<bool>>,
    // c2v[t - 2] for t >= 2
    c2v: Vec<Vec<bool>>,
}

impl LgalbHistory {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Variable-to-check message on `edge` at iteration `t` is bad.
    pub fn v2c_bad(&self, t: usize, edge: usize) -> bool {
        self.v2c[t - 1][edge]
    }

    /// Check-to-variable message on `edge` at iteration `t >= 2` is bad.
    pub fn c2v_bad(&self, t: usize, edge: usize) -> bool {
        self.c2v[t - 2][edge]
    }

    /// Edges whose variable-to-check message is bad at iteration `t`.
    pub fn bad_edges(&self, t: usize) -> Vec<usize> {
        self.v2c[t - 1].iter().enumerate().filter_map(|(e, b)| b.then_some(e)).collect()
    }

    pub fn channel_bad(&self) -> &[bool] {
        &self.channel_bad
    }
}

/// Run LGalB for `depth` iterations and keep every bad-message indicator.
pub fn lgalb_history(g: &TannerGraph, e: &NoiseRealization, depth: usize) -> Result<LgalbHistory> {
    if depth == 0 {
        return param("witness depth must be at least 1");
    }
    // ties cannot occur for odd l, and the witness needs l = 3
    let mut dec = Decoder::new(g, e, &DecoderSpec::LGalB, 0)?;
    let mut v2c = vec![dec.bad_v2c_edges()];
    let mut c2v = Vec::with_capacity(depth.saturating_sub(1));
    for _ in 1..depth {
        dec.step()?;
        v2c.push(dec.bad_v2c_edges());
        c2v.push(dec.bad_c2v_edges());
    }
    Ok(LgalbHistory { depth, channel_bad: e.bad.clone(), v2c, c2v })
}

/// The union of the witnesses of a set of bad edges.
///
/// Witness edges carry the direction in which the construction explored
/// them: roots and check-side choices point to the variable, variable-side
/// choices point to the check. `variables` records the channel value
/// (`true` = bad) of every variable in the witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessForest {
    pub depth: usize,
    /// Root edges; their variable-to-check message is bad at `depth`.
    pub roots: Vec<usize>,
    pub edges: BTreeSet<DirectedEdge>,
    pub checks: BTreeSet<usize>,
    pub variables: BTreeMap<usize, bool>,
}

impl WitnessForest {
    fn empty(depth: usize) -> Self {
        Self { depth, roots: Vec::new(), edges: BTreeSet::new(), checks: BTreeSet::new(), variables: BTreeMap::new() }
    }

    /// `|W|`, the number of distinct witness variables.
    pub fn size(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Whether every witness edge and variable exists in `g`.
    pub fn contained_in(&self, g: &TannerGraph) -> bool {
        self.edges.iter().all(|d| {
            d.edge < g.num_edges() && {
                let e = g.edge(d.edge);
                e.var == d.var && e.check == d.check
            }
        }) && self.variables.keys().all(|&v| v < g.n())
            && self.roots.iter().all(|&e| e < g.num_edges())
    }

    /// Whether the channel values in `e` agree with the witness.
    pub fn agrees_with(&self, e: &NoiseRealization) -> bool {
        self.variables.iter().all(|(&v, &bad)| e.bad.get(v) == Some(&bad))
    }

    /// Channel realization with the witness values on the witness and
    /// `outside[k]` on the k-th non-witness variable (ascending order).
    pub fn compose_noise(&self, template: &NoiseRealization, outside: &[bool]) -> Result<NoiseRealization> {
        let free = self.free_variables(template.len());
        if free.len() != outside.len() {
            return param(format!("{} values for {} non-witness variables", outside.len(), free.len()));
        }
        let mut bad = vec![false; template.len()];
        for (&v, &b) in &self.variables {
            bad[v] = b;
        }
        for (&v, &b) in free.iter().zip(outside) {
            bad[v] = b;
        }
        NoiseRealization::new(template.channel, template.eps, bad)
    }

    /// Variables of an `n`-variable graph outside the witness, ascending.
    pub fn free_variables(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|v| !self.variables.contains_key(v)).collect()
    }
}

struct Builder<'a> {
    g: &'a TannerGraph,
    h: &'a LgalbHistory,
    out: WitnessForest,
    // (edge the construction arrived on, iteration) already expanded
    seen: HashSet<(usize, usize)>,
}

impl Builder<'_> {
    /// Explain the bad message leaving the variable of `via` at iteration
    /// `t`, excluding the contribution of `via` itself.
    fn variable(&mut self, via: usize, t: usize) -> Result<()> {
        if !self.seen.insert((via, t)) {
            return Ok(());
        }
        let v = self.g.edge(via).var;
        let bad = self.h.channel_bad[v];
        self.out.variables.insert(v, bad);
        if t == 1 {
            if !bad {
                return Err(Error::Internal(format!("variable {v} sends a bad channel message with a good channel")));
            }
            return Ok(());
        }
        let incoming: Vec<usize> =
            self.g.var_edges(v).iter().copied().filter(|&f| f != via && self.h.c2v_bad(t, f)).collect();
        let chosen: &[usize] = match (bad, incoming.len()) {
            (true, k) if k >= 1 => &incoming[..1],
            (false, 2) => &incoming,
            (b, k) => {
                return Err(Error::Internal(format!(
                    "variable {v} (channel bad = {b}) has {k} bad incoming messages at iteration {t}"
                )))
            }
        };
        for &f in chosen {
            self.out.edges.insert(DirectedEdge::v2c(self.g, f));
            self.check(f, t)?;
        }
        Ok(())
    }

    /// Explain the bad message the check of `via` sends on `via` at `t`.
    fn check(&mut self, via: usize, t: usize) -> Result<()> {
        let c = self.g.edge(via).check;
        self.out.checks.insert(c);
        let f = self
            .g
            .check_edges(c)
            .iter()
            .copied()
            .filter(|&f| f != via && self.h.v2c_bad(t - 1, f))
            .min()
            .ok_or_else(|| Error::Internal(format!("check {c} sends a bad message at {t} without a bad input")))?;
        self.out.edges.insert(DirectedEdge::c2v(self.g, f));
        self.variable(f, t - 1)
    }
}

/// Witness of the given bad edges at iteration `depth`.
///
/// "Smallest" edges are chosen by global edge index.
pub fn build_witness_from_history(
    g: &TannerGraph,
    h: &LgalbHistory,
    depth: usize,
    roots: &[usize],
) -> Result<WitnessForest> {
    if g.l() != 3 {
        return Err(Error::Unsupported(format!("witness construction needs l = 3, got l = {}", g.l())));
    }
    if depth == 0 || depth > h.depth {
        return param(format!("requested depth {depth} but the run has {} iterations", h.depth));
    }
    let mut b = Builder { g, h, out: WitnessForest::empty(depth), seen: HashSet::new() };
    for &root in roots {
        if root >= g.num_edges() || !h.v2c_bad(depth, root) {
            return param(format!("edge {root} is not bad at iteration {depth}"));
        }
        b.out.roots.push(root);
        b.out.edges.insert(DirectedEdge::c2v(g, root));
        b.out.checks.insert(g.edge(root).check);
        b.variable(root, depth)?;
    }
    Ok(b.out)
}

/// `W(G, E, depth)`: the union of the witnesses of all bad edges.
pub fn build_witness(g: &TannerGraph, e: &NoiseRealization, depth: usize) -> Result<WitnessForest> {
    if g.l() != 3 {
        return Err(Error::Unsupported(format!("witness construction needs l = 3, got l = {}", g.l())));
    }
    let h = lgalb_history(g, e, depth)?;
    build_witness_from_history(g, &h, depth, &h.bad_edges(depth))
}

/// Self-contained witness file: graph, channel and witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDump {
    /// Graph in the adjacency text format.
    pub graph: String,
    pub noise: NoiseRealization,
    pub witness: WitnessForest,
}

impl WitnessDump {
    pub fn capture(g: &TannerGraph, e: &NoiseRealization, w: &WitnessForest) -> Self {
        Self { graph: g.to_text(), noise: e.clone(), witness: w.clone() }
    }

    /// Rebuild the witness from the stored graph and channel and compare.
    pub fn verify(&self) -> Result<bool> {
        let g = TannerGraph::from_text(&self.graph)?;
        let h = lgalb_history(&g, &self.noise, self.witness.depth)?;
        let w = build_witness_from_history(&g, &h, self.witness.depth, &self.witness.roots)?;
        Ok(w == self.witness)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}
