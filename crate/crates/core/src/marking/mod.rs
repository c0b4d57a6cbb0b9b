//! The asynchronous marking process, witnesses of bad messages and the
//! exhaustive small-instance oracles built on top of them.
//!
//! The marking process over-approximates every bad set the linearized
//! Gallager B decoder can produce after a given iteration. A witness is the
//! part of the computation tree that already explains a set of bad messages.

mod errorsets;
mod witness;

pub use errorsets::{
    error_sets_for_witness, markov_step_check, witness_fkg_check, ErrorSetEnumeration, MarkovStepReport,
    WitnessFkgReport, DEFAULT_ENUMERATION_BUDGET,
};
pub use witness::{
    build_witness, build_witness_from_history, lgalb_history, DirectedEdge, LgalbHistory, Orientation, WitnessDump,
    WitnessForest,
};

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::decoders::NoiseRealization;
use crate::error::{param, Result};
use crate::graph::TannerGraph;
use crate::rng::StreamRng;

/// Order in which pending marked edges are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "seed", rename_all = "lowercase")]
pub enum Schedule {
    Fifo,
    Lifo,
    /// Uniformly random pending edge, drawn from the given seed.
    Random(u64),
}

/// State of one marking run.
///
/// A directed edge is marked at most once: re-marking an edge that was
/// already processed would repeat exactly the same effect, so the process
/// is the least fixed point of the processing rules and always terminates.
#[derive(Debug, Clone)]
pub struct MarkingState<'g> {
    g: &'g TannerGraph,
    channel_bad: Vec<bool>,
    // ever marked, per global edge index and orientation
    seen_v2c: Vec<bool>,
    seen_c2v: Vec<bool>,
    marked: Vec<bool>,
    // variable-side tokens: 1 for initial marking plus one per arrival
    tokens: Vec<u32>,
    fired: Vec<bool>,
    pending: VecDeque<DirectedEdge>,
    processed: usize,
}

impl<'g> MarkingState<'g> {
    /// Start from a set of edges oriented variable to check.
    pub fn new(g: &'g TannerGraph, e: &NoiseRealization, initial: &[usize]) -> Result<Self> {
        if e.len() != g.n() {
            return param(format!("noise has length {}, graph has n = {}", e.len(), g.n()));
        }
        let ne = g.num_edges();
        let mut s = Self {
            g,
            channel_bad: e.bad.clone(),
            seen_v2c: vec![false; ne],
            seen_c2v: vec![false; ne],
            marked: vec![false; g.n()],
            tokens: vec![0; g.n()],
            fired: vec![false; g.n()],
            pending: VecDeque::new(),
            processed: 0,
        };
        for &edge in initial {
            if edge >= ne {
                return param(format!("initial edge {edge} out of range ({ne} edges)"));
            }
            let v = g.edge(edge).var;
            if !s.marked[v] {
                s.marked[v] = true;
                s.tokens[v] = 1;
            }
            s.push(DirectedEdge::v2c(g, edge));
        }
        Ok(s)
    }

    fn push(&mut self, d: DirectedEdge) {
        let seen = match d.orientation {
            Orientation::VarToCheck => &mut self.seen_v2c[d.edge],
            Orientation::CheckToVar => &mut self.seen_c2v[d.edge],
        };
        if !*seen {
            *seen = true;
            self.pending.push_back(d);
        }
    }

    fn fire(&mut self, v: usize) {
        self.fired[v] = true;
        for &f in self.g.var_edges(v) {
            self.push(DirectedEdge::v2c(self.g, f));
        }
    }

    /// Apply the processing rule to one marked edge.
    pub fn process(&mut self, d: DirectedEdge) {
        self.processed += 1;
        match d.orientation {
            Orientation::VarToCheck => {
                for &f in self.g.check_edges(d.check) {
                    if f != d.edge {
                        self.push(DirectedEdge::c2v(self.g, f));
                    }
                }
            }
            Orientation::CheckToVar => {
                let v = d.var;
                self.marked[v] = true;
                self.tokens[v] += 1;
                let needed = if self.channel_bad[v] { 1 } else { 2 };
                if !self.fired[v] && self.tokens[v] >= needed {
                    self.fire(v);
                }
            }
        }
    }

    /// Run until no marked edge is left.
    pub fn run(mut self, schedule: Schedule) -> MarkingOutcome {
        let mut rng = match schedule {
            Schedule::Random(seed) => Some(StreamRng::seed_from_u64(seed)),
            _ => None,
        };
        loop {
            let next = match (&mut rng, schedule) {
                (Some(_), _) if self.pending.is_empty() => None,
                (Some(rng), _) => {
                    let i = rng.random_range(0..self.pending.len());
                    self.pending.swap_remove_back(i)
                }
                (None, Schedule::Lifo) => self.pending.pop_back(),
                (None, _) => self.pending.pop_front(),
            };
            let Some(d) = next else { break };
            self.process(d);
        }
        MarkingOutcome {
            marked: self.marked,
            marked_v2c: self.seen_v2c,
            marked_c2v: self.seen_c2v,
            steps: self.processed,
        }
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn marked_variables(&self) -> &[bool] {
        &self.marked
    }
}

/// Result of a marking run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkingOutcome {
    /// The marked variable set, as an indicator over variables.
    pub marked: Vec<bool>,
    /// Edges that were marked in the variable-to-check direction.
    pub marked_v2c: Vec<bool>,
    /// Edges that were marked in the check-to-variable direction.
    pub marked_c2v: Vec<bool>,
    /// Number of processing steps performed.
    pub steps: usize,
}

impl MarkingOutcome {
    pub fn count(&self) -> usize {
        self.marked.iter().filter(|b| **b).count()
    }

    pub fn marked_list(&self) -> Vec<usize> {
        self.marked.iter().enumerate().filter_map(|(v, b)| b.then_some(v)).collect()
    }
}

/// Run the marking process from `initial` (edge indices, oriented variable
/// to check) under the given schedule.
pub fn run_marking(
    g: &TannerGraph,
    e: &NoiseRealization,
    initial: &[usize],
    schedule: Schedule,
) -> Result<MarkingOutcome> {
    Ok(MarkingState::new(g, e, initial)?.run(schedule))
}

/// Violations found by [`dominance_check`]; all counters are zero when
/// GalB is dominated by LGalB and LGalB by the marking process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DominanceReport {
    pub iterations_checked: usize,
    /// Marked variables `M(G, E, start)`.
    pub marked: usize,
    /// Largest LGalB bit-error count seen at iterations `>= start`.
    pub max_lgalb_errors: usize,
    /// Edges bad for GalB but good for LGalB, summed over iterations.
    pub galb_outside_lgalb: usize,
    /// Iterations where GalB made more bit errors than LGalB.
    pub galb_more_errors: usize,
    /// LGalB bad edges at iterations `>= start` never marked.
    pub unmarked_bad_edges: usize,
    /// LGalB bit errors at iterations `>= start` outside the marked set.
    pub unmarked_errors: usize,
}

impl DominanceReport {
    pub fn violations(&self) -> usize {
        self.galb_outside_lgalb + self.galb_more_errors + self.unmarked_bad_edges + self.unmarked_errors
    }
}

/// Run GalB and LGalB in lock step on `(g, e)` with shared tie coins, start
/// the marking process from the LGalB bad edges at iteration `start`, and
/// check both domination relations up to iteration `start + extra`.
pub fn dominance_check(
    g: &TannerGraph,
    e: &NoiseRealization,
    start: usize,
    extra: usize,
    seed: u64,
) -> Result<DominanceReport> {
    use crate::decoders::{Decoder, DecoderSpec};
    if start == 0 {
        return param("start iteration must be at least 1");
    }
    let mut galb = Decoder::new(g, e, &DecoderSpec::GalB, seed)?;
    let mut lgalb = Decoder::new(g, e, &DecoderSpec::LGalB, seed)?;
    let mut rep = DominanceReport::default();
    let mut marking: Option<MarkingOutcome> = None;
    for it in 1..=start + extra {
        if it > 1 {
            galb.step()?;
            lgalb.step()?;
        }
        rep.iterations_checked += 1;
        let lg_bad = lgalb.bad_v2c_edges();
        rep.galb_outside_lgalb += (0..g.num_edges()).filter(|&f| galb.v2c_bad(f) && !lg_bad[f]).count();
        rep.galb_more_errors += usize::from(galb.bit_errors() > lgalb.bit_errors());
        if it == start {
            let initial: Vec<usize> = (0..g.num_edges()).filter(|&f| lg_bad[f]).collect();
            let out = run_marking(g, e, &initial, Schedule::Fifo)?;
            rep.marked = out.count();
            marking = Some(out);
        }
        if let Some(out) = &marking {
            rep.unmarked_bad_edges += (0..g.num_edges()).filter(|&f| lg_bad[f] && !out.marked_v2c[f]).count();
            let errs = lgalb.decision_errors();
            rep.unmarked_errors += (0..g.n()).filter(|&v| errs[v] && !out.marked[v]).count();
            rep.max_lgalb_errors = rep.max_lgalb_errors.max(lgalb.bit_errors());
        }
    }
    Ok(rep)
}
