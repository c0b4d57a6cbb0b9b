use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TannerGraph;
use crate::rng::{coin, substream};

use super::{check_inputs, DecoderSpec, NoiseRealization};

/// Cap on unclipped BP reliabilities, where `tanh` saturates in `f64`.
const BP_LLR_CAP: f64 = 60.0;

/// Directed-edge messages, indexed by global edge index.
#[derive(Debug, Clone, PartialEq)]
pub enum Messages {
    /// `±1` for Gallager-type decoders, `1`/`0` (known/erased) for BEC,
    /// integer reliabilities for min-sum.
    Int(Vec<i64>),
    /// Log-likelihood ratios for BP.
    Real(Vec<f64>),
}

/// Messages in both directions at the current iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    pub iteration: usize,
    pub v2c: Messages,
    pub c2v: Messages,
}

/// Metrics of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub ber: f64,
    pub block_error: bool,
    pub bad_edge_fraction: f64,
}

/// Per-iteration metrics for iterations `1..=iters`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub points: Vec<TracePoint>,
}

impl Trace {
    /// Largest bit error rate over iterations `from..=to` (1-based).
    pub fn window_max_ber(&self, from: usize, to: usize) -> f64 {
        self.window(from, to).map(|p| p.ber).fold(0.0, f64::max)
    }

    /// Smallest bit error rate over iterations `from..=to` (1-based).
    pub fn window_min_ber(&self, from: usize, to: usize) -> f64 {
        self.window(from, to).map(|p| p.ber).fold(f64::INFINITY, f64::min)
    }

    fn window(&self, from: usize, to: usize) -> impl Iterator<Item = &TracePoint> {
        self.points.iter().filter(move |p| p.iteration >= from && p.iteration <= to)
    }
}

/// A decoder bound to one graph and one noise realization.
///
/// Iteration 1 holds the channel messages. Each [`Decoder::step`] computes
/// check messages from the current variable messages, then new variable
/// messages and bit decisions.
#[derive(Debug, Clone)]
pub struct Decoder<'g> {
    g: &'g TannerGraph,
    spec: DecoderSpec,
    channel_bad: Vec<bool>,
    channel_llr: f64,
    tie_seed: u64,
    decision_seed: u64,
    state: MessageState,
    decision_error: Vec<bool>,
}

impl<'g> Decoder<'g> {
    pub fn new(g: &'g TannerGraph, e: &NoiseRealization, spec: &DecoderSpec, seed: u64) -> Result<Self> {
        check_inputs(g, e, spec)?;
        let ne = g.num_edges();
        let channel_llr = match *spec {
            DecoderSpec::Bp { channel_llr_bound, .. } => {
                let raw = if e.eps <= 0.0 || e.eps >= 1.0 {
                    BP_LLR_CAP
                } else {
                    ((1.0 - e.eps) / e.eps).ln().abs().min(BP_LLR_CAP)
                };
                channel_llr_bound.map_or(raw, |b| raw.min(b))
            }
            _ => 1.0,
        };
        let mut dec = Self {
            g,
            spec: *spec,
            channel_bad: e.bad.clone(),
            channel_llr,
            tie_seed: substream(seed, "edge-ties"),
            decision_seed: substream(seed, "decision-ties"),
            state: MessageState {
                iteration: 1,
                v2c: Messages::Int(Vec::new()),
                c2v: Messages::Int(Vec::new()),
            },
            decision_error: e.bad.clone(),
        };
        dec.state.v2c = match spec {
            DecoderSpec::Bp { .. } => Messages::Real((0..ne).map(|i| dec.channel_real(g.edge(i).var)).collect()),
            _ => Messages::Int((0..ne).map(|i| dec.channel_int(g.edge(i).var)).collect()),
        };
        // before the first check update every check message is neutral-good
        dec.state.c2v = match spec {
            DecoderSpec::Bp { .. } => Messages::Real(vec![0.0; ne]),
            _ => Messages::Int(vec![dec.good_int(); ne]),
        };
        dec.decision_error = (0..g.n()).map(|v| dec.channel_decision_error(v)).collect();
        Ok(dec)
    }

    fn channel_int(&self, v: usize) -> i64 {
        match self.spec {
            // known = 1, erased = 0
            DecoderSpec::BecBp => i64::from(!self.channel_bad[v]),
            _ => {
                if self.channel_bad[v] {
                    -1
                } else {
                    1
                }
            }
        }
    }

    fn channel_real(&self, v: usize) -> f64 {
        if self.channel_bad[v] {
            -self.channel_llr
        } else {
            self.channel_llr
        }
    }

    fn good_int(&self) -> i64 {
        match self.spec {
            DecoderSpec::MinSum { saturation: Some(m) } | DecoderSpec::LinearMinSum { saturation: m } => m,
            DecoderSpec::MinSum { saturation: None } => i64::MAX / 4,
            _ => 1,
        }
    }

    fn channel_decision_error(&self, v: usize) -> bool {
        self.channel_bad[v]
    }

    pub fn graph(&self) -> &TannerGraph {
        self.g
    }

    pub fn spec(&self) -> &DecoderSpec {
        &self.spec
    }

    pub fn iteration(&self) -> usize {
        self.state.iteration
    }

    pub fn state(&self) -> &MessageState {
        &self.state
    }

    /// Whether a message value belongs to the bad set of this decoder.
    fn int_bad(&self, x: i64) -> bool {
        match self.spec {
            DecoderSpec::GalB | DecoderSpec::LGalB => x < 0,
            DecoderSpec::BecBp => x == 0,
            DecoderSpec::LinearMinSum { saturation } => x < saturation,
            _ => x <= 0,
        }
    }

    /// Bad-set membership of the variable-to-check message on edge `e`.
    ///
    /// Bad means `-1` for Gallager-type decoders, erased for BEC, `<= 0` for
    /// min-sum and BP, and below saturation for the linearized min-sum.
    pub fn v2c_bad(&self, e: usize) -> bool {
        match &self.state.v2c {
            Messages::Int(m) => self.int_bad(m[e]),
            Messages::Real(m) => m[e] <= 0.0,
        }
    }

    /// Bad-set membership of the check-to-variable message on edge `e`.
    pub fn c2v_bad(&self, e: usize) -> bool {
        match &self.state.c2v {
            Messages::Int(m) => self.int_bad(m[e]),
            Messages::Real(m) => m[e] <= 0.0,
        }
    }

    pub fn bad_v2c_edges(&self) -> Vec<bool> {
        (0..self.g.num_edges()).map(|e| self.v2c_bad(e)).collect()
    }

    pub fn bad_c2v_edges(&self) -> Vec<bool> {
        (0..self.g.num_edges()).map(|e| self.c2v_bad(e)).collect()
    }

    /// Variables whose current bit decision is wrong.
    pub fn decision_errors(&self) -> &[bool] {
        &self.decision_error
    }

    pub fn bit_errors(&self) -> usize {
        self.decision_error.iter().filter(|b| **b).count()
    }

    pub fn bad_edge_count(&self) -> usize {
        (0..self.g.num_edges()).filter(|&e| self.v2c_bad(e)).count()
    }

    pub fn metrics(&self) -> TracePoint {
        let errs = self.bit_errors();
        TracePoint {
            iteration: self.state.iteration,
            ber: errs as f64 / self.g.n() as f64,
            block_error: errs > 0,
            bad_edge_fraction: self.bad_edge_count() as f64 / self.g.num_edges() as f64,
        }
    }

    /// True when no bad message remains and the decoder provably stays so.
    pub fn absorbed(&self) -> bool {
        matches!(self.spec, DecoderSpec::GalB | DecoderSpec::LGalB | DecoderSpec::BecBp)
            && self.g.l() >= 2
            && self.bad_edge_count() == 0
            && self.bit_errors() == 0
    }

    /// Advance one iteration.
    pub fn step(&mut self) -> Result<()> {
        let it = self.state.iteration + 1;
        match (&self.state.v2c, &self.state.c2v) {
            (Messages::Int(v2c), Messages::Int(_)) => {
                let c2v = self.int_check_update(v2c);
                self.verify_int_check(&c2v)?;
                let (v2c, dec) = self.int_variable_update(&c2v, it);
                self.state = MessageState { iteration: it, v2c: Messages::Int(v2c), c2v: Messages::Int(c2v) };
                self.decision_error = dec;
            }
            (Messages::Real(v2c), Messages::Real(_)) => {
                let c2v = self.real_check_update(v2c);
                if let DecoderSpec::Bp { saturation: Some(m), .. } = self.spec {
                    if let Some(x) = c2v.iter().find(|x| x.abs() > m) {
                        return Err(Error::Internal(format!("check message {x} exceeds saturation {m}")));
                    }
                }
                let (v2c, dec) = self.real_variable_update(&c2v);
                self.state = MessageState { iteration: it, v2c: Messages::Real(v2c), c2v: Messages::Real(c2v) };
                self.decision_error = dec;
            }
            _ => return Err(Error::Internal("mixed message representations".into())),
        }
        Ok(())
    }

    fn verify_int_check(&self, c2v: &[i64]) -> Result<()> {
        let bound = match self.spec {
            DecoderSpec::MinSum { saturation: Some(m) } | DecoderSpec::LinearMinSum { saturation: m } => m,
            DecoderSpec::GalB | DecoderSpec::LGalB | DecoderSpec::BecBp => 1,
            _ => return Ok(()),
        };
        let lo = if self.spec == DecoderSpec::BecBp { 0 } else { -bound };
        match c2v.iter().find(|x| **x < lo || **x > bound) {
            Some(x) => Err(Error::Internal(format!("check message {x} outside [{lo}, {bound}]"))),
            None => Ok(()),
        }
    }

    fn int_check_update(&self, v2c: &[i64]) -> Vec<i64> {
        let g = self.g;
        let mut out = vec![0i64; v2c.len()];
        for c in 0..g.m() {
            let edges = g.check_edges(c);
            match self.spec {
                DecoderSpec::GalB => {
                    let prod: i64 = edges.iter().map(|&e| v2c[e]).product();
                    for &e in edges {
                        out[e] = prod * v2c[e];
                    }
                }
                // minimum of the others: LGalB on ±1, BEC on {0, 1},
                // linearized min-sum on integers
                DecoderSpec::LGalB | DecoderSpec::BecBp | DecoderSpec::LinearMinSum { .. } => {
                    let (mut min1, mut min2, mut arg) = (i64::MAX, i64::MAX, usize::MAX);
                    for &e in edges {
                        let x = v2c[e];
                        if x < min1 {
                            min2 = min1;
                            min1 = x;
                            arg = e;
                        } else if x < min2 {
                            min2 = x;
                        }
                    }
                    let clip = match self.spec {
                        DecoderSpec::LinearMinSum { saturation } => saturation,
                        _ => i64::MAX,
                    };
                    for &e in edges {
                        let m = if e == arg { min2 } else { min1 };
                        out[e] = m.clamp(-clip, clip);
                    }
                }
                DecoderSpec::MinSum { saturation } => {
                    let mut neg = false;
                    let (mut min1, mut min2, mut arg) = (i64::MAX, i64::MAX, usize::MAX);
                    for &e in edges {
                        let x = v2c[e];
                        neg ^= x < 0;
                        let a = x.abs();
                        if a < min1 {
                            min2 = min1;
                            min1 = a;
                            arg = e;
                        } else if a < min2 {
                            min2 = a;
                        }
                    }
                    let clip = saturation.unwrap_or(i64::MAX / 4);
                    for &e in edges {
                        let x = v2c[e];
                        // a zero input carries no sign; the product is then 0
                        let sign = if neg ^ (x < 0) { -1 } else { 1 };
                        let m = if e == arg { min2 } else { min1 };
                        out[e] = sign * m.min(clip);
                    }
                }
                DecoderSpec::Bp { .. } => unreachable!("BP uses real messages"),
            }
        }
        out
    }

    fn int_variable_update(&self, c2v: &[i64], it: usize) -> (Vec<i64>, Vec<bool>) {
        let g = self.g;
        let mut out = vec![0i64; c2v.len()];
        let mut dec = vec![false; g.n()];
        for v in 0..g.n() {
            let edges = g.var_edges(v);
            let ch = self.channel_int(v);
            match self.spec {
                DecoderSpec::GalB | DecoderSpec::LGalB => {
                    let total: i64 = ch + edges.iter().map(|&e| c2v[e]).sum::<i64>();
                    for &e in edges {
                        let s = total - c2v[e];
                        out[e] = match s.signum() {
                            1 => 1,
                            -1 => -1,
                            _ => {
                                if coin(self.tie_seed, e as u64, it as u64) {
                                    1
                                } else {
                                    -1
                                }
                            }
                        };
                    }
                    dec[v] = match total.signum() {
                        1 => false,
                        -1 => true,
                        _ => !coin(self.decision_seed, v as u64, it as u64),
                    };
                }
                DecoderSpec::BecBp => {
                    let known = edges.iter().filter(|&&e| c2v[e] == 1).count() as i64 + ch;
                    for &e in edges {
                        out[e] = i64::from(known - c2v[e] > 0);
                    }
                    dec[v] = known == 0;
                }
                DecoderSpec::MinSum { .. } | DecoderSpec::LinearMinSum { .. } => {
                    let total = edges.iter().fold(ch, |acc, &e| acc.saturating_add(c2v[e]));
                    for &e in edges {
                        out[e] = total.saturating_sub(c2v[e]);
                    }
                    dec[v] = total <= 0;
                }
                DecoderSpec::Bp { .. } => unreachable!("BP uses real messages"),
            }
        }
        (out, dec)
    }

    fn real_check_update(&self, v2c: &[f64]) -> Vec<f64> {
        let g = self.g;
        let sat = match self.spec {
            DecoderSpec::Bp { saturation, .. } => saturation.unwrap_or(BP_LLR_CAP).min(BP_LLR_CAP),
            _ => BP_LLR_CAP,
        };
        let mut out = vec![0.0; v2c.len()];
        let r = g.r();
        let mut t = vec![0.0; r];
        let mut suffix = vec![1.0; r + 1];
        for c in 0..g.m() {
            let edges = g.check_edges(c);
            for (i, &e) in edges.iter().enumerate() {
                t[i] = (0.5 * v2c[e]).tanh();
            }
            for i in (0..r).rev() {
                suffix[i] = suffix[i + 1] * t[i];
            }
            let mut prefix = 1.0;
            for (i, &e) in edges.iter().enumerate() {
                let p: f64 = prefix * suffix[i + 1];
                let llr = 2.0 * p.clamp(-1.0 + 1e-16, 1.0 - 1e-16).atanh();
                out[e] = llr.clamp(-sat, sat);
                prefix *= t[i];
            }
        }
        out
    }

    fn real_variable_update(&self, c2v: &[f64]) -> (Vec<f64>, Vec<bool>) {
        let g = self.g;
        let mut out = vec![0.0; c2v.len()];
        let mut dec = vec![false; g.n()];
        for v in 0..g.n() {
            let edges = g.var_edges(v);
            let total = self.channel_real(v) + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            for &e in edges {
                out[e] = total - c2v[e];
            }
            dec[v] = total <= 0.0;
        }
        (out, dec)
    }
}

/// Run `iters` iterations (iteration 1 is the channel) and record metrics.
///
/// Gallager-type and erasure decoders stop computing once every message is
/// good, since that state is absorbing; the remaining rows are zero.
pub fn run_decoder(g: &TannerGraph, e: &NoiseRealization, spec: &DecoderSpec, iters: usize, seed: u64) -> Result<Trace> {
    let mut dec = Decoder::new(g, e, spec, seed)?;
    let mut points = Vec::with_capacity(iters);
    for it in 1..=iters {
        if it > 1 {
            if dec.absorbed() {
                points.extend((it..=iters).map(|i| TracePoint {
                    iteration: i,
                    ber: 0.0,
                    block_error: false,
                    bad_edge_fraction: 0.0,
                }));
                break;
            }
            dec.step()?;
        }
        points.push(dec.metrics());
    }
    Ok(Trace { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::{sample_noise, Channel};
    use crate::graph::sample_regular_graph;

    fn all_specs() -> Vec<DecoderSpec> {
        vec![
            DecoderSpec::GalB,
            DecoderSpec::LGalB,
            DecoderSpec::MinSum { saturation: None },
            DecoderSpec::MinSum { saturation: Some(2) },
            DecoderSpec::LinearMinSum { saturation: 2 },
            DecoderSpec::Bp { saturation: None, channel_llr_bound: None },
            DecoderSpec::Bp { saturation: Some(10.0), channel_llr_bound: Some(3.0) },
            DecoderSpec::BecBp,
        ]
    }

    #[test]
    fn noiseless_channel_gives_no_errors() {
        let g = sample_regular_graph(120, 3, 6, 4).unwrap();
        for spec in all_specs() {
            let e = sample_noise(120, spec.channel(), 0.0, 1).unwrap();
            let t = run_decoder(&g, &e, &spec, 20, 9).unwrap();
            assert_eq!(t.points.len(), 20);
            for p in &t.points {
                assert_eq!(p.ber, 0.0, "{}", spec.name());
                assert!(!p.block_error);
                if spec != (DecoderSpec::LinearMinSum { saturation: 2 }) {
                    assert_eq!(p.bad_edge_fraction, 0.0, "{} at {}", spec.name(), p.iteration);
                }
            }
        }
    }

    #[test]
    fn iteration_one_is_the_channel() {
        let g = sample_regular_graph(60, 3, 6, 2).unwrap();
        let e = sample_noise(60, Channel::Bsc, 0.1, 3).unwrap();
        let t = run_decoder(&g, &e, &DecoderSpec::GalB, 1, 0).unwrap();
        assert_eq!(t.points[0].ber, e.bad_count() as f64 / 60.0);
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let g = sample_regular_graph(12, 3, 6, 2).unwrap();
        let e = sample_noise(12, Channel::Bec, 0.1, 3).unwrap();
        assert!(run_decoder(&g, &e, &DecoderSpec::GalB, 5, 0).is_err());
        let short = sample_noise(11, Channel::Bsc, 0.1, 3).unwrap();
        assert!(run_decoder(&g, &short, &DecoderSpec::GalB, 5, 0).is_err());
    }

    #[test]
    fn single_error_is_corrected_on_a_sparse_graph() {
        let g = sample_regular_graph(600, 3, 6, 11).unwrap();
        let mut bad = vec![false; 600];
        bad[17] = true;
        let e = NoiseRealization::new(Channel::Bsc, 0.01, bad).unwrap();
        for spec in [DecoderSpec::GalB, DecoderSpec::LGalB, DecoderSpec::MinSum { saturation: Some(2) }] {
            let t = run_decoder(&g, &e, &spec, 10, 0).unwrap();
            assert_eq!(t.points.last().unwrap().ber, 0.0, "{}", spec.name());
        }
    }
}
