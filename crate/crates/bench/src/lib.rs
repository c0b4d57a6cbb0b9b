//! Shared fixtures for the criterion benchmarks.

use xlim_core::decoders::sample_noise;
use xlim_core::graph::sample_regular_graph;
use xlim_core::{Channel, NoiseRealization, Result, TannerGraph};

/// A sampled `(l, r)` graph and a BSC realization drawn from fixed seeds.
pub fn fixture(n: usize, l: usize, r: usize, eps: f64, seed: u64) -> Result<(TannerGraph, NoiseRealization)> {
    let g = sample_regular_graph(n, l, r, seed)?;
    let e = sample_noise(n, Channel::Bsc, eps, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    Ok((g, e))
}
