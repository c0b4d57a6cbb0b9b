use rayon::prelude::*;
use xlim_core::decoders::{run_decoder, sample_noise, Trace};
use xlim_core::graph::sample_regular_graph;
use xlim_core::rng::{derive, substream};
use xlim_core::DecoderSpec;

use super::{bad, channel, check_eps, decoder, list, positive, single};
use crate::config::ExperimentConfig;
use crate::output::{Cell, Report, Table};
use crate::stats::{mean_ci, wilson};

struct Run {
    trace: Trace,
    window_max: f64,
    window_min: f64,
    coupled_violations: Option<usize>,
}

/// Seeds of the `k`-th draw at block length `n` and channel index `j`.
pub(crate) fn draw_seeds(master: u64, n: usize, j: usize, k: usize) -> (u64, u64, u64) {
    let graph = derive(derive(substream(master, "graph"), n as u64), k as u64);
    let noise = derive(derive(derive(substream(master, "noise"), n as u64), j as u64), k as u64);
    let coins = derive(substream(master, "coins"), k as u64);
    (graph, noise, coins)
}

/// Decoder runs over (n, eps, seed) with limsup/liminf estimates taken
/// over the trailing iteration window.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let l = single(&cfg.l, "l", 3)?;
    let r = single(&cfg.r, "r", 6)?;
    let spec = decoder(cfg, "lgalb")?;
    let ch = channel(cfg, &spec)?;
    let eps = list(&cfg.eps, &[0.03]);
    check_eps(&eps)?;
    let ns = list(&cfg.n, &[4096]);
    let iters = positive(cfg.iters.unwrap_or(200), "iters")?;
    let seeds = positive(cfg.seeds.unwrap_or(50), "seeds")?;
    let window = cfg.window.unwrap_or(iters / 4);
    if window >= iters {
        return Err(bad(format!("--window {window} must be shorter than --iters {iters}")));
    }
    let (from, to) = (iters - window, iters);
    let coupled = cfg.coupled.unwrap_or(false);
    if coupled && spec != DecoderSpec::LGalB {
        return Err(bad("--coupled compares GalB against LGalB and needs --decoder lgalb"));
    }
    let master = cfg.seed();

    let jobs: Vec<(usize, usize, usize)> = ns
        .iter()
        .flat_map(|&n| (0..eps.len()).flat_map(move |j| (0..seeds).map(move |k| (n, j, k))))
        .collect();
    let runs: Vec<Run> = jobs
        .par_iter()
        .map(|&(n, j, k)| -> anyhow::Result<Run> {
            let (gs, ns_, cs) = draw_seeds(master, n, j, k);
            let g = sample_regular_graph(n, l, r, gs)?;
            let e = sample_noise(n, ch, eps[j], ns_)?;
            let trace = run_decoder(&g, &e, &spec, iters, cs)?;
            let coupled_violations = if coupled {
                let galb = run_decoder(&g, &e, &DecoderSpec::GalB, iters, cs)?;
                Some(galb.points.iter().zip(&trace.points).filter(|(a, b)| a.ber > b.ber).count())
            } else {
                None
            };
            Ok(Run {
                window_max: trace.window_max_ber(from, to),
                window_min: trace.window_min_ber(from, to),
                trace,
                coupled_violations,
            })
        })
        .collect::<anyhow::Result<_>>()?;

    let mut summary = Table::new(
        "summary",
        &[
            "l", "r", "decoder", "channel", "n", "eps", "seeds", "window_from", "window_to",
            "limsup_ber", "limsup_lo", "limsup_hi", "liminf_ber", "liminf_lo", "liminf_hi",
            "final_ber", "final_lo", "final_hi", "window_failure_rate", "failure_lo", "failure_hi",
            "coupled_violations",
        ],
    );
    let mut traces = Table::new(
        "traces",
        &["n", "eps", "iteration", "ber", "ber_lo", "ber_hi", "bad_edges", "bad_edges_lo", "bad_edges_hi"],
    );
    for (cell, chunk) in runs.chunks(seeds).enumerate() {
        let (n, j) = (jobs[cell * seeds].0, jobs[cell * seeds].1);
        let col = |f: &dyn Fn(&Run) -> f64| mean_ci(&chunk.iter().map(f).collect::<Vec<_>>());
        let sup = col(&|x| x.window_max);
        let inf = col(&|x| x.window_min);
        let fin = col(&|x| x.trace.points.last().map_or(0.0, |p| p.ber));
        let failures = chunk.iter().filter(|x| x.window_max > 0.0).count();
        let (flo, fhi) = wilson(failures, seeds);
        let violations: Option<usize> = if coupled { Some(chunk.iter().filter_map(|x| x.coupled_violations).sum()) } else { None };
        summary.push(vec![
            l.into(), r.into(), spec.name().into(), format!("{ch:?}").to_lowercase().into(), n.into(), eps[j].into(),
            seeds.into(), from.into(), to.into(),
            sup.mean.into(), sup.lo.into(), sup.hi.into(),
            inf.mean.into(), inf.lo.into(), inf.hi.into(),
            fin.mean.into(), fin.lo.into(), fin.hi.into(),
            (failures as f64 / seeds as f64).into(), flo.into(), fhi.into(),
            Cell::from(violations),
        ]);
        for it in 0..iters {
            let ber = mean_ci(&chunk.iter().map(|x| x.trace.points[it].ber).collect::<Vec<_>>());
            let edges = mean_ci(&chunk.iter().map(|x| x.trace.points[it].bad_edge_fraction).collect::<Vec<_>>());
            traces.push(vec![
                n.into(), eps[j].into(), (it + 1).into(),
                ber.mean.into(), ber.lo.into(), ber.hi.into(),
                edges.mean.into(), edges.lo.into(), edges.hi.into(),
            ]);
        }
    }
    Ok(Report { tables: vec![summary, traces] })
}
