use rayon::prelude::*;
use xlim_core::graph::{alpha_max, check_expander, sample_regular_graph, ExpansionSpec, Side};
use xlim_core::rng::{derive, substream};

use super::{bad, list, positive};
use crate::config::ExperimentConfig;
use crate::output::{Cell, Report, Table};
use crate::stats::wilson;

// relative bisection width of alpha_max
const ALPHA_REL_BRACKET: f64 = 1e-13;

fn side(cfg: &ExperimentConfig) -> anyhow::Result<Side> {
    match cfg.side.as_deref().unwrap_or("left") {
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        s => Err(bad(format!("--side must be left or right, got {s:?}"))),
    }
}

/// `alpha_max` per `(l, r, gamma)`; with `--n`, also the fraction of
/// sampled graphs that pass the exhaustive expansion check.
pub fn cmd_expansion(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let ls = list(&cfg.l, &[3]);
    let rs = list(&cfg.r, &[6]);
    let gammas = list(&cfg.gamma, &[0.5]);
    let side = side(cfg)?;
    let name = format!("{side:?}").to_lowercase();
    let mut t = Table::new("alpha_max", &["l", "r", "gamma", "side", "alpha_max", "lo", "hi", "status", "note"]);
    let mut cells = Vec::new();
    for &l in &ls {
        for &r in &rs {
            for &g in &gammas {
                cells.push((l, r, g));
            }
        }
    }
    let mut alphas = Vec::new();
    for &(l, r, g) in &cells {
        let mut row: Vec<Cell> = vec![l.into(), r.into(), g.into(), name.clone().into()];
        match alpha_max(l, r, g, side) {
            Ok(a) => {
                row.extend([a.into(), (a * (1.0 - ALPHA_REL_BRACKET)).into(), (a * (1.0 + ALPHA_REL_BRACKET)).into()]);
                row.extend(["ok".into(), Cell::Empty]);
                alphas.push(Some(a));
            }
            Err(xlim_core::Error::Parameter(m)) => return Err(bad(m)),
            Err(e) => {
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty, "failed".into(), e.to_string().into()]);
                alphas.push(None);
            }
        }
        t.push(row);
    }
    let mut tables = vec![t];

    if let Some(ns) = &cfg.n {
        let seeds = positive(cfg.seeds.unwrap_or(20), "seeds")?;
        let mut gt = Table::new(
            "graphs",
            &["l", "r", "n", "gamma", "alpha", "graphs", "expanders", "fraction", "fraction_lo", "fraction_hi", "status"],
        );
        for (ci, &(l, r, g)) in cells.iter().enumerate() {
            let Some(alpha) = cfg.alpha.or(alphas[ci]) else { continue };
            let spec = ExpansionSpec::new(alpha, g, side)?;
            for &n in ns {
                let base = derive(substream(cfg.seed(), "expansion"), (ci * 1000 + n) as u64);
                let verdicts = (0..seeds)
                    .into_par_iter()
                    .map(|k| {
                        let graph = sample_regular_graph(n, l, r, derive(base, k as u64))?;
                        check_expander(&graph, &spec)
                    })
                    .collect::<xlim_core::Result<Vec<bool>>>();
                let mut row: Vec<Cell> = vec![l.into(), r.into(), n.into(), g.into(), alpha.into(), seeds.into()];
                match verdicts {
                    Ok(v) => {
                        let hits = v.iter().filter(|b| **b).count();
                        let (lo, hi) = wilson(hits, seeds);
                        row.extend([hits.into(), (hits as f64 / seeds as f64).into(), lo.into(), hi.into(), "ok".into()]);
                    }
                    Err(e @ xlim_core::Error::BudgetExceeded { .. }) => {
                        row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()]);
                    }
                    Err(e) => return Err(e.into()),
                }
                gt.push(row);
            }
        }
        tables.push(gt);
    }
    Ok(Report { tables })
}
