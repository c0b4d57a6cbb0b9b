use rayon::prelude::*;
use xlim_core::de::witness_trajectory;
use xlim_core::decoders::sample_noise;
use xlim_core::graph::sample_regular_graph;
use xlim_core::marking::{build_witness_from_history, lgalb_history, WitnessDump};
use xlim_core::Channel;

use super::{bad, check_eps, exact, list, positive, single};
use super::sweep::draw_seeds;
use crate::config::ExperimentConfig;
use crate::output::{Cell, Report, Table};
use crate::stats::{mean_ci, wilson};

fn replay(path: &std::path::Path) -> anyhow::Result<Report> {
    let text = std::fs::read_to_string(path)?;
    let dump = WitnessDump::from_json(&text)?;
    let ok = dump.verify()?;
    let w = &dump.witness;
    let mut t = Table::new("replay", &["depth", "roots", "variables", "edges", "checks", "verified"]);
    t.push(vec![w.depth.into(), w.roots.len().into(), w.size().into(), w.edges.len().into(), w.checks.len().into(), ok.into()]);
    Ok(Report { tables: vec![t] })
}

/// Witness sizes `|W(G, E, depth)| / n` for depths `2..=iters` against the
/// witness DE envelope `l p'_depth(1)`.
pub fn cmd_witness(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    if let Some(path) = &cfg.replay {
        return replay(path);
    }
    let l = single(&cfg.l, "l", 3)?;
    if l != 3 {
        return Err(bad(format!("witnesses are defined for l = 3, got l = {l}")));
    }
    let r = single(&cfg.r, "r", 6)?;
    let n = single(&cfg.n, "n", 10_000)?;
    let eps = list(&cfg.eps, &[0.03]);
    check_eps(&eps)?;
    let seeds = positive(cfg.seeds.unwrap_or(12), "seeds")?;
    let depth_max = cfg.iters.unwrap_or(10);
    if depth_max < 2 {
        return Err(bad("--iters (largest witness depth) must be at least 2"));
    }
    if let Some(t) = cfg.theta {
        if !(t > 0.0 && t <= 1.0) {
            return Err(bad(format!("--theta = {t} is not in (0, 1]")));
        }
    }
    let master = cfg.seed();
    let depths: Vec<usize> = (2..=depth_max).collect();

    let jobs: Vec<(usize, usize)> = (0..eps.len()).flat_map(|j| (0..seeds).map(move |k| (j, k))).collect();
    let sizes: Vec<Vec<usize>> = jobs
        .par_iter()
        .map(|&(j, k)| -> anyhow::Result<Vec<usize>> {
            let (gs, es, _) = draw_seeds(master, n, j, k);
            let g = sample_regular_graph(n, l, r, gs)?;
            let e = sample_noise(n, Channel::Bsc, eps[j], es)?;
            let h = lgalb_history(&g, &e, depth_max)?;
            let mut out = Vec::with_capacity(depths.len());
            for &d in &depths {
                out.push(build_witness_from_history(&g, &h, d, &h.bad_edges(d))?.size());
            }
            if k == 0 && j == 0 {
                if let Some(path) = &cfg.dump {
                    let w = build_witness_from_history(&g, &h, depth_max, &h.bad_edges(depth_max))?;
                    std::fs::write(path, WitnessDump::capture(&g, &e, &w).to_json()?)?;
                }
            }
            Ok(out)
        })
        .collect::<anyhow::Result<_>>()?;

    let mut t = Table::new(
        "witness",
        &[
            "l", "r", "eps", "n", "depth", "seeds", "size_frac", "size_lo", "size_hi", "size_sd",
            "envelope", "envelope_lo", "envelope_hi", "below_envelope", "theta", "large_frac", "large_lo", "large_hi",
        ],
    );
    for (j, &e) in eps.iter().enumerate() {
        let de = witness_trajectory(e, r, depth_max)?;
        let rows = &sizes[j * seeds..(j + 1) * seeds];
        for (di, &d) in depths.iter().enumerate() {
            let fr: Vec<f64> = rows.iter().map(|s| s[di] as f64 / n as f64).collect();
            let m = mean_ci(&fr);
            let envelope = l as f64 * de[d - 1].p_der;
            let below = m.mean <= envelope + 3.0 * m.sd / (seeds as f64).sqrt();
            let theta = cfg.theta.unwrap_or_else(|| m.mean.sqrt());
            let large = fr.iter().filter(|&&x| x >= theta && x > 0.0).count();
            let (llo, lhi) = wilson(large, seeds);
            let mut row: Vec<Cell> = vec![l.into(), r.into(), e.into(), n.into(), d.into(), seeds.into()];
            row.extend([m.mean.into(), m.lo.into(), m.hi.into(), m.sd.into()]);
            row.extend(exact(envelope));
            row.extend([below.into(), theta.into(), (large as f64 / seeds as f64).into(), llo.into(), lhi.into()]);
            t.push(row);
        }
    }
    Ok(Report { tables: vec![t] })
}
