use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graph::{check_expander_with_budget, sample_regular_graph, ExpansionSpec, Side};
use crate::rng::{derive, substream};

use super::{good_set_for, sample_noise, Decoder, DecoderSpec, Replay};

/// Seeded search for decoding runs on verified expanders.
///
/// On an `(l, r, alpha, gamma)` left expander with `beta (l-1)/l <= 2 gamma - 1`,
/// a decoder whose number of bad variables drops below `alpha n / (l r)`
/// must end with every message good. The search samples graphs, keeps the
/// verified expanders and checks that implication on sampled noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSearch {
    pub l: usize,
    pub r: usize,
    pub n: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub decoder: DecoderSpec,
    pub eps: f64,
    pub graphs: usize,
    pub noises_per_graph: usize,
    pub seed: u64,
    pub budget: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSearchReport {
    pub beta: f64,
    /// `beta (l-1)/l <= 2 gamma - 1`.
    pub strength_condition: bool,
    /// `alpha n / (l r)`; qualifying runs have strictly fewer bad variables.
    pub bad_variable_limit: f64,
    pub graphs_sampled: usize,
    pub expanders: usize,
    pub runs: usize,
    /// Runs that reached fewer than `bad_variable_limit` bad variables.
    pub qualifying: usize,
    /// Qualifying runs where that happened with at least one bad variable.
    pub qualifying_nontrivial: usize,
    pub successes: usize,
    /// Runs that qualified but did not end clean, for replay.
    pub violations: Vec<Replay>,
}

fn bad_variables(dec: &Decoder<'_>) -> usize {
    let g = dec.graph();
    (0..g.n()).filter(|&v| g.var_edges(v).iter().any(|&e| dec.v2c_bad(e))).count()
}

pub fn expansion_decoding_search(cfg: &ExpansionSearch) -> Result<ExpansionSearchReport> {
    if !matches!(cfg.decoder, DecoderSpec::GalB | DecoderSpec::BecBp) {
        return Err(Error::Unsupported(format!(
            "expansion search needs a decoder whose bad set is the complement of its good set; got {}",
            cfg.decoder.name()
        )));
    }
    let spec = ExpansionSpec::new(cfg.alpha, cfg.gamma, Side::Left)?;
    if cfg.noises_per_graph == 0 {
        return param("noises_per_graph must be positive");
    }
    let gs = good_set_for(&cfg.decoder, cfg.l, cfg.r, 0.0)?;
    let l = cfg.l as f64;
    let strength_condition = gs.beta * (l - 1.0) / l <= 2.0 * cfg.gamma - 1.0 + 1e-12;
    let limit = cfg.alpha * cfg.n as f64 / (l * cfg.r as f64);
    let graph_seed = substream(cfg.seed, "graphs");
    let noise_seed = substream(cfg.seed, "noise");

    // per graph: (is expander, outcomes of its runs)
    type Outcome = (bool, bool, bool, Option<Replay>);
    let per_graph: Vec<Result<(bool, Vec<Outcome>)>> = (0..cfg.graphs)
        .into_par_iter()
        .map(|k| {
            let g = sample_regular_graph(cfg.n, cfg.l, cfg.r, derive(graph_seed, k as u64))?;
            if !check_expander_with_budget(&g, &spec, cfg.budget)? {
                return Ok((false, Vec::new()));
            }
            let mut outs = Vec::with_capacity(cfg.noises_per_graph);
            for j in 0..cfg.noises_per_graph {
                let s = derive(derive(noise_seed, k as u64), j as u64);
                let e = sample_noise(cfg.n, cfg.decoder.channel(), cfg.eps, s)?;
                let mut dec = Decoder::new(&g, &e, &cfg.decoder, s)?;
                // a shrinking bad set empties within n further iterations
                let horizon = 4 * cfg.n + 10;
                let mut qualified_with = None;
                for _ in 0..horizon {
                    let b = bad_variables(&dec);
                    if (b as f64) < limit {
                        qualified_with = Some(b);
                        break;
                    }
                    dec.step()?;
                }
                let Some(b0) = qualified_with else {
                    outs.push((false, false, false, None));
                    continue;
                };
                for _ in 0..cfg.n + 2 {
                    if bad_variables(&dec) == 0 {
                        break;
                    }
                    dec.step()?;
                }
                let ok = bad_variables(&dec) == 0;
                let replay = (!ok).then(|| Replay::capture(&g, &e, cfg.decoder, dec.iteration(), s));
                outs.push((true, b0 > 0, ok, replay));
            }
            Ok((true, outs))
        })
        .collect();

    let mut report = ExpansionSearchReport {
        beta: gs.beta,
        strength_condition,
        bad_variable_limit: limit,
        graphs_sampled: cfg.graphs,
        expanders: 0,
        runs: 0,
        qualifying: 0,
        qualifying_nontrivial: 0,
        successes: 0,
        violations: Vec::new(),
    };
    for item in per_graph {
        let (is_exp, outs) = item?;
        report.expanders += usize::from(is_exp);
        for (q, nontrivial, ok, replay) in outs {
            report.runs += 1;
            report.qualifying += usize::from(q);
            report.qualifying_nontrivial += usize::from(q && nontrivial);
            report.successes += usize::from(q && ok);
            report.violations.extend(replay);
        }
    }
    Ok(report)
}
