use rayon::prelude::*;
use xlim_core::rprocess::{bd_tail, fit_tail, strategy_domination_check, BdParams, RParams, RState, Strategy};

use super::{bad, list, positive, single};
use crate::config::ExperimentConfig;
use crate::output::{Cell, Report, Table};
use crate::stats::{ols, wilson, Z95};

/// Twelve `(a, p, mu, beta)` points; the last block has `mu < p` and
/// includes a cell with `beta >= p/(p - mu)`.
pub fn default_bd_grid() -> Vec<BdParams> {
    // horizons straddle the mean stopping time a/(1-mu); (20, 0.5, 0.3, 3.0)
    // is past the certain-stop point beta = p/(p-mu) = 2.5
    let cells: [(u64, f64, f64, [f64; 3]); 4] = [
        (20, 0.5, 0.3, [1.2, 1.5, 3.0]),
        (10, 0.3, 0.5, [1.5, 2.0, 3.0]),
        (40, 0.2, 0.4, [1.4, 1.8, 2.5]),
        (15, 0.8, 0.6, [2.0, 2.5, 3.5]),
    ];
    cells
        .iter()
        .flat_map(|&(a, p, mu, betas)| betas.map(|beta| BdParams { a, p, mu, beta }))
        .collect()
}

fn params(cfg: &ExperimentConfig) -> anyhow::Result<(RParams, f64)> {
    let r = single(&cfg.r, "r", 6)?;
    let delta = cfg.delta.unwrap_or(1.0 / 11.0);
    let p = RParams::from_delta(u32::try_from(r).map_err(|_| bad("r too large"))?, delta)?;
    let eps = single(&cfg.eps, "eps", 0.05)?;
    Ok((p, eps))
}

fn tail(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let (p, eps) = params(cfg)?;
    let s0s = list(&cfg.s0, &[50, 100, 200, 400]);
    let trials = positive(cfg.trials.unwrap_or(4000), "trials")?;
    let fit = fit_tail(&s0s, eps, &p, cfg.c, trials, cfg.seed())?;
    let mut t = Table::new(
        "tail",
        &["r", "delta", "eps", "c", "s0", "trials", "hits", "prob", "prob_lo", "prob_hi", "mean_ratio", "ratio_lo", "ratio_hi"],
    );
    for pt in &fit.points {
        let (lo, hi) = wilson(pt.hits, pt.trials);
        let half = Z95 * pt.ratio_sd / (pt.trials as f64).sqrt();
        t.push(vec![
            p.r.into(), p.delta().into(), eps.into(), fit.c.into(), pt.s0.into(), pt.trials.into(), pt.hits.into(),
            pt.prob.into(), lo.into(), hi.into(), pt.mean_ratio.into(), (pt.mean_ratio - half).into(), (pt.mean_ratio + half).into(),
        ]);
    }
    let used: Vec<_> = fit.points.iter().filter(|p| p.hits > 0).collect();
    let line = ols(
        &used.iter().map(|p| p.s0 as f64).collect::<Vec<_>>(),
        &used.iter().map(|p| p.prob.ln()).collect::<Vec<_>>(),
    );
    let se = line.map_or(f64::NAN, |l| l.slope_se);
    let mut f = Table::new("fit", &["c", "points", "slope", "slope_lo", "slope_hi", "intercept", "c_prime", "c_prime_lo", "c_prime_hi"]);
    f.push(vec![
        fit.c.into(), used.len().into(), fit.slope.into(), (fit.slope - Z95 * se).into(), (fit.slope + Z95 * se).into(),
        fit.intercept.into(), fit.c_prime.into(), (fit.c_prime - Z95 * se).into(), (fit.c_prime + Z95 * se).into(),
    ]);
    Ok(Report { tables: vec![t, f] })
}

fn strategies(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let (p, eps) = params(cfg)?;
    let s0s = list(&cfg.s0, &[20]);
    let trials = positive(cfg.trials.unwrap_or(1000), "trials")?;
    let mut t = Table::new(
        "strategies",
        &[
            "s0", "strategy", "pairs", "violations", "violation_lo", "violation_hi",
            "mean_greedy", "greedy_lo", "greedy_hi", "mean_other", "other_lo", "other_hi",
        ],
    );
    let others = [
        ("never_boundary", Strategy::NeverBoundary),
        ("random_admissible_0.5", Strategy::RandomAdmissible { prob: 0.5 }),
        ("greedy", Strategy::Greedy),
    ];
    for (i, &s0) in s0s.iter().enumerate() {
        if s0 == 0 {
            return Err(bad("--s0 values must be positive"));
        }
        for (k, (name, other)) in others.iter().enumerate() {
            let seed = xlim_core::rng::derive(cfg.seed(), (i * others.len() + k) as u64);
            let rep = strategy_domination_check(&p, RState::initial(s0 as i64), *other, eps, trials, seed)?;
            let (vlo, vhi) = wilson(rep.violations, rep.pairs);
            let h = |sd: f64| Z95 * sd / (rep.pairs as f64).sqrt();
            t.push(vec![
                s0.into(), (*name).into(), rep.pairs.into(), rep.violations.into(), vlo.into(), vhi.into(),
                rep.mean_greedy.into(), (rep.mean_greedy - h(rep.sd_greedy)).into(), (rep.mean_greedy + h(rep.sd_greedy)).into(),
                rep.mean_other.into(), (rep.mean_other - h(rep.sd_other)).into(), (rep.mean_other + h(rep.sd_other)).into(),
            ]);
        }
    }
    Ok(Report { tables: vec![t] })
}

fn bd(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let grid: Vec<BdParams> = match (&cfg.bd_a, &cfg.bd_p, &cfg.bd_mu, &cfg.bd_beta) {
        (None, None, None, None) => default_bd_grid(),
        (a, p, mu, beta) => {
            let (a, p, mu, beta) = (list(a, &[20]), list(p, &[0.5]), list(mu, &[0.3]), list(beta, &[2.0]));
            let mut v = Vec::new();
            for &a in &a {
                for &p in &p {
                    for &mu in &mu {
                        for &beta in &beta {
                            v.push(BdParams { a, p, mu, beta });
                        }
                    }
                }
            }
            v
        }
    };
    for g in &grid {
        g.validate()?;
    }
    let trials = positive(cfg.trials.unwrap_or(20_000), "trials")?;
    let master = cfg.seed();
    let results = grid
        .par_iter()
        .enumerate()
        .map(|(k, g)| bd_tail(g, trials, xlim_core::rng::derive(master, k as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "birth_death",
        &[
            "a", "p", "mu", "beta", "horizon", "trials", "survivors", "empirical", "empirical_lo", "empirical_hi",
            "exact", "chernoff", "s", "certain_stop", "exact_within_chernoff",
        ],
    );
    for x in results {
        let (lo, hi) = wilson(x.survivors, x.trials);
        let bp = x.params;
        t.push(vec![
            bp.a.into(), bp.p.into(), bp.mu.into(), bp.beta.into(), bp.horizon().into(), x.trials.into(), x.survivors.into(),
            x.empirical.into(), lo.into(), hi.into(), Cell::from(x.exact), x.chernoff.into(), Cell::from(x.s),
            bp.certain_stop().into(), Cell::from(x.exact.map(|e| e <= x.chernoff * (1.0 + 1e-9))),
        ]);
    }
    Ok(Report { tables: vec![t] })
}

/// `--mode tail` (default), `strategies` or `bd`.
pub fn cmd_rprocess(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    match cfg.mode.as_deref().unwrap_or("tail") {
        "tail" => tail(cfg),
        "strategies" => strategies(cfg),
        "bd" => bd(cfg),
        m => Err(bad(format!("unknown rprocess mode {m:?}; expected tail, strategies or bd"))),
    }
}
