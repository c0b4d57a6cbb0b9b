use rayon::prelude::*;
use xlim_core::rng::{derive, trial_rng};
use xlim_core::rprocess::{fkg_expectations, fkg_verify, random_increasing_table, ProductMeasure};

use super::{bad, check_eps, list, positive};
use crate::config::ExperimentConfig;
use crate::output::{Report, Table};
use crate::stats::wilson;

/// One random pair: increasing tables for even `k`, their reflections
/// (decreasing) for odd `k`. Returns `(passed, E[fg] - E[f]E[g])`.
pub(crate) fn fkg_pair(n: usize, eps: f64, seed: u64, k: u64) -> xlim_core::Result<(bool, f64)> {
    let mut rng = trial_rng(seed, k);
    let terms = 1 + (k as usize % 5);
    let mut f = random_increasing_table(n, terms, &mut rng);
    let mut g = random_increasing_table(n, terms + 1, &mut rng);
    if k % 2 == 1 {
        let mask = (1usize << n) - 1;
        f = (0..=mask).map(|x| f[!x & mask]).collect();
        g = (0..=mask).map(|x| g[!x & mask]).collect();
    }
    let ok = fkg_verify(n, eps, &f, &g)?;
    let (efg, ef, eg) = fkg_expectations(n, eps, &f, &g)?;
    Ok((ok, efg - ef * eg))
}

/// Pass/fail matrix of exhaustive FKG checks over `n x eps`.
pub fn cmd_fkg(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let ns = list(&cfg.n, &(1..=10).collect::<Vec<_>>());
    if let Some(n) = ns.iter().find(|&&n| n == 0 || n > 12) {
        return Err(bad(format!("lattice dimension {n} is outside 1..=12")));
    }
    let eps = list(&cfg.eps, &[0.05, 0.2, 0.5]);
    check_eps(&eps)?;
    let pairs = positive(cfg.trials.unwrap_or(34), "trials")?;
    let master = cfg.seed();
    let cells: Vec<(usize, usize)> = ns.iter().flat_map(|&n| (0..eps.len()).map(move |j| (n, j))).collect();
    let results = cells
        .par_iter()
        .enumerate()
        .map(|(c, &(n, j))| -> xlim_core::Result<(Vec<(bool, f64)>, bool)> {
            let seed = derive(master, c as u64);
            let v = (0..pairs as u64).map(|k| fkg_pair(n, eps[j], seed, k)).collect::<xlim_core::Result<Vec<_>>>()?;
            let lattice = ProductMeasure::new(n, eps[j])?.lattice_violation().is_none();
            Ok((v, lattice))
        })
        .collect::<xlim_core::Result<Vec<_>>>()?;
    let mut t = Table::new(
        "fkg",
        &["n", "eps", "pairs", "passed", "failed", "pass_rate", "pass_lo", "pass_hi", "min_gap", "lattice_condition"],
    );
    for (&(n, j), (v, lattice)) in cells.iter().zip(results) {
        let passed = v.iter().filter(|p| p.0).count();
        let (lo, hi) = wilson(passed, pairs);
        let min_gap = v.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        t.push(vec![
            n.into(), eps[j].into(), pairs.into(), passed.into(), (pairs - passed).into(),
            (passed as f64 / pairs as f64).into(), lo.into(), hi.into(), min_gap.into(), lattice.into(),
        ]);
    }
    Ok(Report { tables: vec![t] })
}
