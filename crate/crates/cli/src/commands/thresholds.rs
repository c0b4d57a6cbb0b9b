use rayon::prelude::*;
use xlim_core::de::{find_threshold, DiscreteMap, MinSumVariant, ScalarDecoder, ScalarMap, Threshold, DEFAULT_MAX_ITERS};
use xlim_core::graph::shannon_threshold;
use xlim_core::DecoderSpec;

use super::{bad, list};
use crate::config::ExperimentConfig;
use crate::output::{Cell, Report, Table};

/// Rows `(3, 3..=10)` then `(4, 4..=10)`.
pub fn default_threshold_rows() -> Vec<(usize, usize)> {
    (3..=10).map(|r| (3, r)).chain((4..=10).map(|r| (4, r))).collect()
}

const SHANNON_BRACKET: f64 = 1e-13;

enum Outcome {
    Value(Threshold),
    Unsupported(String),
    Failed(String),
}

fn de_threshold(spec: &DecoderSpec, l: usize, r: usize, tol: f64) -> Outcome {
    let run = |map: &dyn xlim_core::de::DeRecursion| find_threshold(map, tol, DEFAULT_MAX_ITERS, 0.5);
    let result = match *spec {
        DecoderSpec::GalB => ScalarMap::new(ScalarDecoder::GalB, l, r).and_then(|m| run(&m)),
        DecoderSpec::LGalB => ScalarMap::new(ScalarDecoder::LGalB, l, r).and_then(|m| run(&m)),
        DecoderSpec::MinSum { saturation: Some(m) } => {
            DiscreteMap::new(MinSumVariant::MinSum, m, l, r).and_then(|d| run(&d))
        }
        DecoderSpec::LinearMinSum { saturation } => {
            DiscreteMap::new(MinSumVariant::LinearMinSum, saturation, l, r).and_then(|d| run(&d))
        }
        _ => return Outcome::Unsupported(format!("no density evolution for {}", spec.name())),
    };
    match result {
        Ok(t) => Outcome::Value(t),
        Err(xlim_core::Error::Unsupported(m)) => Outcome::Unsupported(m),
        Err(e) => Outcome::Failed(e.to_string()),
    }
}

/// Shannon and DE thresholds with their bisection brackets.
pub fn cmd_thresholds(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let rows = match (&cfg.l, &cfg.r) {
        (None, None) => default_threshold_rows(),
        (l, r) => {
            let ls = list(l, &[3]);
            let rs = list(r, &[6]);
            ls.iter().flat_map(|&l| rs.iter().map(move |&r| (l, r))).collect()
        }
    };
    if let Some((l, r)) = rows.iter().find(|(l, r)| *l < 2 || *r < 2) {
        return Err(bad(format!("degrees must be at least 2, got ({l}, {r})")));
    }
    let tol = cfg.tol.unwrap_or(1e-6);
    if !(tol > 0.0) {
        return Err(bad(format!("--tol must be positive, got {tol}")));
    }
    let names = list(&cfg.decoder, &["galb".to_string(), "lgalb".to_string()]);
    // parse failures are reported per row, like any unsupported decoder
    let specs: Vec<(String, Result<DecoderSpec, String>)> =
        names.iter().map(|s| (s.clone(), DecoderSpec::parse(s).map_err(|e| e.to_string()))).collect();

    let cells: Vec<(usize, usize, Option<usize>)> = rows
        .iter()
        .flat_map(|&(l, r)| std::iter::once((l, r, None)).chain((0..specs.len()).map(move |k| (l, r, Some(k)))))
        .collect();
    let outcomes: Vec<Outcome> = cells
        .par_iter()
        .map(|&(l, r, k)| match k {
            None => {
                let rate = (1.0 - l as f64 / r as f64).max(0.0);
                match shannon_threshold(rate) {
                    Ok(v) => Outcome::Value(Threshold {
                        estimate: v,
                        lo: v - SHANNON_BRACKET,
                        hi: v + SHANNON_BRACKET,
                        bisections: 0,
                    }),
                    Err(e) => Outcome::Failed(e.to_string()),
                }
            }
            Some(k) => match &specs[k].1 {
                Ok(spec) => de_threshold(spec, l, r, tol),
                Err(e) => Outcome::Unsupported(e.clone()),
            },
        })
        .collect();

    let mut t = Table::new("thresholds", &["l", "r", "rate", "quantity", "threshold", "lo", "hi", "status", "note"]);
    for (&(l, r, k), out) in cells.iter().zip(outcomes) {
        let quantity = k.map_or("sha".to_string(), |k| specs[k].0.clone());
        let rate = 1.0 - l as f64 / r as f64;
        let mut row: Vec<Cell> = vec![l.into(), r.into(), rate.into(), quantity.into()];
        match out {
            Outcome::Value(th) => {
                row.extend([th.estimate.into(), th.lo.into(), th.hi.into(), "ok".into(), Cell::Empty]);
            }
            Outcome::Unsupported(m) => {
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty, "unsupported".into(), m.into()]);
            }
            Outcome::Failed(m) => {
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty, "failed".into(), m.into()]);
            }
        }
        t.push(row);
    }
    Ok(Report { tables: vec![t] })
}
