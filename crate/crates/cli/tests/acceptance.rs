//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line followed
//! by indented details; the binary exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p xlim-cli --test acceptance`.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use xlim_cli::{run, CommandKind, ExperimentConfig, Format, Report, Table};
use xlim_core::de::{witness_trajectory, ScalarDecoder, ScalarMap};
use xlim_core::decoders::{sample_noise, Channel};
use xlim_core::graph::sample_regular_graph;
use xlim_core::marking::{build_witness, dominance_check, witness_fkg_check, DEFAULT_ENUMERATION_BUDGET};
use xlim_core::rng::derive;
use xlim_core::rprocess::{bold_domination_grid, RParams};

const SEED: u64 = 0x5eed_acce;

/// Everything a criterion produced, replayed by the determinism check.
struct Artifact {
    label: String,
    job: Job,
    bytes: String,
}

#[derive(Clone)]
enum Job {
    Cli(CommandKind, ExperimentConfig),
    Domination,
    WitnessFkg,
}

static ARTIFACTS: Mutex<Vec<Artifact>> = Mutex::new(Vec::new());

fn render(report: &Report) -> String {
    let mut s = report.render_all(Format::Csv).expect("csv");
    s.push_str(&report.render_all(Format::Json).expect("json"));
    s
}

fn cli_in(kind: CommandKind, cfg: &ExperimentConfig, threads: usize) -> Report {
    let cfg = ExperimentConfig { threads: Some(threads), ..cfg.clone() };
    run(kind, &cfg).unwrap_or_else(|e| panic!("{} failed: {e:#}", kind.name()))
}

/// Run a subcommand single-threaded and keep its output for criterion 9.
fn cli(label: &str, kind: CommandKind, cfg: ExperimentConfig) -> Report {
    let report = cli_in(kind, &cfg, 1);
    ARTIFACTS.lock().unwrap().push(Artifact { label: label.into(), job: Job::Cli(kind, cfg), bytes: render(&report) });
    report
}

fn record(label: &str, job: Job, bytes: String) {
    ARTIFACTS.lock().unwrap().push(Artifact { label: label.into(), job, bytes });
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("pool").install(f)
}

fn rows<'a>(t: &'a Table, pred: impl Fn(usize) -> bool + 'a) -> impl Iterator<Item = usize> + 'a {
    (0..t.rows.len()).filter(move |&i| pred(i))
}

fn text(t: &Table, row: usize, col: &str) -> String {
    t.text(row, col).unwrap_or_else(|| panic!("missing column {col} in {}", t.name))
}

fn float(t: &Table, row: usize, col: &str) -> f64 {
    t.float(row, col).unwrap_or(f64::NAN)
}

struct Verdict {
    id: u32,
    title: &'static str,
    pass: bool,
    details: Vec<String>,
}

impl Verdict {
    fn new(id: u32, title: &'static str) -> Self {
        Self { id, title, pass: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        let msg = msg.into();
        if !ok {
            self.pass = false;
            self.details.push(format!("miss: {msg}"));
        }
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.details.push(msg.into());
    }

    fn print(&self) {
        println!("{} criterion {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.title);
        for d in &self.details {
            println!("    {d}");
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed())
}

// reference thresholds: (l, r, shannon, galb, lgalb)
const TABLES: [(usize, usize, f64, f64, f64); 15] = [
    (3, 3, 0.5, 0.222, 0.1705),
    (3, 4, 0.2145, 0.1068, 0.0847),
    (3, 5, 0.1461, 0.06119, 0.0506),
    (3, 6, 0.11002, 0.0394, 0.0336),
    (3, 7, 0.08766, 0.02751, 0.02398),
    (3, 8, 0.07245, 0.02027, 0.01795),
    (3, 9, 0.06141, 0.01554, 0.01395),
    (3, 10, 0.05324, 0.01229, 0.01115),
    (4, 4, 0.5, 0.0840, 0.0697),
    (4, 5, 0.1461, 0.0464, 0.0399),
    (4, 6, 0.11002, 0.0292, 0.0258),
    (4, 7, 0.08766, 0.0200, 0.018),
    (4, 8, 0.07245, 0.0146, 0.0133),
    (4, 9, 0.06141, 0.0111, 0.0102),
    (4, 10, 0.05324, 0.0087, 0.0081),
];

fn lookup(t: &Table, l: usize, r: usize, quantity: &str) -> f64 {
    rows(t, |i| float(t, i, "l") == l as f64 && float(t, i, "r") == r as f64 && text(t, i, "quantity") == quantity)
        .next()
        .map_or(f64::NAN, |i| float(t, i, "threshold"))
}

fn criterion_1() -> Verdict {
    let mut v = Verdict::new(1, "threshold tables (GalB/LGalB +-5e-4, Shannon +-1e-4, < 60 s)");
    let (report, took) = timed(|| cli("thresholds", CommandKind::Thresholds, ExperimentConfig::default()));
    let t = report.main();
    let mut misses = 0;
    for &(l, r, sha, galb, lgalb) in &TABLES {
        for (q, reference, tol) in [("sha", sha, 1e-4), ("galb", galb, 5e-4), ("lgalb", lgalb, 5e-4)] {
            let got = lookup(t, l, r, q);
            let ok = (got - reference).abs() <= tol;
            misses += usize::from(!ok);
            v.check(ok, format!("({l},{r}) {q}: computed {got:.6}, reference {reference}, |diff| {:.2e} > {tol:e}", (got - reference).abs()));
        }
    }
    v.check(took < Duration::from_secs(60), format!("runtime {took:.1?}"));
    v.note(format!("{} cells, {misses} outside tolerance, runtime {took:.1?}", TABLES.len() * 3));
    v
}

fn criterion_2() -> Verdict {
    let mut v = Verdict::new(2, "MS(2) threshold 0.063 +-1e-3, LMS(2) boundary 0.031 +-1e-3 on (3,6), < 60 s");
    let cfg = ExperimentConfig {
        l: Some(vec![3]),
        r: Some(vec![6]),
        decoder: Some(vec!["ms(2)".into(), "lms(2)".into()]),
        ..Default::default()
    };
    let (report, took) = timed(|| cli("thresholds ms(2)", CommandKind::Thresholds, cfg));
    let t = report.main();
    for (q, reference) in [("ms(2)", 0.063), ("lms(2)", 0.031)] {
        let got = lookup(t, 3, 6, q);
        v.check((got - reference).abs() <= 1e-3, format!("{q}: computed {got:.6}, reference {reference}"));
        v.note(format!("{q} = {got:.6}"));
    }
    v.check(took < Duration::from_secs(60), format!("runtime {took:.1?}"));
    v.note(format!("runtime {took:.1?}"));
    v
}

const DOM_N: [usize; 3] = [1000, 2500, 10_000];
const DOM_R: [usize; 3] = [4, 5, 6];
const DOM_EPS: [f64; 4] = [0.01, 0.03, 0.05, 0.1];
const DOM_START: [usize; 3] = [1, 3, 8];
const DOM_TRIPLES: usize = 216;

/// `(n, dominance report)` for every triple, in index order.
fn domination_reports() -> Vec<(usize, xlim_core::marking::DominanceReport)> {
    (0..DOM_TRIPLES)
        .into_par_iter()
        .map(|k| {
            let n = DOM_N[k % 3];
            let r = DOM_R[k / 3 % 3];
            let eps = DOM_EPS[k / 9 % 4];
            let start = DOM_START[k / 36 % 3];
            let s = derive(SEED, k as u64);
            let g = sample_regular_graph(n, 3, r, derive(s, 0)).expect("graph");
            let e = sample_noise(n, Channel::Bsc, eps, derive(s, 1)).expect("noise");
            (n, dominance_check(&g, &e, start, 25, derive(s, 2)).expect("dominance"))
        })
        .collect()
}

fn criterion_3() -> Verdict {
    let mut v = Verdict::new(3, "GalB within LGalB and LGalB BER within M/n on >= 200 triples, n <= 1e4");
    let reps = domination_reports();
    record("domination", Job::Domination, format!("{reps:?}"));
    v.check(reps.len() >= 200, format!("{} triples", reps.len()));
    let mut violations = 0;
    let mut iterations = 0;
    for (k, (n, rep)) in reps.iter().enumerate() {
        iterations += rep.iterations_checked;
        let bound = rep.max_lgalb_errors <= rep.marked;
        violations += rep.violations() + usize::from(!bound);
        v.check(*n <= 10_000, format!("triple {k} has n = {n}"));
        v.check(rep.violations() == 0 && bound, format!("triple {k}: {rep:?}"));
    }
    let nontrivial = reps.iter().filter(|(_, r)| r.marked > 0).count();
    v.note(format!("{} triples, {iterations} iterations, {nontrivial} with a non-empty marked set, {violations} violations", reps.len()));
    v
}

fn criterion_4() -> Verdict {
    let mut v = Verdict::new(4, "witness DE consistency and Monte Carlo witness sizes below the envelope");
    let mut worst = 0.0f64;
    let mut ratio_checks = 0;
    for r in [4, 5, 6, 8, 10] {
        let map = ScalarMap::new(ScalarDecoder::LGalB, 3, r).expect("map");
        for eps in [0.005, 0.01, 0.02, 0.03, 0.034, 0.05, 0.08] {
            let w = witness_trajectory(eps, r, 200).expect("witness DE");
            let s = map.trajectory(eps, 200).expect("scalar DE");
            v.check(w.len() == 200 && s.len() == 200, format!("(3,{r}) eps {eps}: trajectory lengths"));
            for (a, b) in w.iter().zip(&s) {
                v.check(a.iteration == b.iteration, format!("iteration mismatch at {}", a.iteration));
                let d = (a.p_val - b.x).abs();
                worst = worst.max(d);
                v.check(d <= 1e-12, format!("(3,{r}) eps {eps} l={}: |p - x| = {d:e}", a.iteration));
                let floor = a.iteration as f64 * a.p_val;
                ratio_checks += 1;
                v.check(a.p_der >= floor * (1.0 - 1e-12), format!("(3,{r}) eps {eps} l={}: p' {} < l x {floor}", a.iteration, a.p_der));
            }
        }
    }
    v.note(format!("max |p_l - x_l| = {worst:e} over l <= 200; {ratio_checks} checks of p' >= l x"));

    let w = witness_trajectory(0.03, 6, 200).expect("witness DE");
    let peak = w.iter().enumerate().max_by(|a, b| a.1.p_der.total_cmp(&b.1.p_der)).map(|(i, _)| i).unwrap();
    let l0 = w[peak].iteration;
    let decreasing = w[peak..].windows(2).all(|p| p[1].p_der < p[0].p_der || p[1].p_der == 0.0);
    let last = w[199].p_der;
    v.check(l0 <= 20, format!("peak of p' at l0 = {l0}"));
    v.check(decreasing, "p' not decreasing after its peak");
    v.check(last < 1e-6, format!("p'_200 = {last:e}"));
    v.note(format!("(3,6) eps 0.03: p' peaks at l0 = {l0} ({:.4}), p'_200 = {last:e}", w[peak].p_der));

    let report = cli("witness", CommandKind::Witness, ExperimentConfig {
        n: Some(vec![10_000]),
        eps: Some(vec![0.03]),
        iters: Some(10),
        r: Some(vec![6]),
        ..Default::default()
    });
    let t = report.main();
    v.check(t.rows.len() == 9, format!("{} depths", t.rows.len()));
    for i in 0..t.rows.len() {
        let d = text(t, i, "depth");
        let (m, env, sd, seeds) = (float(t, i, "size_frac"), float(t, i, "envelope"), float(t, i, "size_sd"), float(t, i, "seeds"));
        let ok = m <= env + 3.0 * sd / seeds.sqrt();
        v.check(ok && text(t, i, "below_envelope") == "true", format!("depth {d}: E|W|/n {m:.5} vs envelope {env:.5}"));
        v.note(format!("depth {d}: E|W|/n = {m:.5} (sd {sd:.5}), 3 p' = {env:.5}"));
    }
    v
}

fn criterion_5() -> Verdict {
    let mut v = Verdict::new(5, "birth-death exact tail vs Monte Carlo (3 sigma) and Chernoff on 12 points, < 2 min");
    let cfg = ExperimentConfig { mode: Some("bd".into()), ..Default::default() };
    let (report, took) = timed(|| cli("rprocess bd", CommandKind::Rprocess, cfg));
    let t = report.main();
    v.check(t.rows.len() == 12, format!("{} grid points", t.rows.len()));
    let mut zero_cells = 0;
    for i in 0..t.rows.len() {
        let (a, p, mu, beta) = (text(t, i, "a"), text(t, i, "p"), text(t, i, "mu"), text(t, i, "beta"));
        let (exact, emp, chern, n) = (float(t, i, "exact"), float(t, i, "empirical"), float(t, i, "chernoff"), float(t, i, "trials"));
        let sigma = (exact * (1.0 - exact) / n).sqrt();
        let tag = format!("(a={a}, p={p}, mu={mu}, beta={beta})");
        v.check(exact.is_finite(), format!("{tag}: no exact value"));
        v.check((emp - exact).abs() <= 3.0 * sigma, format!("{tag}: empirical {emp} vs exact {exact:.6} (sigma {sigma:.2e})"));
        v.check(exact <= chern * (1.0 + 1e-9), format!("{tag}: exact {exact:e} > Chernoff {chern:e}"));
        if text(t, i, "certain_stop") == "true" {
            zero_cells += 1;
            v.check(exact == 0.0 && emp == 0.0, format!("{tag}: certain-stop cell gives exact {exact}, empirical {emp}"));
        }
        v.note(format!("{tag}: exact {exact:.6}, empirical {emp:.6}, Chernoff {chern:.4e}"));
    }
    v.check(zero_cells > 0, "grid has no certain-stop cell");
    v.check(took < Duration::from_secs(120), format!("runtime {took:.1?}"));
    v.note(format!("{zero_cells} certain-stop cells, runtime {took:.1?}"));
    v
}

fn criterion_6() -> Verdict {
    let mut v = Verdict::new(6, "R-process bold rows, greedy domination and negative tail slope");
    let range: Vec<i64> = (0..10).collect();
    let mut states = 0;
    for (r, cycle) in [(6, 5), (4, 3), (8, 10)] {
        let p = RParams::new(r, cycle).expect("params");
        let g = bold_domination_grid(&p, &range, &range, &range, &range);
        states += g.states;
        v.check(g.violations == 0, format!("r={r}, N={cycle}: {} of {} states violate", g.violations, g.states));
    }
    v.check(states >= 1000, format!("{states} grid states"));
    v.note(format!("bold rows dominate on {states} states"));

    let report = cli("rprocess strategies", CommandKind::Rprocess, ExperimentConfig {
        mode: Some("strategies".into()),
        trials: Some(1000),
        ..Default::default()
    });
    let t = report.main();
    for i in rows(t, |i| text(t, i, "strategy") != "greedy") {
        let (name, pairs, viol) = (text(t, i, "strategy"), float(t, i, "pairs"), float(t, i, "violations"));
        v.check(pairs >= 1000.0 && viol == 0.0, format!("{name}: {viol} violations in {pairs} pairs"));
        v.note(format!(
            "greedy vs {name}: {pairs} pairs, {viol} violations, mean I_inf {:.3} vs {:.3}",
            float(t, i, "mean_greedy"),
            float(t, i, "mean_other")
        ));
    }

    let report = cli("rprocess tail", CommandKind::Rprocess, ExperimentConfig::default());
    let fit = report.table("fit").expect("fit table");
    let (slope, lo, hi) = (float(fit, 0, "slope"), float(fit, 0, "slope_lo"), float(fit, 0, "slope_hi"));
    v.check(slope < 0.0, format!("fitted slope {slope}"));
    v.note(format!("r=6, eps=0.05, delta=1/11: log P{{I >= c S0}} slope {slope:.5} (95% CI {lo:.5} .. {hi:.5}), c = {:.3}", float(fit, 0, "c")));
    v
}

/// Exhaustive randomization checks on `(3, 4)` graphs with `n = 16`.
fn witness_fkg_reports() -> Vec<(u64, u64, usize, xlim_core::marking::WitnessFkgReport)> {
    let jobs: Vec<(u64, u64, usize)> = (0..4u64).flat_map(|gs| (0..4u64).flat_map(move |es| [2, 3].map(|d| (gs, es, d)))).collect();
    jobs.into_iter()
        .enumerate()
        .map(|(k, (gs, es, depth))| {
            let g = sample_regular_graph(16, 3, 4, derive(SEED, 100 + gs)).expect("graph");
            let e = sample_noise(16, Channel::Bsc, 0.15, derive(SEED, 1000 + 4 * gs + es)).expect("noise");
            let w = build_witness(&g, &e, depth).expect("witness");
            let eps = [0.05, 0.2, 0.5][k % 3];
            (gs, es, depth, witness_fkg_check(&g, &w, eps, 2 * DEFAULT_ENUMERATION_BUDGET).expect("fkg"))
        })
        .collect()
}

fn criterion_7() -> Verdict {
    let mut v = Verdict::new(7, "FKG on 10^3 monotone pairs (n <= 10) and on witness error sets (n' <= 16)");
    let report = cli("fkg", CommandKind::Fkg, ExperimentConfig::default());
    let t = report.main();
    let mut pairs = 0.0;
    let mut failed = 0.0;
    for i in 0..t.rows.len() {
        pairs += float(t, i, "pairs");
        failed += float(t, i, "failed");
        v.check(float(t, i, "n") <= 10.0, format!("row {i}: n = {}", text(t, i, "n")));
        v.check(text(t, i, "lattice_condition") == "true", format!("row {i}: lattice condition"));
    }
    v.check(pairs >= 1000.0 && failed == 0.0, format!("{failed} failures in {pairs} pairs"));
    v.note(format!("{pairs} monotone pairs, {failed} failures"));

    let reps = witness_fkg_reports();
    record("witness fkg", Job::WitnessFkg, format!("{reps:?}"));
    let nonempty = reps.iter().filter(|r| r.3.free_variables < 16).count();
    for (gs, es, depth, rep) in &reps {
        v.check(rep.free_variables <= 16, format!("n' = {}", rep.free_variables));
        v.check(rep.holds && rep.decreasing, format!("graph {gs}, noise {es}, depth {depth}: {rep:?}"));
    }
    v.check(nonempty > 0, "every witness was empty");
    v.note(format!("{} witness error sets ({nonempty} non-empty witnesses), n' <= 16", reps.len()));
    v
}

fn criterion_8() -> Verdict {
    let mut v = Verdict::new(8, "trailing-window max BER non-increasing in n for (3,6) LGalB at eps 0.03 (trend check)");
    let report = cli("sweep", CommandKind::Sweep, ExperimentConfig {
        l: Some(vec![3]),
        r: Some(vec![6]),
        decoder: Some(vec!["lgalb".into()]),
        eps: Some(vec![0.03]),
        n: Some(vec![1 << 12, 1 << 14, 1 << 16]),
        seeds: Some(50),
        iters: Some(200),
        window: Some(50),
        ..Default::default()
    });
    let t = report.main();
    let limsup: Vec<f64> = (0..t.rows.len()).map(|i| float(t, i, "limsup_ber")).collect();
    v.check(limsup.len() == 3, format!("{} block lengths", limsup.len()));
    v.check(limsup.windows(2).all(|w| w[1] <= w[0]), format!("limsup {limsup:?}"));
    for i in 0..t.rows.len() {
        v.check(float(t, i, "seeds") >= 50.0, "fewer than 50 seeds");
        v.note(format!(
            "n = {}: window [{}, {}] max BER {:.3e}, window failure rate {}",
            text(t, i, "n"),
            text(t, i, "window_from"),
            text(t, i, "window_to"),
            float(t, i, "limsup_ber"),
            text(t, i, "window_failure_rate")
        ));
    }
    v
}

fn replay(job: &Job, threads: usize) -> String {
    match job {
        Job::Cli(kind, cfg) => render(&cli_in(*kind, cfg, threads)),
        Job::Domination => in_pool(threads, || format!("{:?}", domination_reports())),
        Job::WitnessFkg => in_pool(threads, || format!("{:?}", witness_fkg_reports())),
    }
}

fn criterion_9() -> Verdict {
    let mut v = Verdict::new(9, "byte-identical output across repeated runs and worker counts");
    let artifacts = std::mem::take(&mut *ARTIFACTS.lock().unwrap());
    for a in &artifacts {
        for (threads, what) in [(1, "repeat"), (4, "4 workers")] {
            let again = replay(&a.job, threads);
            v.check(again == a.bytes, format!("{}: {what} differs", a.label));
        }
    }
    v.note(format!("{} runs replayed single-threaded and with 4 workers", artifacts.len()));
    v
}

fn main() {
    let criteria: [fn() -> Verdict; 9] =
        [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9];
    let mut failed = Vec::new();
    for c in criteria {
        let verdict = c();
        verdict.print();
        if !verdict.pass {
            failed.push(verdict.id);
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
