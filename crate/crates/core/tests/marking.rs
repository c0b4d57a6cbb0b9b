use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use xlim_core::de::witness_trajectory;
use xlim_core::decoders::{sample_noise, Channel, Decoder, DecoderSpec, NoiseRealization};
use xlim_core::graph::{sample_regular_graph, Edge, TannerGraph};
use xlim_core::marking::*;
use xlim_core::rng::derive;

/// A (3,4) graph whose depth-3 computation tree below edge 0 is a tree.
///
/// Variable 0 sends edge 0 to check 0 and sees checks 1 and 2. Variables
/// 1..=3 hang below check 1, 4..=6 below check 2; variable `x` in 1..=6 has
/// child checks `1 + 2x` and `2 + 2x`, each with three leaves. The leaves'
/// remaining sockets, and one extra variable, close the graph through
/// check 0 and checks 15..33, which sit below the depth of the tree.
fn witness_fixture() -> (TannerGraph, NoiseRealization) {
    let mut adj: Vec<[usize; 3]> = vec![[0, 1, 2]];
    for x in 1..=6 {
        let parent = if x <= 3 { 1 } else { 2 };
        adj.push([parent, 1 + 2 * x, 2 + 2 * x]);
    }
    let mut free_checks = std::iter::repeat_n(0, 3).chain((15..33).flat_map(|c| std::iter::repeat_n(c, 4)));
    for leaf in 7..43 {
        let own = 3 + (leaf - 7) / 3;
        adj.push([own, free_checks.next().unwrap(), free_checks.next().unwrap()]);
    }
    adj.push([free_checks.next().unwrap(), free_checks.next().unwrap(), free_checks.next().unwrap()]);
    assert!(free_checks.next().is_none());
    let edges = adj.iter().enumerate().flat_map(|(v, cs)| cs.iter().map(move |&c| Edge { var: v, check: c })).collect();
    let g = TannerGraph::from_edges(44, 33, 3, 4, edges).unwrap();
    let mut bad = vec![false; 44];
    for v in [0, 2, 4, 8, 9, 10, 13, 25] {
        bad[v] = true;
    }
    (g, NoiseRealization::new(Channel::Bsc, 0.1, bad).unwrap())
}

#[test]
fn fixture_witness_is_the_hand_derived_subtree() {
    let (g, e) = witness_fixture();
    let h = lgalb_history(&g, &e, 3).unwrap();
    assert!(h.v2c_bad(3, 0));
    // both checks below the root report bad; variables 1 and 2 both send bad
    assert!(h.c2v_bad(3, 1) && h.c2v_bad(3, 2));
    assert!(h.v2c_bad(2, 3) && h.v2c_bad(2, 6) && !h.v2c_bad(2, 9));
    let w = build_witness_from_history(&g, &h, 3, &[0]).unwrap();
    let d = |edge: usize, o: Orientation| {
        let Edge { var, check } = g.edge(edge);
        DirectedEdge { edge, var, check, orientation: o }
    };
    use Orientation::*;
    let expected: BTreeSet<DirectedEdge> = [
        d(0, CheckToVar),
        d(1, VarToCheck),
        d(3, CheckToVar),
        d(4, VarToCheck),
        d(24, CheckToVar),
        d(5, VarToCheck),
        d(30, CheckToVar),
    ]
    .into();
    assert_eq!(w.edges, expected);
    let vars: BTreeMap<usize, bool> = [(0, true), (1, false), (8, true), (10, true)].into();
    assert_eq!(w.variables, vars);
    assert_eq!(w.checks, [0, 1, 3, 4].into());
    assert_eq!(w.size(), 4);
    // the full witness contains the single-edge one
    let all = build_witness(&g, &e, 3).unwrap();
    assert!(all.roots.contains(&0));
    assert!(w.edges.is_subset(&all.edges));
}

#[test]
fn witness_dump_roundtrip_and_replay() {
    let (g, e) = witness_fixture();
    let w = build_witness(&g, &e, 3).unwrap();
    let dump = WitnessDump::capture(&g, &e, &w);
    let back = WitnessDump::from_json(&dump.to_json().unwrap()).unwrap();
    assert_eq!(back, dump);
    assert!(back.verify().unwrap());
}

#[test]
fn no_bad_edges_gives_empty_witness() {
    let g = sample_regular_graph(60, 3, 6, 1).unwrap();
    let e = NoiseRealization::clean(Channel::Bsc, 0.05, 60).unwrap();
    let w = build_witness(&g, &e, 5).unwrap();
    assert!(w.is_empty());
    assert_eq!(w.size(), 0);
}

#[test]
fn witness_rejects_bad_requests() {
    let g4 = sample_regular_graph(60, 4, 6, 1).unwrap();
    let e = sample_noise(60, Channel::Bsc, 0.05, 2).unwrap();
    assert!(matches!(build_witness(&g4, &e, 3), Err(xlim_core::error::Error::Unsupported(_))));
    let g = sample_regular_graph(60, 3, 6, 1).unwrap();
    let h = lgalb_history(&g, &e, 3).unwrap();
    assert!(build_witness_from_history(&g, &h, 4, &[]).is_err());
    assert!(build_witness(&g, &e, 0).is_err());
}

fn small_instance(seed: u64, n: usize, eps: f64) -> (TannerGraph, NoiseRealization) {
    let g = sample_regular_graph(n, 3, 6, derive(seed, 0)).unwrap();
    let e = sample_noise(n, Channel::Bsc, eps, derive(seed, 1)).unwrap();
    (g, e)
}

fn lgalb_bad_edges(g: &TannerGraph, e: &NoiseRealization, iters: usize) -> Vec<usize> {
    lgalb_history(g, e, iters).unwrap().bad_edges(iters)
}

#[test]
fn marking_is_schedule_independent() {
    for k in 0..12u64 {
        let (g, e) = small_instance(k, 48, 0.1);
        let init = lgalb_bad_edges(&g, &e, 1 + (k as usize % 4));
        let fifo = run_marking(&g, &e, &init, Schedule::Fifo).unwrap();
        let lifo = run_marking(&g, &e, &init, Schedule::Lifo).unwrap();
        assert_eq!(fifo.marked, lifo.marked);
        assert_eq!(fifo.marked_v2c, lifo.marked_v2c);
        for s in 0..100 {
            let rnd = run_marking(&g, &e, &init, Schedule::Random(derive(k, s))).unwrap();
            assert_eq!(rnd.marked, fifo.marked, "instance {k}, order {s}");
            assert_eq!(rnd.steps, fifo.steps);
        }
    }
}

#[test]
fn lgalb_errors_stay_inside_the_marked_set() {
    for k in 0..60u64 {
        let n = [600, 1200, 3000][k as usize % 3];
        let eps = 0.02 + 0.001 * (k % 40) as f64;
        let (g, e) = small_instance(100 + k, n, eps);
        let rep = dominance_check(&g, &e, 2 + (k as usize % 10), 30, k).unwrap();
        assert_eq!(rep.violations(), 0, "{rep:?}");
        assert!(rep.max_lgalb_errors <= rep.marked);
    }
}

#[test]
fn witness_alone_reproduces_the_bad_edges() {
    for k in 0..30u64 {
        let (g, e) = small_instance(200 + k, 600, 0.04);
        let depth = 2 + (k as usize % 8);
        let w = build_witness(&g, &e, depth).unwrap();
        let mut bad = vec![false; g.n()];
        for (&v, &b) in &w.variables {
            bad[v] = b;
        }
        let only = NoiseRealization::new(Channel::Bsc, e.eps, bad).unwrap();
        let again = lgalb_bad_edges(&g, &only, depth);
        assert!(w.roots.iter().all(|r| again.contains(r)), "instance {k}");
        // and the witness of that channel explains at least the same roots
        assert!(w.agrees_with(&e));
    }
}

/// Tiny (3,4) graph with a fixed seed.
fn tiny(n: usize, seed: u64) -> TannerGraph {
    sample_regular_graph(n, 3, 4, seed).unwrap()
}

#[test]
fn empty_witness_error_set_contains_all_good() {
    let g = tiny(8, 3);
    let e = NoiseRealization::clean(Channel::Bsc, 0.1, 8).unwrap();
    let w = build_witness(&g, &e, 2).unwrap();
    let set = error_sets_for_witness(&g, &w, DEFAULT_ENUMERATION_BUDGET).unwrap();
    assert_eq!(set.free_variables.len(), 8);
    assert!(set.contains(0));
    assert!(set.closure_violation().is_none());
    // a single bad variable always creates bad edges at iteration 2
    assert!(!set.contains(1));
}

#[test]
fn error_set_is_empty_for_foreign_witness() {
    let (g, e) = witness_fixture();
    let w = build_witness(&g, &e, 3).unwrap();
    let other = tiny(44, 9);
    assert!(!w.contained_in(&other));
    let set = error_sets_for_witness(&other, &w, DEFAULT_ENUMERATION_BUDGET).unwrap();
    assert_eq!(set.count(), 0);
}

#[test]
fn error_set_budget_is_enforced() {
    let g = tiny(24, 1);
    let e = NoiseRealization::clean(Channel::Bsc, 0.1, 24).unwrap();
    let w = build_witness(&g, &e, 2).unwrap();
    assert!(matches!(
        error_sets_for_witness(&g, &w, 1 << 20),
        Err(xlim_core::error::Error::BudgetExceeded { .. })
    ));
}

#[test]
fn error_sets_are_down_sets_and_satisfy_randomization() {
    let mut nontrivial = 0;
    for seed in 0..8u64 {
        let g = tiny(12, seed);
        for j in 0..6u64 {
            let e = sample_noise(12, Channel::Bsc, 0.15, derive(seed, j)).unwrap();
            for depth in [2, 3] {
                let w = build_witness(&g, &e, depth).unwrap();
                if w.free_variables(12).len() > 12 {
                    continue;
                }
                let set = error_sets_for_witness(&g, &w, DEFAULT_ENUMERATION_BUDGET).unwrap();
                // the generating channel itself is a member
                let own: usize = w.free_variables(12).iter().enumerate().map(|(k, &v)| usize::from(e.bad[v]) << k).sum();
                assert!(set.contains(own));
                assert_eq!(set.closure_violation(), None);
                for eps in [0.05, 0.2, 0.5] {
                    let rep = witness_fkg_check(&g, &w, eps, DEFAULT_ENUMERATION_BUDGET * 2).unwrap();
                    assert!(rep.holds && rep.decreasing, "{rep:?}");
                }
                nontrivial += usize::from(!w.is_empty());
            }
        }
    }
    assert!(nontrivial > 10);
}

#[test]
fn markov_step_holds_on_tiny_graphs() {
    for seed in 0..4u64 {
        let g = tiny(8, seed);
        for eps in [0.05, 0.1, 0.3] {
            for depth in [2, 3] {
                let rep = markov_step_check(&g, eps, depth, None, 1 << 22).unwrap();
                assert!(rep.holds, "{rep:?}");
                assert!(rep.distinct_witnesses > 1);
                // an explicit larger theta only loosens the bound
                let loose = markov_step_check(&g, eps, depth, Some(rep.theta * 2.0 + 0.1), 1 << 22).unwrap();
                assert!(loose.holds);
            }
        }
    }
}

#[test]
fn witness_size_decays_below_the_de_envelope() {
    // (3,6), eps = 0.03, n = 10^4. Witnesses first grow with depth, exactly
    // as the DE prediction does, and shrink once the bad edges die out.
    let (n, eps, seeds) = (10_000, 0.03, 12u64);
    let de = witness_trajectory(eps, 6, 12).unwrap();
    let peak = (2..=12).max_by(|&a, &b| de[a - 1].p_der.total_cmp(&de[b - 1].p_der)).unwrap();
    let mut means = Vec::new();
    for depth in 2..=12 {
        let xs: Vec<f64> = (0..seeds)
            .map(|s| {
                let (g, e) = small_instance(500 + s, n, eps);
                build_witness(&g, &e, depth).unwrap().size() as f64 / n as f64
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / seeds as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64).sqrt();
        if depth <= 10 {
            let envelope = 3.0 * de[depth - 1].p_der;
            assert!(mean <= envelope + 3.0 * sd / (seeds as f64).sqrt(), "depth {depth}: {mean} vs {envelope}");
        }
        means.push(mean);
    }
    assert!(means[peak - 2..].windows(2).all(|w| w[1] < w[0]), "{means:?} (DE peak at {peak})");
}

#[test]
fn tied_decisions_do_not_escape_the_marking() {
    // l = 3 decisions sum four +-1 terms, so ties happen; they are resolved by
    // coins and must still stay within the marked set
    let (g, e) = small_instance(7, 3000, 0.045);
    let mut d = Decoder::new(&g, &e, &DecoderSpec::LGalB, 3).unwrap();
    for _ in 1..4 {
        d.step().unwrap();
    }
    let init: Vec<usize> = (0..g.num_edges()).filter(|&f| d.v2c_bad(f)).collect();
    let out = run_marking(&g, &e, &init, Schedule::Fifo).unwrap();
    for _ in 0..40 {
        d.step().unwrap();
        assert!(d.decision_errors().iter().zip(&out.marked).all(|(err, m)| !err || *m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn marking_is_monotone_in_the_initial_set(seed in any::<u64>(), eps in 0.0f64..0.2, keep in 0.0f64..1.0) {
        let (g, e) = small_instance(seed, 48, eps);
        let all: Vec<usize> = (0..g.num_edges()).filter(|&f| derive(seed, f as u64) % 7 == 0).collect();
        let sub: Vec<usize> = all.iter().copied().filter(|&f| (derive(seed ^ 1, f as u64) as f64 / u64::MAX as f64) < keep).collect();
        let big = run_marking(&g, &e, &all, Schedule::Fifo).unwrap();
        let small = run_marking(&g, &e, &sub, Schedule::Fifo).unwrap();
        prop_assert!(small.marked.iter().zip(&big.marked).all(|(s, b)| !s || *b));
    }

    #[test]
    fn marking_is_monotone_in_the_channel(seed in any::<u64>(), eps in 0.0f64..0.2) {
        let (g, e) = small_instance(seed, 48, eps);
        let init: Vec<usize> = (0..g.num_edges()).filter(|&f| derive(seed, f as u64) % 11 == 0).collect();
        let mut worse = e.clone();
        for v in 0..g.n() {
            worse.bad[v] |= derive(seed ^ 2, v as u64) % 9 == 0;
        }
        let a = run_marking(&g, &e, &init, Schedule::Fifo).unwrap();
        let b = run_marking(&g, &worse, &init, Schedule::Fifo).unwrap();
        prop_assert!(a.marked.iter().zip(&b.marked).all(|(x, y)| !x || *y));
    }
}
