use proptest::prelude::*;
use xlim_core::decoders::*;
use xlim_core::graph::sample_regular_graph;
use xlim_core::rng::derive;

#[test]
fn noise_fraction_within_binomial_ci() {
    let n = 1_000_000;
    let eps = 0.03;
    let e = sample_noise(n, Channel::Bsc, eps, 42).unwrap();
    let frac = e.bad_count() as f64 / n as f64;
    let sigma = (eps * (1.0 - eps) / n as f64).sqrt();
    assert!((frac - eps).abs() <= 3.0 * sigma, "{frac}");
    assert_eq!(e, sample_noise(n, Channel::Bsc, eps, 42).unwrap());
}

#[test]
fn lgalb_below_threshold_cleans_up() {
    let n = 20_000;
    let g = sample_regular_graph(n, 3, 6, 5).unwrap();
    let e = sample_noise(n, Channel::Bsc, 0.03, 6).unwrap();
    let t = run_decoder(&g, &e, &DecoderSpec::LGalB, 200, 7).unwrap();
    assert_eq!(t.points.len(), 200);
    let at5 = t.points[4].ber;
    let at200 = t.points[199].ber;
    assert!(at200 < at5, "{at200} vs {at5}");
    assert!(at200 < 1e-3, "{at200}");
}

/// Run two decoders in lock step on the same graph, noise and coins.
fn coupled_subset_check(n: usize, eps: f64, seed: u64, iters: usize) -> Result<(), String> {
    let g = sample_regular_graph(n, 3, 6, derive(seed, 0)).unwrap();
    let e = sample_noise(n, Channel::Bsc, eps, derive(seed, 1)).unwrap();
    let mut galb = Decoder::new(&g, &e, &DecoderSpec::GalB, seed).unwrap();
    let mut lgalb = Decoder::new(&g, &e, &DecoderSpec::LGalB, seed).unwrap();
    for _ in 0..iters {
        for edge in 0..g.num_edges() {
            if galb.v2c_bad(edge) && !lgalb.v2c_bad(edge) {
                return Err(format!("edge {edge} at iteration {}", galb.iteration()));
            }
        }
        galb.step().unwrap();
        lgalb.step().unwrap();
    }
    Ok(())
}

#[test]
fn galb_bad_set_inside_lgalb_bad_set() {
    for k in 0..20 {
        coupled_subset_check(2400, 0.02 + 0.002 * k as f64, k, 40).unwrap();
    }
}

#[test]
fn lgalb_monotone_in_noise() {
    let n = 1200;
    let g = sample_regular_graph(n, 3, 6, 3).unwrap();
    let e = sample_noise(n, Channel::Bsc, 0.05, 4).unwrap();
    let mut cleaner = e.clone();
    for (i, b) in cleaner.bad.iter_mut().enumerate() {
        if *b && i % 3 == 0 {
            *b = false;
        }
    }
    let mut a = Decoder::new(&g, &e, &DecoderSpec::LGalB, 1).unwrap();
    let mut b = Decoder::new(&g, &cleaner, &DecoderSpec::LGalB, 1).unwrap();
    for _ in 0..50 {
        for edge in 0..g.num_edges() {
            assert!(!b.v2c_bad(edge) || a.v2c_bad(edge));
        }
        a.step().unwrap();
        b.step().unwrap();
    }
}

#[test]
fn bounded_decoders_respect_saturation() {
    let n = 600;
    let g = sample_regular_graph(n, 3, 6, 8).unwrap();
    let e = sample_noise(n, Channel::Bsc, 0.08, 9).unwrap();
    let specs = [
        (DecoderSpec::MinSum { saturation: Some(3) }, 3.0),
        (DecoderSpec::LinearMinSum { saturation: 2 }, 2.0),
        (DecoderSpec::Bp { saturation: Some(10.0), channel_llr_bound: Some(3.0) }, 10.0),
    ];
    for (spec, m) in specs {
        let mut d = Decoder::new(&g, &e, &spec, 0).unwrap();
        for _ in 0..30 {
            d.step().unwrap();
            match &d.state().c2v {
                Messages::Int(v) => assert!(v.iter().all(|x| x.abs() as f64 <= m)),
                Messages::Real(v) => assert!(v.iter().all(|x| x.abs() <= m)),
            }
        }
    }
}

#[test]
fn min_sum_messages_are_integers_on_the_channel_lattice() {
    let n = 300;
    let g = sample_regular_graph(n, 3, 6, 1).unwrap();
    let e = sample_noise(n, Channel::Bsc, 0.05, 2).unwrap();
    let mut d = Decoder::new(&g, &e, &DecoderSpec::MinSum { saturation: None }, 0).unwrap();
    d.step().unwrap();
    // after one iteration: channel ±1 plus two check messages of magnitude 1
    match &d.state().v2c {
        Messages::Int(v) => assert!(v.iter().all(|x| [-3, -1, 1, 3].contains(x))),
        Messages::Real(_) => panic!("integer representation expected"),
    }
}

#[test]
fn erasure_decoder_matches_peeling_fixed_point() {
    // BP on the BEC ends in the stopping set of the erasure pattern
    let n = 900;
    let g = sample_regular_graph(n, 3, 6, 12).unwrap();
    let e = sample_noise(n, Channel::Bec, 0.35, 13).unwrap();
    let t = run_decoder(&g, &e, &DecoderSpec::BecBp, 300, 0).unwrap();
    // peeling decoder
    let mut erased = e.bad.clone();
    loop {
        let mut changed = false;
        for c in 0..g.m() {
            let unknown: Vec<usize> =
                g.check_edges(c).iter().map(|&x| g.edge(x).var).filter(|&v| erased[v]).collect();
            let mut distinct = unknown.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() == 1 && unknown.len() == 1 {
                erased[distinct[0]] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let peeled = erased.iter().filter(|b| **b).count() as f64 / n as f64;
    assert_eq!(t.points.last().unwrap().ber, peeled);
}

#[test]
fn replay_reproduces_trace() {
    let g = sample_regular_graph(240, 4, 6, 2).unwrap();
    let e = sample_noise(240, Channel::Bsc, 0.04, 3).unwrap();
    let t = run_decoder(&g, &e, &DecoderSpec::GalB, 30, 77).unwrap();
    let replay = Replay::capture(&g, &e, DecoderSpec::GalB, 30, 77);
    let back = Replay::from_json(&replay.to_json().unwrap()).unwrap();
    assert_eq!(back.run().unwrap(), t);
}

#[test]
fn variance_of_ber_shrinks_with_blocklength() {
    let eps = 0.06;
    let iters = 10;
    let seeds = 40u64;
    let var_at = |n: usize| {
        let xs: Vec<f64> = (0..seeds)
            .map(|s| {
                let g = sample_regular_graph(n, 3, 6, derive(s, 1)).unwrap();
                let e = sample_noise(n, Channel::Bsc, eps, derive(s, 2)).unwrap();
                run_decoder(&g, &e, &DecoderSpec::GalB, iters, s).unwrap().points[iters - 1].ber
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let v: Vec<f64> = [1 << 10, 1 << 12, 1 << 14].iter().map(|&n| var_at(n)).collect();
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
}

#[test]
fn expansion_search_finds_no_violation() {
    // r = 2 keeps exhaustive verification cheap enough that alpha n / (l r)
    // exceeds 1, so runs with a bad variable can qualify
    let cfg = ExpansionSearch {
        l: 3,
        r: 2,
        n: 30,
        alpha: 7.0 / 30.0,
        gamma: 2.0 / 3.0,
        decoder: DecoderSpec::BecBp,
        eps: 0.1,
        graphs: 300,
        noises_per_graph: 100,
        seed: 5,
        budget: 1 << 24,
    };
    let rep = expansion_decoding_search(&cfg).unwrap();
    assert!(rep.strength_condition);
    assert!(rep.bad_variable_limit > 1.0);
    assert!(rep.expanders > 0);
    assert!(rep.qualifying_nontrivial > 0);
    assert!(rep.violations.is_empty(), "{:?}", rep.violations.len());
    assert_eq!(rep.successes, rep.qualifying);
}

#[test]
fn expansion_search_is_vacuous_for_small_3_6_graphs() {
    let cfg = ExpansionSearch {
        l: 3,
        r: 6,
        n: 12,
        alpha: 0.25,
        gamma: 2.0 / 3.0,
        decoder: DecoderSpec::BecBp,
        eps: 0.05,
        graphs: 100,
        noises_per_graph: 5,
        seed: 5,
        budget: 1 << 24,
    };
    let rep = expansion_decoding_search(&cfg).unwrap();
    assert!(rep.bad_variable_limit < 1.0);
    assert_eq!(rep.qualifying_nontrivial, 0);
    assert!(rep.violations.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn coupling_holds_on_random_triples(seed in any::<u64>(), eps in 0.01f64..0.12, n in 2usize..200) {
        prop_assert!(coupled_subset_check(6 * n, eps, seed, 25).is_ok());
    }
}
