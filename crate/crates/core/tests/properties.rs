use proptest::prelude::*;

use gtp_core::bounds::{log_inequality_gap, prop31_bound, thm41_bound, thm43_bound};
use gtp_core::logmath::{log_add, log_sum_exp};
use gtp_core::{
    run_game, BSequence, BoundQuery, ComplyingAdversary, GameState, GameVariant, IidDist, IidSampler, LeadingConstant, MixtureBank, MixtureStrategy,
    PayoffScheme, Prior, QuadratureSpec, RunOptions, ScriptedPath,
};

fn oufg_move() -> impl Strategy<Value = f64> {
    prop_oneof![Just(-1.0), -1.0f64..3.0, prop::sample::select(vec![-1.0, 1.0])]
}

fn prior() -> impl Strategy<Value = Prior<f64>> {
    prop_oneof![Just(Prior::uniform()), (0.05f64..0.95).prop_map(|a| Prior::power(a).unwrap()), Just(Prior::lil_default())]
}

fn play(s: &mut dyn gtp_core::Strategy<f64>, xs: &[f64]) -> Vec<GameState<f64>> {
    let mut g = GameState::new(GameVariant::Oufg, 1.0).unwrap();
    let mut out = vec![g];
    for &x in xs {
        let m = s.stake(&g);
        g = g.play_round(m, x).unwrap().0;
        s.observe(x);
        out.push(g);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_nonnegative_in_guaranteed_region(c in 1e-3f64..10.0, w in 0.0f64..1.0) {
        let lo = -c / (1.0 + c);
        let t = lo + w * (10.0 - lo);
        let g = log_inequality_gap(t, c).unwrap();
        prop_assert!(g.guaranteed);
        prop_assert!(g.gap >= -1e-12, "t = {t}, C = {c}, gap = {}", g.gap);
    }

    #[test]
    fn mixture_proportion_stays_in_unit_interval(p in prior(), xs in prop::collection::vec(oufg_move(), 1..200)) {
        let mut m = MixtureStrategy::bayes(&p, &QuadratureSpec::default()).unwrap();
        let states = play(&mut m, &xs);
        if let Some(e) = m.current_eps() {
            prop_assert!((0.0..=1.0).contains(&e));
        }
        prop_assert!(states.iter().all(|s| s.k >= 0.0));
    }

    #[test]
    fn recursive_and_integral_capital_agree(p in prior(), xs in prop::collection::vec(oufg_move(), 1..300)) {
        let mut m = MixtureStrategy::bayes(&p, &QuadratureSpec::default()).unwrap();
        play(&mut m, &xs);
        if !m.is_ruined() {
            let (r, i) = (m.log_capital_recursive(), m.log_capital_integral());
            prop_assert!((r - i).abs() <= 1e-9 * (1.0 + i.abs()), "{r} vs {i}");
        }
    }

    #[test]
    fn quadrature_refinement_changes_little(p in prior(), xs in prop::collection::vec(-0.9f64..2.0, 1..100)) {
        let spec = QuadratureSpec::default();
        let mut a = MixtureStrategy::bayes(&p, &spec).unwrap();
        let mut b = MixtureStrategy::bayes(&p, &spec.finer()).unwrap();
        play(&mut a, &xs);
        play(&mut b, &xs);
        let (la, lb) = (a.log_capital_integral(), b.log_capital_integral());
        prop_assert!((la - lb).abs() < 1e-6, "{la} vs {lb}");
    }

    #[test]
    fn bank_equals_individual_mixtures(xs in prop::collection::vec(oufg_move(), 1..100)) {
        let spec = QuadratureSpec::default();
        let ps = [Prior::uniform(), Prior::power(0.5).unwrap()];
        let mut bank = MixtureBank::new(&[&ps[0], &ps[1]], &spec).unwrap();
        let mut ms: Vec<_> = ps.iter().map(|p| MixtureStrategy::bayes(p, &spec).unwrap()).collect();
        for &x in &xs {
            bank.update(x);
            for m in &mut ms {
                gtp_core::Strategy::observe(m, x);
            }
        }
        for (i, m) in ms.iter().enumerate() {
            prop_assert_eq!(bank.log_capital_integral(i), m.log_capital_integral());
            prop_assert_eq!(bank.log_capital_recursive(i), m.log_capital_recursive());
        }
    }

    #[test]
    fn replay_reproduces_final_state(xs in prop::collection::vec(oufg_move(), 0..100), eps in 0.0f64..1.0) {
        let mut c = gtp_core::ConstantProportion::new(eps, GameVariant::Oufg).unwrap();
        let mut p = ScriptedPath::new(xs.clone(), GameVariant::Oufg).unwrap();
        let g0 = GameState::new(GameVariant::Oufg, 1.0).unwrap();
        let run = run_game(g0, &mut c, &mut p, &RunOptions::new(1000), |_, _| {}).unwrap();
        prop_assert_eq!(g0.replay(&run.trace).unwrap(), run.final_state);
    }

    #[test]
    fn iid_streams_are_deterministic(seed in any::<u64>(), d in 0.0f64..1.0) {
        let draw = || {
            let mut s = IidSampler::new(IidDist::ShiftedRademacher(d), seed, GameVariant::Oufg).unwrap();
            (0..32).map(|_| s.draw()).collect::<Vec<_>>()
        };
        prop_assert_eq!(draw(), draw());
    }

    #[test]
    fn bounds_are_applicable_only_inside_preconditions(s in -50.0f64..200.0, a in 1.0f64..1e4, c in 0.01f64..0.49) {
        let u = Prior::uniform();
        let q = BoundQuery { s, a };
        if thm41_bound(&u, q, c, LeadingConstant::Printed).is_applicable() {
            prop_assert!(s > 0.0 && s / a < c / 2.0);
        }
        if thm43_bound(&u, q).is_applicable() {
            prop_assert!(s * s / a > 2.0 && s.powi(3) / (a * a) < 0.5);
        }
        if prop31_bound(&u, q, c).is_applicable() {
            prop_assert!(s > c * a);
        }
    }

    #[test]
    fn log_sum_exp_is_max_plus_bounded_term(v in prop::collection::vec(-700.0f64..700.0, 1..20)) {
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let l = log_sum_exp(v.iter().copied());
        prop_assert!(l >= m && l <= m + (v.len() as f64).ln() + 1e-12);
        let pair = log_add(v[0], m);
        prop_assert!(pair >= m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn adversary_keeps_l_monotone(p in prior(), bpow in 0.5f64..2.5, n in 100u64..2000) {
        let mut adv = ComplyingAdversary::new(BSequence::Power(bpow), PayoffScheme::HedgedBet).unwrap().record_history();
        let mut m = MixtureStrategy::bayes(&p, &QuadratureSpec::default()).unwrap();
        let run = run_game(GameState::new(GameVariant::Oufg, 1.0).unwrap(), &mut m, &mut adv, &RunOptions::new(n), |_, _| {}).unwrap();
        prop_assert!(run.trace.iter().all(|r| r.x == -1.0 || r.x > 0.0));
        // b_n < n - 1 eventually trips the switch to -1, after which L may rise
        let until = adv.degenerate_since().unwrap_or(u64::MAX);
        if bpow >= 1.0 {
            prop_assert_eq!(until, u64::MAX);
        }
        let h = adv.history().unwrap();
        let mut prev = adv.l0().unwrap();
        for r in h.iter().take_while(|r| r.n < until) {
            prop_assert!(r.l <= prev * (1.0 + 1e-9), "round {}: {} > {}", r.n, r.l, prev);
            prev = r.l;
        }
        if until == u64::MAX {
            prop_assert!(run.peak_capital <= 2.0 + 1e-9);
        }
    }
}
