//! Closed-form oracles for the public API.

use approx::assert_relative_eq;

use gtp_core::bounds::{log_inequality_gap, remark41_u, thm41_bound, thm43_bound};
use gtp_core::reality::DegenerateRule;
use gtp_core::upper_class::{apply_f, beta, compose_fg, compose_gf, corollary_psi, equivalent_priors, equivalent_psis, EquivalenceOptions, LogGrid};
use gtp_core::{
    build_staircase_tilt, run_game, validate_assumption1, BSequence, BoundQuery, ComplyingAdversary, ConstantProportion, DiscreteMixture, GameState,
    GameVariant, IidDist, IidSampler, Kronecker, LeadingConstant, MixtureStrategy, PayoffScheme, Prior, QuadratureSpec, RunOptions, ScriptedPath, Strategy,
    UpperClassFunction,
};

fn play(s: &mut dyn Strategy<f64>, k0: f64, xs: &[f64]) -> GameState<f64> {
    let mut g = GameState::new(GameVariant::Oufg, k0).unwrap();
    for &x in xs {
        let m = s.stake(&g);
        g = g.play_round(m, x).unwrap().0;
        s.observe(x);
    }
    g
}

/// Coefficients of `prod (1 + eps x_i)` in powers of `eps`.
fn poly(xs: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &x in xs {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &v) in c.iter().enumerate() {
            next[k] += v;
            next[k + 1] += v * x;
        }
        c = next;
    }
    c
}

/// `int_0^1 prod(1 + eps x_i) eps^{-a} deps`.
fn power_mixture(xs: &[f64], a: f64) -> f64 {
    poly(xs).iter().enumerate().map(|(k, c)| c / (k as f64 + 1.0 - a)).sum()
}

#[test]
fn protocol_examples() {
    let g = GameState::new(GameVariant::Oufg, 1.0).unwrap();
    let (g, _) = g.play_round(0.5, 1.0).unwrap();
    assert_eq!((g.s, g.a, g.k), (1.0, 1.0, 1.5));
    let (g, _) = g.play_round(0.75, -1.0).unwrap();
    assert_eq!((g.s, g.a, g.k), (0.0, 2.0, 0.75));
    assert!(GameState::new(GameVariant::Oufg, 1.0).unwrap().play_round(2.0, -1.0).is_err());
    assert!(GameState::new(GameVariant::Oufg, 0.0).is_err());
    assert_eq!(GameState::new(GameVariant::Bfg, 2.5).unwrap().k, 2.5);

    let r = GameState { s: 1.0, a: std::f64::consts::E.powi(2), ..g }.self_normalized();
    assert_relative_eq!(r.sqrtlog.unwrap(), 1.0 / (std::f64::consts::E * 2f64.sqrt()), max_relative = 1e-12);
    let r = GameState { s: 3.0, a: 9.0, ..g }.self_normalized();
    assert_relative_eq!(r.slln.unwrap(), 1.0 / 3.0);
}

#[test]
fn constant_proportion_products() {
    let mut s = ConstantProportion::new(0.5, GameVariant::Oufg).unwrap();
    assert_relative_eq!(play(&mut s, 1.0, &[1.0, -1.0]).k, 0.75);
    let mut s = ConstantProportion::new(0.0, GameVariant::Oufg).unwrap();
    assert_eq!(play(&mut s, 3.0, &[5.0, -1.0, 0.2]).k, 3.0);
    let mut s = ConstantProportion::new(1.0, GameVariant::Oufg).unwrap();
    let g = play(&mut s, 1.0, &[2.0, -1.0, 4.0]);
    assert_eq!(g.k, 0.0);
    assert!(ConstantProportion::new(-0.1, GameVariant::Oufg).is_err());
    assert!(ConstantProportion::new(-0.1, GameVariant::Bfg).is_ok());
}

#[test]
fn uniform_mixture_first_round_and_all_ones() {
    let spec = QuadratureSpec::default();
    let m = MixtureStrategy::<f64>::bayes(&Prior::uniform(), &spec).unwrap();
    assert_relative_eq!(m.current_eps().unwrap(), 0.5, max_relative = 1e-9);
    let m = MixtureStrategy::bayes(&Prior::power(0.5).unwrap(), &spec).unwrap();
    assert_relative_eq!(m.current_eps().unwrap(), 1.0 / 3.0, max_relative = 1e-9);

    let mut m = MixtureStrategy::bayes(&Prior::uniform(), &spec).unwrap();
    play(&mut m, 1.0, &[1.0, 1.0, 1.0]);
    assert_relative_eq!(m.log_capital_integral().exp(), 15.0 / 4.0, max_relative = 1e-9);
}

#[test]
fn mixture_capital_matches_polynomial_integral() {
    let spec = QuadratureSpec::default();
    let paths: [&[f64]; 3] = [&[0.5, -0.2, 2.0, -1.0, 0.3], &[-1.0, 3.0, 0.0, 0.7, -0.5, 1.5, -0.9], &[4.0, -0.8, -0.8, 2.5, 0.1, -0.3, 0.6, 1.0]];
    for xs in paths {
        for (prior, a) in [(Prior::uniform(), 0.0), (Prior::power(0.5).unwrap(), 0.5), (Prior::power(0.8).unwrap(), 0.8)] {
            let mut m = MixtureStrategy::bayes(&prior, &spec).unwrap();
            play(&mut m, 1.0, xs);
            let want = power_mixture(xs, a);
            // mass below exp(-t_max) is not on the node set
            let cut = (-spec.t_max * (1.0 - a)).exp() / (1.0 - a);
            let tol = 1e-9 + 2.0 * cut / want;
            assert_relative_eq!(m.log_capital_integral(), want.ln(), epsilon = tol);
            assert_relative_eq!(m.log_capital_recursive(), want.ln(), epsilon = tol);
        }
    }
}

#[test]
fn discrete_mixture_examples() {
    let m = MixtureStrategy::<f64>::discrete(&DiscreteMixture::canonical_one_sided());
    assert_relative_eq!(m.ln_initial().exp(), 0.5, max_relative = 1e-12);

    let mut single = MixtureStrategy::discrete(&DiscreteMixture::new(vec![(0.5, 1.0)], GameVariant::Oufg).unwrap());
    let mut cp = ConstantProportion::new(0.5, GameVariant::Oufg).unwrap();
    let xs = [1.0, -0.5, 2.0, -1.0 + 1e-3];
    assert_relative_eq!(play(&mut single, 1.0, &xs).k, play(&mut cp, 1.0, &xs).k, max_relative = 1e-14);

    let mut two = MixtureStrategy::discrete(&DiscreteMixture::new(vec![(0.5, 0.5), (0.25, 0.5)], GameVariant::Oufg).unwrap());
    play(&mut two, 1.0, &[1.0]);
    assert_relative_eq!(two.current_eps().unwrap(), 0.53125 / 1.375, max_relative = 1e-12);
}

#[test]
fn kronecker_examples() {
    let mut k = Kronecker::new(BSequence::Power(2.0), 1000, None).unwrap();
    let g = GameState::new(GameVariant::Oufg, k.z()).unwrap();
    let mut st = g;
    for n in 1..=3 {
        let m = k.stake(&st);
        if n == 3 {
            assert_relative_eq!(m, 1.0 / 9.0);
        }
        st = st.play_round(m, -1.0).unwrap().0;
        k.observe(-1.0);
    }
    // Y_n is the tail sum past n
    let tail: f64 = (4..=1000).map(|i| 1.0 / (i as f64).powi(2)).sum::<f64>() + 1.0 / 1000.0;
    assert_relative_eq!(k.y(), tail, max_relative = 1e-12);
    assert_relative_eq!(st.k, k.y(), max_relative = 1e-12);
}

#[test]
fn script_and_iid() {
    let mut p = ScriptedPath::new(vec![0.5, -0.2], GameVariant::Oufg).unwrap();
    let mut c = ConstantProportion::new(0.0, GameVariant::Oufg).unwrap();
    let run = run_game(GameState::new(GameVariant::Oufg, 1.0).unwrap(), &mut c, &mut p, &RunOptions::new(10), |_, _| {}).unwrap();
    assert_eq!(run.final_state.n, 2);
    assert_relative_eq!(run.final_state.s, 0.3, max_relative = 1e-12);
    assert_relative_eq!(run.final_state.a, 0.29, max_relative = 1e-12);
    assert!(ScriptedPath::new(vec![0.5, 2.0], GameVariant::Bfg).is_err());

    let draws = |seed| {
        let mut s = IidSampler::new(IidDist::Rademacher, seed, GameVariant::Oufg).unwrap();
        (0..4).map(|_| s.draw()).collect::<Vec<_>>()
    };
    assert_eq!(draws(42), draws(42));

    let mut s = IidSampler::new(IidDist::ShiftedRademacher(0.1), 7, GameVariant::Oufg).unwrap();
    let mean = (0..1_000_000).map(|_| s.draw()).sum::<f64>() / 1e6;
    assert!((mean - 0.1).abs() < 0.003, "{mean}");
    let mut s = IidSampler::new(IidDist::UniformOn(1.0), 7, GameVariant::Bfg).unwrap();
    let a = (0..1_000_000).map(|_| s.draw().powi(2)).sum::<f64>() / 1e6;
    assert!((a - 1.0 / 3.0).abs() < 0.01, "{a}");
    assert!(IidSampler::new(IidDist::ShiftedRademacher(0.1), 0, GameVariant::Bfg).is_err());
}

#[test]
fn adversary_first_round_factors() {
    let (lo, hi) = PayoffScheme::SplitBet.factors(1.0f64);
    assert_relative_eq!(lo, 0.75);
    assert_relative_eq!(hi, 1.5);

    // zero stakes: the split payoff can always play -1 and L decreases
    let mut adv = ComplyingAdversary::new(BSequence::Power(1.0), PayoffScheme::SplitBet).unwrap().with_rule(DegenerateRule { window: 10, threshold: 11 });
    let mut c = ConstantProportion::new(0.0, GameVariant::Oufg).unwrap();
    let run = run_game(GameState::new(GameVariant::Oufg, 1.0).unwrap(), &mut c, &mut adv, &RunOptions::new(200), |_, _| {}).unwrap();
    assert!(run.trace.iter().all(|r| r.x == -1.0));
    // flat once prod c drops below round-off
    assert!(adv.max_relative_increase() <= 0.0);
}

#[test]
fn inequality_and_bound_examples() {
    assert_eq!(log_inequality_gap(0.0, 3.0).unwrap().gap, 0.0);
    let g = log_inequality_gap(-0.5, 1.0).unwrap();
    assert_relative_eq!(g.gap, 0.5f64.ln() + 0.5 + 0.25, max_relative = 1e-12);
    assert!(g.guaranteed);
    let g = log_inequality_gap(-0.6, 1.0).unwrap();
    assert_relative_eq!(g.gap, 0.4f64.ln() + 0.6 + 0.36, max_relative = 1e-12);
    assert!(!g.guaranteed);

    let u = Prior::uniform();
    let b = thm41_bound(&u, BoundQuery { s: 1.0, a: 100.0 }, 0.4, LeadingConstant::Printed);
    let want = 0.4f64.sqrt() / 6.0 * 0.01 * (0.2f64 * 0.005).exp();
    assert_relative_eq!(b.value().unwrap().value(), want, max_relative = 1e-12);
    assert!(!thm41_bound(&u, BoundQuery { s: 0.0, a: 100.0 }, 0.4, LeadingConstant::Printed).is_applicable());
    assert!(!thm41_bound(&u, BoundQuery { s: 30.0, a: 100.0 }, 0.4, LeadingConstant::Printed).is_applicable());

    for (s, a) in [(10.0, 25.0), (10.0, 40.0), (10.0, 50.0), (11.0, 50.0)] {
        assert!(!thm43_bound(&u, BoundQuery { s, a }).is_applicable(), "{s} {a}");
    }
    let q = BoundQuery { s: 10.5, a: 52.0 };
    let want = 1.0 / (6.0 * std::f64::consts::E) / 52f64.sqrt() * (10.5f64 * 10.5 / 104.0).exp();
    assert_relative_eq!(thm43_bound(&u, q).value().unwrap().value(), want, max_relative = 1e-12);
    assert_relative_eq!(remark41_u(q), (1.0 + 52f64.sqrt() / 10.5) / (1.0 + 52.0 / 110.25) * (10.5 / 52.0), max_relative = 1e-12);
}

#[test]
fn prior_examples() {
    let u = Prior::uniform();
    assert_eq!(u.density(0.5), 1.0);
    assert_eq!(u.density(1e-9), 1.0);
    let p = Prior::power(0.5).unwrap();
    assert_relative_eq!(p.density(0.25), 2.0, max_relative = 1e-12);
    assert!(Prior::power(1.0).is_err());
    assert!(Prior::efkp(4, 0.5, 0.1).is_err());

    let lil = Prior::lil_default();
    let t = std::f64::consts::E.powi(2);
    // eps pi(eps) = 1 / (t (ln t)^2)
    assert_relative_eq!(lil.ln_eps_density(t), -(t * 4.0).ln(), max_relative = 1e-12);

    for prior in [u.clone(), p.clone(), lil, Prior::efkp_default(4, 0.5).unwrap()] {
        assert!(validate_assumption1(&prior, 2000).unwrap().passed(), "{}", prior.name());
    }
    let broken = Prior::custom("eps", std::sync::Arc::new(|t: f64| -t), 1.0, Some(0.5)).unwrap();
    assert!(!validate_assumption1(&broken, 2000).unwrap().lower_bound_ok);

    let s = build_staircase_tilt(&p, 20).unwrap();
    for k in 1..=10 {
        assert_relative_eq!(s.breakpoint_eps(k), 4f64.powi(-(k as i32)), max_relative = 1e-8);
    }
}

#[test]
fn calculus_examples() {
    let u = Prior::uniform();
    assert_relative_eq!(beta(&u, 2.0f64), 4.0);
    let g = gtp_core::apply_g(&u);
    assert_relative_eq!(g.psi(2.0), (4.0 + 4f64.ln()).sqrt(), max_relative = 1e-12);
    let fg = compose_fg(&u, 10.0).unwrap();
    assert_relative_eq!(fg.ratio, ((20.0 + 20f64.ln()) / 20.0).sqrt(), max_relative = 1e-12);

    let three = UpperClassFunction::constant(3.0).unwrap();
    let v = compose_gf(&three, 5.0).unwrap();
    assert_relative_eq!(v.closed, (9.0 - 2.0 * 3f64.ln() + (9.0 - 2.0 * 3f64.ln()).ln()).sqrt(), max_relative = 1e-12);
    assert!(apply_f(&three).is_err());

    let grid = LogGrid::standard();
    let opts = EquivalenceOptions::default();
    assert!(equivalent_priors(&u, &Prior::scaled(u.clone(), 2.0).unwrap(), &grid, &opts).equivalent);
    assert!(!equivalent_priors(&u, &Prior::power(0.5).unwrap(), &grid, &opts).equivalent);
    let c = corollary_psi::<f64>();
    assert!(equivalent_psis(&c, &UpperClassFunction::shifted(c.clone(), 2.0 * 2f64.ln()).unwrap(), &grid, &opts).equivalent);
    let a = UpperClassFunction::sqrt_log_log(2.0).unwrap();
    let b = UpperClassFunction::sqrt_log_log(3.0).unwrap();
    assert!(!equivalent_psis(&a, &b, &grid, &opts).equivalent);
}
