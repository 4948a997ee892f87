//! Skeptic strategies: constant proportion, mixtures (continuous Bayesian and
//! discrete) and the Kronecker strategy `M_n = 1/b_n`.

use crate::error::{Error, Result};
use crate::game::{GameState, GameVariant, Strategy};
use crate::logmath::{ln_growth, log_sum_exp};
use crate::priors::Prior;
use crate::quadrature::QuadratureSpec;
use crate::scalar::Real;

/// Stakes `eps * K_{n-1}` every round.
#[derive(Debug, Clone, Copy)]
pub struct ConstantProportion<T> {
    pub eps: T,
}

impl<T: Real> ConstantProportion<T> {
    pub fn new(eps: T, variant: GameVariant) -> Result<Self> {
        if !variant.is_legal_proportion(eps) {
            return Err(Error::InvalidParameter(format!("proportion {eps} is outside the {} range", variant.name())));
        }
        Ok(ConstantProportion { eps })
    }
}

impl<T: Real> Strategy<T> for ConstantProportion<T> {
    fn stake(&mut self, state: &GameState<T>) -> T {
        self.eps * state.k
    }

    fn observe(&mut self, _x: T) {}
}

/// Per-node running log products `L_j = sum_i ln(1 + eps_j x_i)`.
///
/// After each update the state caches `exp(L_j - max L)` so that any number
/// of priors can share one set of exponentials per round.
#[derive(Debug, Clone)]
pub struct MixtureState<T> {
    eps: Vec<T>,
    logprod: Vec<T>,
    round: u64,
    max_l: T,
    shifted: Vec<T>,
}

impl<T: Real> MixtureState<T> {
    pub fn new(eps: Vec<T>) -> Self {
        let n = eps.len();
        MixtureState { eps, logprod: vec![T::zero(); n], round: 0, max_l: T::zero(), shifted: vec![T::one(); n] }
    }

    pub fn from_quadrature(spec: &QuadratureSpec) -> Result<(Self, Vec<T>)> {
        spec.validate()?;
        let nodes = spec.nodes::<T>();
        if nodes.len() < 64 {
            return Err(Error::InvalidParameter(format!("quadrature has {} nodes; at least 64 are required", nodes.len())));
        }
        let ts = nodes.iter().map(|n| n.t).collect();
        Ok((Self::new(nodes.iter().map(|n| n.eps).collect()), ts))
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn eps(&self) -> &[T] {
        &self.eps
    }

    pub fn logprod(&self) -> &[T] {
        &self.logprod
    }

    pub fn update(&mut self, x: T) {
        let mut m = T::neg_infinity();
        for (l, &e) in self.logprod.iter_mut().zip(&self.eps) {
            *l = *l + ln_growth(e, x);
            m = m.max(*l);
        }
        self.round += 1;
        self.max_l = m;
        if m == T::neg_infinity() {
            self.shifted.iter_mut().for_each(|s| *s = T::zero());
        } else {
            for (s, &l) in self.shifted.iter_mut().zip(&self.logprod) {
                *s = (l - m).exp();
            }
        }
    }

    pub fn is_annihilated(&self) -> bool {
        self.max_l == T::neg_infinity()
    }

    /// `ln sum_j W_j prod_i (1 + eps_j x_i)`.
    pub fn log_capital(&self, w: &PriorWeights<T>) -> T {
        if self.is_annihilated() {
            return T::neg_infinity();
        }
        let s: T = w.lin.iter().zip(&self.shifted).map(|(a, b)| *a * *b).sum();
        if s > T::lit(1e-280).max(T::min_positive_value() * T::lit(1e20)) {
            self.max_l + w.m + s.ln()
        } else {
            log_sum_exp(w.ln_w.iter().zip(&self.logprod).map(|(a, b)| *a + *b).collect::<Vec<_>>())
        }
    }

    /// Posterior mean of `eps` under the weights; `None` once every node is
    /// annihilated.
    pub fn posterior_mean(&self, w: &PriorWeights<T>) -> Option<T> {
        if self.is_annihilated() {
            return None;
        }
        let mut num = T::zero();
        let mut den = T::zero();
        for ((a, b), e) in w.lin.iter().zip(&self.shifted).zip(&self.eps) {
            let v = *a * *b;
            num = num + v * *e;
            den = den + v;
        }
        if den > T::lit(1e-280).max(T::min_positive_value() * T::lit(1e20)) {
            return Some(num / den);
        }
        let lv: Vec<T> = w.ln_w.iter().zip(&self.logprod).map(|(a, b)| *a + *b).collect();
        let lden = log_sum_exp(lv.iter().copied());
        if lden == T::neg_infinity() {
            return None;
        }
        // signed atoms: split the numerator by sign
        let pos = log_sum_exp(lv.iter().zip(&self.eps).filter(|(_, e)| **e > T::zero()).map(|(l, e)| *l + e.ln()).collect::<Vec<_>>());
        let neg = log_sum_exp(lv.iter().zip(&self.eps).filter(|(_, e)| **e < T::zero()).map(|(l, e)| *l + (-*e).ln()).collect::<Vec<_>>());
        Some((pos - lden).exp() - (neg - lden).exp())
    }
}

/// Log weights `ln W_j` of a mixture over the nodes of a `MixtureState`,
/// with their linear form relative to the largest.
#[derive(Debug, Clone)]
pub struct PriorWeights<T> {
    ln_w: Vec<T>,
    m: T,
    lin: Vec<T>,
}

impl<T: Real> PriorWeights<T> {
    pub fn from_ln(ln_w: Vec<T>) -> Self {
        let m = ln_w.iter().copied().fold(T::neg_infinity(), T::max);
        let lin = ln_w.iter().map(|&v| if m.is_finite() { (v - m).exp() } else { T::zero() }).collect();
        PriorWeights { ln_w, m, lin }
    }

    /// `pi(eps_j) w_j deps` at the quadrature nodes, relative to the prior's
    /// scale constant.
    pub fn for_prior(prior: &Prior<T>, spec: &QuadratureSpec) -> Self {
        let nodes = spec.nodes::<T>();
        // pi deps = (eps pi) dt
        Self::from_ln(nodes.iter().map(|n| prior.ln_eps_density_rel(n.t) + n.ln_weight + n.t).collect())
    }

    pub fn ln_weights(&self) -> &[T] {
        &self.ln_w
    }

    /// `ln sum W_j`, the capital before any round.
    pub fn ln_total(&self) -> T {
        log_sum_exp(self.ln_w.iter().copied())
    }
}

/// Mixture of constant-proportion strategies over a fixed node set; the
/// Bayesian strategy and discrete mixtures are both instances.
#[derive(Debug, Clone)]
pub struct MixtureStrategy<T> {
    state: MixtureState<T>,
    weights: PriorWeights<T>,
    coarse: Option<(MixtureState<T>, PriorWeights<T>)>,
    ln_k0: T,
    ln_growth_sum: T,
    current: Option<T>,
    ln_scale: T,
}

impl<T: Real> MixtureStrategy<T> {
    fn assemble(state: MixtureState<T>, weights: PriorWeights<T>, ln_scale: T) -> Self {
        let ln_k0 = weights.ln_total();
        let current = state.posterior_mean(&weights);
        MixtureStrategy { state, weights, coarse: None, ln_k0, ln_growth_sum: T::zero(), current, ln_scale }
    }

    /// Bayesian mixture over the prior on the quadrature nodes.
    pub fn bayes(prior: &Prior<T>, spec: &QuadratureSpec) -> Result<Self> {
        let (state, _) = MixtureState::from_quadrature(spec)?;
        let w = PriorWeights::for_prior(prior, spec);
        Ok(Self::assemble(state, w, prior.ln_scale()))
    }

    /// As `bayes`, also carrying a half-panel node set for the error estimate.
    pub fn bayes_with_error_estimate(prior: &Prior<T>, spec: &QuadratureSpec) -> Result<Self> {
        let mut s = Self::bayes(prior, spec)?;
        let c = spec.coarser();
        let (cs, _) = MixtureState::from_quadrature(&c).or_else(|_| {
            let nodes = c.nodes::<T>();
            Ok::<_, Error>((MixtureState::new(nodes.iter().map(|n| n.eps).collect()), vec![]))
        })?;
        s.coarse = Some((cs, PriorWeights::for_prior(prior, &c)));
        Ok(s)
    }

    pub fn discrete(mix: &DiscreteMixture<T>) -> Self {
        let state = MixtureState::new(mix.atoms.iter().map(|a| a.0).collect());
        let w = PriorWeights::from_ln(mix.atoms.iter().map(|a| a.1.ln()).collect());
        Self::assemble(state, w, T::zero())
    }

    pub fn state(&self) -> &MixtureState<T> {
        &self.state
    }

    pub fn weights(&self) -> &PriorWeights<T> {
        &self.weights
    }

    /// Betting proportion for the coming round.
    pub fn current_eps(&self) -> Option<T> {
        self.current
    }

    pub fn is_ruined(&self) -> bool {
        self.current.is_none()
    }

    /// `ln K^pi_n` from the node sum (without the prior's scale constant).
    pub fn log_capital_integral(&self) -> T {
        self.state.log_capital(&self.weights)
    }

    /// `ln K^pi_0 + sum ln(1 + eps_i x_i)`.
    pub fn log_capital_recursive(&self) -> T {
        self.ln_k0 + self.ln_growth_sum
    }

    pub fn ln_initial(&self) -> T {
        self.ln_k0
    }

    pub fn ln_scale(&self) -> T {
        self.ln_scale
    }

    /// `|ln K(fine) - ln K(coarse)|` plus a round-off floor; `None` without a
    /// coarse node set.
    pub fn quadrature_error_estimate(&self) -> Option<T> {
        let (cs, cw) = self.coarse.as_ref()?;
        let fine = self.log_capital_integral();
        let coarse = cs.log_capital(cw);
        let floor = T::lit(1e-12) * (T::one() + fine.abs()) * T::from_usize_lossy(self.state.round() as usize + 1).sqrt();
        Some((fine - coarse).abs() + floor)
    }
}

impl<T: Real> Strategy<T> for MixtureStrategy<T> {
    fn stake(&mut self, state: &GameState<T>) -> T {
        self.current.map(|e| e * state.k).unwrap_or(T::zero())
    }

    fn observe(&mut self, x: T) {
        let e = self.current.unwrap_or(T::zero());
        self.ln_growth_sum = self.ln_growth_sum + ln_growth(e, x);
        self.state.update(x);
        if let Some((cs, _)) = self.coarse.as_mut() {
            cs.update(x);
        }
        self.current = self.state.posterior_mean(&self.weights);
    }
}

/// Several priors over one node set, sharing the per-node log products.
/// Each prior keeps its own posterior mean and recursive capital; the path
/// does not depend on the stakes, so this serves verification runs.
#[derive(Debug, Clone)]
pub struct MixtureBank<T> {
    state: MixtureState<T>,
    weights: Vec<PriorWeights<T>>,
    ln_k0: Vec<T>,
    ln_growth_sum: Vec<T>,
    current: Vec<Option<T>>,
}

impl<T: Real> MixtureBank<T> {
    pub fn new(priors: &[&Prior<T>], spec: &QuadratureSpec) -> Result<Self> {
        let (state, _) = MixtureState::from_quadrature(spec)?;
        let weights: Vec<PriorWeights<T>> = priors.iter().map(|p| PriorWeights::for_prior(p, spec)).collect();
        let ln_k0 = weights.iter().map(|w| w.ln_total()).collect();
        let current = weights.iter().map(|w| state.posterior_mean(w)).collect();
        Ok(MixtureBank { ln_growth_sum: vec![T::zero(); weights.len()], state, weights, ln_k0, current })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn round(&self) -> u64 {
        self.state.round()
    }

    pub fn update(&mut self, x: T) {
        for (g, e) in self.ln_growth_sum.iter_mut().zip(&self.current) {
            *g = *g + ln_growth(e.unwrap_or(T::zero()), x);
        }
        self.state.update(x);
        for (c, w) in self.current.iter_mut().zip(&self.weights) {
            *c = self.state.posterior_mean(w);
        }
    }

    pub fn current_eps(&self, i: usize) -> Option<T> {
        self.current[i]
    }

    pub fn log_capital_integral(&self, i: usize) -> T {
        self.state.log_capital(&self.weights[i])
    }

    pub fn log_capital_recursive(&self, i: usize) -> T {
        self.ln_k0[i] + self.ln_growth_sum[i]
    }

    pub fn ln_initial(&self, i: usize) -> T {
        self.ln_k0[i]
    }
}

/// Atoms `(eps_j, weight_j)`.
#[derive(Debug, Clone)]
pub struct DiscreteMixture<T> {
    pub atoms: Vec<(T, T)>,
}

impl<T: Real> DiscreteMixture<T> {
    pub fn new(atoms: Vec<(T, T)>, variant: GameVariant) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one atom".into()));
        }
        for &(e, w) in &atoms {
            if !variant.is_legal_proportion(e) {
                return Err(Error::InvalidParameter(format!("atom {e} is outside the {} proportion range", variant.name())));
            }
            if !(w > T::zero() && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("atom weight {w} must be positive")));
            }
        }
        Ok(DiscreteMixture { atoms })
    }

    /// `{(2^-j, 2^-j-1)}`, truncated at `j = 60`.
    pub fn canonical_one_sided() -> Self {
        let atoms = (1..=60).map(|j| (T::lit(2f64.powi(-j)), T::lit(2f64.powi(-j - 1)))).collect();
        DiscreteMixture { atoms }
    }

    /// Atoms at `+-2^-j`, each with weight `2^-j-1`; bounded game only.
    pub fn canonical_two_sided() -> Self {
        let mut atoms = Vec::with_capacity(120);
        for j in 1..=60 {
            let w = T::lit(2f64.powi(-j - 1));
            atoms.push((T::lit(2f64.powi(-j)), w));
            atoms.push((-T::lit(2f64.powi(-j)), w));
        }
        DiscreteMixture { atoms }
    }

    pub fn total_weight(&self) -> T {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// `b_n` for the Kronecker strategy and the adversary.
#[derive(Debug, Clone, PartialEq)]
pub enum BSequence<T> {
    /// `n^p`.
    Power(T),
    /// `n ln(n + 1)^2`; the `+1` keeps `b_1` positive.
    NLogSquared,
    /// Explicit values `b_1, b_2, ...`.
    Table(Vec<T>),
}

impl<T: Real> BSequence<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            BSequence::Power(p) if !(*p > T::zero()) => Err(Error::InvalidParameter(format!("b_n = n^{p} must increase"))),
            BSequence::Table(v) => {
                if v.is_empty() || v.iter().any(|b| !(*b > T::zero() && b.is_finite())) {
                    return Err(Error::InvalidParameter("b table must contain positive finite values".into()));
                }
                if v.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::InvalidParameter("b table must be non-decreasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `b_n`, `n >= 1`; `None` past the end of a table.
    pub fn get(&self, n: u64) -> Option<T> {
        let x = T::lit(n as f64);
        match self {
            BSequence::Power(p) => Some(x.powf(*p)),
            BSequence::NLogSquared => {
                let l = (x + T::one()).ln();
                Some(x * l * l)
            }
            BSequence::Table(v) => v.get((n as usize).checked_sub(1)?).copied(),
        }
    }

    /// Upper bound on `sum_{n > N} 1/b_n` when the series is known to converge.
    pub fn tail_bound(&self, horizon: u64) -> Option<T> {
        let x = T::lit(horizon.max(1) as f64);
        match self {
            BSequence::Power(p) if *p > T::one() => Some(x.powf(T::one() - *p) / (*p - T::one())),
            // int_N^inf dx / (x ln(x+1)^2) <= 1 / ln N for N >= 2
            BSequence::NLogSquared if horizon >= 2 => Some(T::one() / x.ln()),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            BSequence::Power(p) => format!("n^{p}"),
            BSequence::NLogSquared => "n*log(n+1)^2".into(),
            BSequence::Table(v) => format!("table({} values)", v.len()),
        }
    }
}

/// Stakes `M_n = 1/b_n`, tracks `Y_n = Z + sum_{i<=n} x_i / b_i`.
#[derive(Debug, Clone)]
pub struct Kronecker<T> {
    b: BSequence<T>,
    z: T,
    y: T,
    n: u64,
    min_y: T,
}

impl<T: Real> Kronecker<T> {
    /// `Z` defaults to the partial sum of `1/b_n` up to the horizon plus a
    /// tail bound when one is known.
    pub fn new(b: BSequence<T>, horizon: u64, z: Option<T>) -> Result<Self> {
        b.validate()?;
        let z = match z {
            Some(z) => z,
            None => {
                let mut s = T::zero();
                for n in 1..=horizon {
                    let bn = b.get(n).ok_or_else(|| Error::InvalidParameter(format!("b table ends before round {n}")))?;
                    s = s + T::one() / bn;
                }
                s + b.tail_bound(horizon).unwrap_or(T::zero())
            }
        };
        Ok(Kronecker { b, z, y: z, n: 0, min_y: z })
    }

    pub fn z(&self) -> T {
        self.z
    }

    pub fn y(&self) -> T {
        self.y
    }

    pub fn min_y(&self) -> T {
        self.min_y
    }

    pub fn b(&self) -> &BSequence<T> {
        &self.b
    }
}

impl<T: Real> Strategy<T> for Kronecker<T> {
    fn stake(&mut self, _state: &GameState<T>) -> T {
        self.b.get(self.n + 1).map(|b| T::one() / b).unwrap_or(T::zero())
    }

    fn observe(&mut self, x: T) {
        self.n += 1;
        if let Some(b) = self.b.get(self.n) {
            self.y = self.y + x / b;
            self.min_y = self.min_y.min(self.y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameState;

    fn play(strat: &mut dyn Strategy<f64>, xs: &[f64]) -> GameState<f64> {
        let mut g = GameState::new(GameVariant::Oufg, 1.0).unwrap();
        for &x in xs {
            let m = strat.stake(&g);
            g = g.play_round(m, x).unwrap().0;
            strat.observe(x);
        }
        g
    }

    #[test]
    fn constant_examples() {
        let mut s = ConstantProportion::new(0.5, GameVariant::Oufg).unwrap();
        assert_eq!(play(&mut s, &[1.0, -1.0]).k, 0.75);
        let mut s = ConstantProportion::new(0.0, GameVariant::Oufg).unwrap();
        assert_eq!(play(&mut s, &[3.0, -1.0, 0.2]).k, 1.0);
        let mut s = ConstantProportion::new(1.0, GameVariant::Oufg).unwrap();
        assert_eq!(play(&mut s, &[0.5, -1.0, 2.0]).k, 0.0);
        assert!(ConstantProportion::new(-0.1, GameVariant::Oufg).is_err());
        assert!(ConstantProportion::new(-0.1, GameVariant::Bfg).is_ok());
    }

    #[test]
    fn bayes_first_round() {
        let q = QuadratureSpec::default();
        let s = MixtureStrategy::<f64>::bayes(&Prior::uniform(), &q).unwrap();
        assert!((s.current_eps().unwrap() - 0.5).abs() < 1e-12);
        let s = MixtureStrategy::<f64>::bayes(&Prior::power(0.5).unwrap(), &q).unwrap();
        // truncation at t = 60 shifts the mean by about e^-30
        assert!((s.current_eps().unwrap() - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn bayes_all_ones() {
        let q = QuadratureSpec::default();
        let mut s = MixtureStrategy::bayes(&Prior::uniform(), &q).unwrap();
        play(&mut s, &[1.0, 1.0, 1.0]);
        assert!((s.log_capital_integral().exp() - 15.0 / 4.0).abs() < 1e-11);
        assert!((s.log_capital_recursive() - s.log_capital_integral()).abs() < 1e-12);
    }

    #[test]
    fn bayes_ruin() {
        let q = QuadratureSpec { t_max: 1e-3, panels: 4, ..QuadratureSpec::default() };
        // every node has eps close to 1 but below it, so -1 does not annihilate
        let mut s = MixtureStrategy::bayes(&Prior::uniform(), &q).unwrap();
        play(&mut s, &[-1.0]);
        assert!(!s.is_ruined());
        let mut s = MixtureStrategy::discrete(&DiscreteMixture::new(vec![(1.0, 1.0)], GameVariant::Oufg).unwrap());
        play(&mut s, &[-1.0]);
        assert!(s.is_ruined());
        assert_eq!(s.log_capital_integral(), f64::NEG_INFINITY);
    }

    #[test]
    fn bank_matches_single_strategies() {
        let q = QuadratureSpec::default();
        let (u, p) = (Prior::uniform(), Prior::power(0.5).unwrap());
        let mut bank = MixtureBank::new(&[&u, &p], &q).unwrap();
        let mut a = MixtureStrategy::bayes(&u, &q).unwrap();
        let mut b = MixtureStrategy::bayes(&p, &q).unwrap();
        let xs = [1.0, -0.5, 2.0, -1.0, 0.3, 5.0];
        play(&mut a, &xs);
        play(&mut b, &xs);
        xs.iter().for_each(|&x| bank.update(x));
        assert_eq!(bank.log_capital_integral(0), a.log_capital_integral());
        assert_eq!(bank.log_capital_recursive(1), b.log_capital_recursive());
        assert_eq!(bank.current_eps(1), b.current_eps());
    }

    #[test]
    fn discrete_examples() {
        let m = DiscreteMixture::<f64>::canonical_one_sided();
        assert!((m.total_weight() - 0.5).abs() < 1e-15);
        let s = MixtureStrategy::discrete(&m);
        assert!((s.log_capital_integral().exp() - 0.5).abs() < 1e-15);
        let mut s = MixtureStrategy::discrete(&DiscreteMixture::new(vec![(0.5, 1.0)], GameVariant::Oufg).unwrap());
        let mut c = ConstantProportion::new(0.5, GameVariant::Oufg).unwrap();
        let xs = [1.0, -0.5, 2.0, -1.0, 0.3];
        assert_eq!(play(&mut s, &xs).k, play(&mut c, &xs).k);
        let mut s = MixtureStrategy::discrete(&DiscreteMixture::new(vec![(0.5, 0.5), (0.25, 0.5)], GameVariant::Oufg).unwrap());
        play(&mut s, &[1.0]);
        assert!((s.current_eps().unwrap() - 0.386_363_636_363_636_4).abs() < 1e-12);
        assert!(DiscreteMixture::new(vec![(-0.5, 1.0)], GameVariant::Oufg).is_err());
        let two = DiscreteMixture::<f64>::canonical_two_sided();
        assert!(DiscreteMixture::new(two.atoms.clone(), GameVariant::Bfg).is_ok());
        let s = MixtureStrategy::discrete(&two);
        assert!(s.current_eps().unwrap().abs() < 1e-17);
    }

    #[test]
    fn kronecker_examples() {
        let mut k = Kronecker::new(BSequence::Power(2.0f64), 1000, None).unwrap();
        let mut g = GameState::new(GameVariant::Oufg, k.z()).unwrap();
        for n in 1..=1000 {
            let m = k.stake(&g);
            if n == 3 {
                assert!((m - 1.0 / 9.0).abs() < 1e-16);
            }
            g = g.play_round(m, -1.0).unwrap().0;
            k.observe(-1.0);
            assert!(k.y() >= 0.0);
        }
        assert!(Kronecker::new(BSequence::Table(vec![1.0, 0.5]), 2, None).is_err());
        assert!(Kronecker::new(BSequence::Table(vec![1.0, 2.0]), 3, None).is_err());
        assert_eq!(BSequence::<f64>::NLogSquared.get(1).unwrap(), 2f64.ln().powi(2));
    }
}
