//! Reality strategies: scripted paths, seeded iid generators, target-tracking
//! paths and the complying adversary against `S_n / b_n -> 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{GameState, GameVariant, RealityStrategy};
use crate::scalar::Real;
use crate::skeptic::BSequence;

/// Plays a fixed sequence, then ends the game.
#[derive(Debug, Clone)]
pub struct ScriptedPath<T> {
    xs: Vec<T>,
    pos: usize,
}

impl<T: Real> ScriptedPath<T> {
    pub fn new(xs: Vec<T>, variant: GameVariant) -> Result<Self> {
        for (i, &x) in xs.iter().enumerate() {
            variant.check_move(x).map_err(|e| Error::InvalidParameter(format!("script entry {}: {e}", i + 1)))?;
        }
        Ok(ScriptedPath { xs, pos: 0 })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

impl<T: Real> RealityStrategy<T> for ScriptedPath<T> {
    fn next_move(&mut self, _state: &GameState<T>, _stake: T) -> Result<Option<T>> {
        let x = self.xs.get(self.pos).copied();
        self.pos += 1;
        Ok(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IidDist {
    /// `+-1` with probability 1/2.
    Rademacher,
    /// `-1 + delta` or `1 + delta` with probability 1/2.
    ShiftedRademacher(f64),
    /// Uniform on `[-1, u]`.
    UniformOn(f64),
}

impl IidDist {
    pub fn validate(self, variant: GameVariant) -> Result<()> {
        let (lo, hi) = match self {
            IidDist::Rademacher => (-1.0, 1.0),
            IidDist::ShiftedRademacher(d) => (-1.0 + d, 1.0 + d),
            IidDist::UniformOn(u) => {
                if !(u > -1.0 && u.is_finite()) {
                    return Err(Error::InvalidParameter(format!("uniform support [-1, {u}] is empty")));
                }
                (-1.0, u)
            }
        };
        if !(variant.is_legal_move(lo) && variant.is_legal_move(hi)) {
            return Err(Error::InvalidParameter(format!("support [{lo}, {hi}] leaves the {} move space", variant.name())));
        }
        Ok(())
    }

    pub fn mean(self) -> f64 {
        match self {
            IidDist::Rademacher => 0.0,
            IidDist::ShiftedRademacher(d) => d,
            IidDist::UniformOn(u) => (u - 1.0) / 2.0,
        }
    }
}

/// Seeded iid moves (ChaCha8).
#[derive(Debug, Clone)]
pub struct IidSampler {
    dist: IidDist,
    rng: ChaCha8Rng,
}

impl IidSampler {
    pub fn new(dist: IidDist, seed: u64, variant: GameVariant) -> Result<Self> {
        dist.validate(variant)?;
        Ok(IidSampler { dist, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn dist(&self) -> IidDist {
        self.dist
    }

    pub fn draw(&mut self) -> f64 {
        match self.dist {
            IidDist::Rademacher => {
                if self.rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            IidDist::ShiftedRademacher(d) => {
                if self.rng.gen::<bool>() {
                    1.0 + d
                } else {
                    -1.0 + d
                }
            }
            IidDist::UniformOn(u) => self.rng.gen_range(-1.0..=u),
        }
    }
}

impl<T: Real> RealityStrategy<T> for IidSampler {
    fn next_move(&mut self, _state: &GameState<T>, _stake: T) -> Result<Option<T>> {
        Ok(Some(T::lit(self.draw())))
    }
}

/// Keeps `S_n` near `delta * A_n` with `+-1` moves.
#[derive(Debug, Clone, Copy)]
pub struct DriftTracking<T> {
    pub delta: T,
}

impl<T: Real> RealityStrategy<T> for DriftTracking<T> {
    fn next_move(&mut self, st: &GameState<T>, _stake: T) -> Result<Option<T>> {
        Ok(Some(if st.s < self.delta * (st.a + T::one()) { T::one() } else { -T::one() }))
    }
}

/// Keeps `S_n` near `sqrt(c A_n ln A_n)`.
///
/// With `large_moves` the path plays `sqrt(A / (c ln A))` when below the
/// target, which lets `A_n` grow geometrically (one-sided game only);
/// otherwise it uses `+-1`.
#[derive(Debug, Clone, Copy)]
pub struct SqrtLogTracking<T> {
    pub c: T,
    pub large_moves: bool,
}

impl<T: Real> SqrtLogTracking<T> {
    pub fn target(&self, a: T) -> Option<T> {
        let la = a.ln();
        (la > T::zero()).then(|| (self.c * a * la).sqrt())
    }
}

impl<T: Real> RealityStrategy<T> for SqrtLogTracking<T> {
    fn next_move(&mut self, st: &GameState<T>, _stake: T) -> Result<Option<T>> {
        if self.large_moves && st.variant != GameVariant::Oufg {
            return Err(Error::InvalidParameter("large tracking moves need the one-sided game".into()));
        }
        let e = T::E();
        if st.a < e {
            return Ok(Some(T::one()));
        }
        let g = self.target(st.a).unwrap_or(T::zero());
        if st.s < g {
            if self.large_moves {
                let y = (st.a / (self.c * st.a.ln())).sqrt().max(T::one());
                return Ok(Some(y));
            }
            return Ok(Some(T::one()));
        }
        Ok(Some(-T::one()))
    }
}

/// Payoff factors `c_n` of the adversary's potential; both are fair under
/// `P(x = 2 b_n) = p_n = 1/(1 + 2 b_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayoffScheme {
    /// `c(-1) = 1/(2(1-p))`, `c(2b) = 1/(2p)`.
    SplitBet,
    /// `c(-1) = 1/2 + 1/(2(1-p))`, `c(2b) = 1/2`.
    HedgedBet,
}

impl PayoffScheme {
    /// `(c(-1), c(2b))` for the given `b_n`.
    pub fn factors<T: Real>(self, b: T) -> (T, T) {
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let p = T::one() / (T::one() + two * b);
        match self {
            PayoffScheme::SplitBet => (T::one() / (two * (T::one() - p)), T::one() / (two * p)),
            PayoffScheme::HedgedBet => (half + T::one() / (two * (T::one() - p)), half),
        }
    }
}

/// Switches permanently to `x = -1` once `b_n < n - 1` held for at least
/// `threshold` of the last `window` rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegenerateRule {
    pub window: u64,
    pub threshold: u64,
}

impl Default for DegenerateRule {
    fn default() -> Self {
        DegenerateRule { window: 1000, threshold: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryRound<T> {
    pub n: u64,
    pub x: T,
    pub l: T,
    pub log_cprod: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<T> {
    pub n: u64,
    pub s: T,
    pub b: T,
}

/// Complying adversary: each round picks `x_n` in `{-1, 2 b_n}` so that
/// `L_n = K_n + prod c_k` does not increase.
#[derive(Debug, Clone)]
pub struct ComplyingAdversary<T> {
    b: BSequence<T>,
    scheme: PayoffScheme,
    rule: DegenerateRule,
    tol: T,
    log_cprod: T,
    l0: Option<T>,
    l_prev: T,
    round: u64,
    recent: std::collections::VecDeque<bool>,
    recent_count: u64,
    degenerate_since: Option<u64>,
    sup_k: T,
    sup_cprod: T,
    max_rel_increase: T,
    witness: Option<Witness<T>>,
    big_moves: u64,
    history: Option<Vec<AdversaryRound<T>>>,
}

impl<T: Real> ComplyingAdversary<T> {
    pub fn new(b: BSequence<T>, scheme: PayoffScheme) -> Result<Self> {
        b.validate()?;
        Ok(ComplyingAdversary {
            b,
            scheme,
            rule: DegenerateRule::default(),
            tol: T::lit(1e-9),
            log_cprod: T::zero(),
            l0: None,
            l_prev: T::zero(),
            round: 0,
            recent: Default::default(),
            recent_count: 0,
            degenerate_since: None,
            sup_k: T::zero(),
            sup_cprod: T::one(),
            max_rel_increase: T::neg_infinity(),
            witness: None,
            big_moves: 0,
            history: None,
        })
    }

    pub fn with_rule(mut self, rule: DegenerateRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn record_history(mut self) -> Self {
        self.history = Some(Vec::new());
        self
    }

    pub fn cprod(&self) -> T {
        self.log_cprod.exp()
    }

    pub fn log_cprod(&self) -> T {
        self.log_cprod
    }

    pub fn l0(&self) -> Option<T> {
        self.l0
    }

    /// `L_n` after the last round.
    pub fn potential(&self) -> T {
        self.l_prev
    }

    pub fn sup_capital(&self) -> T {
        self.sup_k
    }

    pub fn sup_cprod(&self) -> T {
        self.sup_cprod
    }

    /// Largest `(L_n - L_{n-1}) / L_{n-1}` seen.
    pub fn max_relative_increase(&self) -> T {
        self.max_rel_increase
    }

    /// First round with `x_n = 2 b_n` and `S_n / b_n >= 1`.
    pub fn witness(&self) -> Option<Witness<T>> {
        self.witness
    }

    pub fn big_moves(&self) -> u64 {
        self.big_moves
    }

    pub fn degenerate_since(&self) -> Option<u64> {
        self.degenerate_since
    }

    pub fn history(&self) -> Option<&[AdversaryRound<T>]> {
        self.history.as_deref()
    }

    fn note_degenerate(&mut self, n: u64, bn: T) {
        let bad = bn < T::lit(n as f64 - 1.0);
        self.recent.push_back(bad);
        self.recent_count += bad as u64;
        if self.recent.len() as u64 > self.rule.window {
            if let Some(old) = self.recent.pop_front() {
                self.recent_count -= old as u64;
            }
        }
        if self.degenerate_since.is_none() && self.rule.threshold > 0 && self.recent_count >= self.rule.threshold {
            self.degenerate_since = Some(n);
        }
    }
}

impl<T: Real> RealityStrategy<T> for ComplyingAdversary<T> {
    fn next_move(&mut self, st: &GameState<T>, stake: T) -> Result<Option<T>> {
        if st.variant != GameVariant::Oufg {
            return Err(Error::InvalidParameter("the complying adversary plays the one-sided game".into()));
        }
        if self.l0.is_none() {
            let l0 = st.k + self.log_cprod.exp();
            self.l0 = Some(l0);
            self.l_prev = l0;
            self.sup_k = st.k;
        }
        let n = st.n + 1;
        let Some(bn) = self.b.get(n) else { return Ok(None) };
        self.round = n;
        if stake < T::zero() {
            // any Reality move above K/|M| bankrupts Skeptic
            return Ok(Some(st.k / stake.abs() + T::one()));
        }
        self.note_degenerate(n, bn);
        let cprod = self.log_cprod.exp();
        let (c_lo, c_hi) = self.scheme.factors(bn);
        let two_b = T::lit(2.0) * bn;
        let l_lo = st.k - stake + cprod * c_lo;
        let l_hi = st.k + two_b * stake + cprod * c_hi;
        let bound = self.l_prev * (T::one() + self.tol);
        let (x, l_new, c) = if self.degenerate_since.is_some() {
            (-T::one(), l_lo, c_lo)
        } else {
            match (l_lo <= bound, l_hi <= bound) {
                (true, true) if l_hi < l_lo => (two_b, l_hi, c_hi),
                (true, _) => (-T::one(), l_lo, c_lo),
                (false, true) => (two_b, l_hi, c_hi),
                (false, false) => {
                    return Err(Error::AdversaryFault(format!(
                        "round {n}: neither move keeps L from increasing (L_prev = {}, L(-1) = {}, L(2b) = {})",
                        self.l_prev, l_lo, l_hi
                    )))
                }
            }
        };
        if self.l_prev > T::zero() {
            self.max_rel_increase = self.max_rel_increase.max((l_new - self.l_prev) / self.l_prev);
        }
        self.log_cprod = self.log_cprod + c.ln();
        self.l_prev = l_new;
        let k_new = st.k + stake * x;
        self.sup_k = self.sup_k.max(k_new);
        self.sup_cprod = self.sup_cprod.max(self.log_cprod.exp());
        if x > T::zero() {
            self.big_moves += 1;
            let s = st.s + x;
            if self.witness.is_none() && s >= bn {
                self.witness = Some(Witness { n, s, b: bn });
            }
        }
        if let Some(h) = self.history.as_mut() {
            h.push(AdversaryRound { n, x, l: l_new, log_cprod: self.log_cprod });
        }
        Ok(Some(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_examples() {
        let mut p = ScriptedPath::new(vec![0.5, -0.2], GameVariant::Oufg).unwrap();
        let g = GameState::new(GameVariant::Oufg, 1.0f64).unwrap();
        let x1 = p.next_move(&g, 0.0).unwrap().unwrap();
        let g = g.play_round(0.0, x1).unwrap().0;
        let x2 = p.next_move(&g, 0.0).unwrap().unwrap();
        let g = g.play_round(0.0, x2).unwrap().0;
        assert!((g.s - 0.3).abs() < 1e-15 && (g.a - 0.29).abs() < 1e-15);
        assert_eq!(p.next_move(&g, 0.0).unwrap(), None);
        assert!(ScriptedPath::new(vec![1.0, -2.0], GameVariant::Oufg).is_err());
        assert!(ScriptedPath::<f64>::new(vec![], GameVariant::Oufg).unwrap().is_empty());
    }

    #[test]
    fn iid_contracts() {
        let mut a = IidSampler::new(IidDist::Rademacher, 42, GameVariant::Bfg).unwrap();
        let mut b = IidSampler::new(IidDist::Rademacher, 42, GameVariant::Bfg).unwrap();
        let xa: Vec<f64> = (0..4).map(|_| a.draw()).collect();
        let xb: Vec<f64> = (0..4).map(|_| b.draw()).collect();
        assert_eq!(xa, xb);
        assert!(IidSampler::new(IidDist::ShiftedRademacher(-0.1), 1, GameVariant::Oufg).is_err());
        assert!(IidSampler::new(IidDist::ShiftedRademacher(0.1), 1, GameVariant::Bfg).is_err());
        assert!(IidSampler::new(IidDist::UniformOn(2.0), 1, GameVariant::Bfg).is_err());
        let mut s = IidSampler::new(IidDist::ShiftedRademacher(0.1), 7, GameVariant::Oufg).unwrap();
        let n = 1_000_000;
        let mean = (0..n).map(|_| s.draw()).sum::<f64>() / n as f64;
        assert!((mean - 0.1).abs() < 0.003);
        let mut u = IidSampler::new(IidDist::UniformOn(1.0), 9, GameVariant::Bfg).unwrap();
        let a2 = (0..n).map(|_| u.draw().powi(2)).sum::<f64>() / n as f64;
        assert!((a2 - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn factors_at_b1() {
        let (lo, hi) = PayoffScheme::SplitBet.factors(1.0f64);
        assert!((lo - 0.75).abs() < 1e-15 && (hi - 1.5).abs() < 1e-15);
        for b in [0.7f64, 1.0, 3.0, 100.0] {
            let p = 1.0 / (1.0 + 2.0 * b);
            for s in [PayoffScheme::SplitBet, PayoffScheme::HedgedBet] {
                let (lo, hi) = s.factors(b);
                assert!(((1.0 - p) * lo + p * hi - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_stake_split_bet_always_minus_one() {
        let mut adv = ComplyingAdversary::new(BSequence::Power(1.0), PayoffScheme::SplitBet).unwrap();
        let mut g = GameState::new(GameVariant::Oufg, 1.0).unwrap();
        for _ in 0..100 {
            let x = adv.next_move(&g, 0.0).unwrap().unwrap();
            assert_eq!(x, -1.0);
            g = g.play_round(0.0, x).unwrap().0;
        }
        assert!(adv.cprod() < 1.0);
    }

    #[test]
    fn negative_stake_bankrupts() {
        let mut adv = ComplyingAdversary::new(BSequence::Power(1.0), PayoffScheme::HedgedBet).unwrap();
        let g = GameState::new(GameVariant::Oufg, 1.0).unwrap();
        let x = adv.next_move(&g, -0.5).unwrap().unwrap();
        assert!(matches!(g.play_round(-0.5, x), Err(Error::CollateralViolation { .. })));
    }

    #[test]
    fn degenerate_switch() {
        let b = BSequence::Table(vec![1.0; 50]);
        let rule = DegenerateRule { window: 10, threshold: 5 };
        let mut adv = ComplyingAdversary::new(b, PayoffScheme::HedgedBet).unwrap().with_rule(rule);
        let mut g = GameState::new(GameVariant::Oufg, 1.0).unwrap();
        for _ in 0..50 {
            let x = adv.next_move(&g, 0.0).unwrap().unwrap();
            g = g.play_round(0.0, x).unwrap().0;
        }
        assert_eq!(adv.degenerate_since(), Some(7));
    }
}
