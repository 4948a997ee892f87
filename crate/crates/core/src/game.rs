//! The forecasting protocol as a pure state machine, plus the round loop and
//! trace export.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameVariant {
    /// One-sided unbounded game: `x >= -1`, proportions in `[0, 1]`.
    Oufg,
    /// Bounded game: `|x| <= 1`, proportions in `[-1, 1]`.
    Bfg,
}

impl GameVariant {
    pub fn name(self) -> &'static str {
        match self {
            GameVariant::Oufg => "OUFG",
            GameVariant::Bfg => "BFG",
        }
    }

    pub fn is_legal_move<T: Real>(self, x: T) -> bool {
        match self {
            GameVariant::Oufg => x.is_finite() && x >= -T::one(),
            GameVariant::Bfg => x.is_finite() && x.abs() <= T::one(),
        }
    }

    pub fn is_legal_proportion<T: Real>(self, eps: T) -> bool {
        let lo = match self {
            GameVariant::Oufg => T::zero(),
            GameVariant::Bfg => -T::one(),
        };
        eps >= lo && eps <= T::one()
    }

    pub fn check_move<T: Real>(self, x: T) -> Result<()> {
        if self.is_legal_move(x) {
            Ok(())
        } else {
            Err(Error::IllegalMove { variant: self.name(), x: x.as_f64() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameState<T> {
    pub variant: GameVariant,
    pub n: u64,
    pub s: T,
    pub a: T,
    pub k: T,
    pub k0: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundRecord<T> {
    pub n: u64,
    #[serde(rename = "M")]
    pub stake: T,
    /// `M / K_{n-1}`; absent when the capital before the round was zero.
    pub eps: Option<T>,
    pub x: T,
    #[serde(rename = "S")]
    pub s: T,
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "K")]
    pub k_after: T,
}

/// `S/A`, `S/sqrt(A ln A)`, `S/sqrt(2 A ln ln A)`; `None` outside each domain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SelfNormalized<T> {
    pub slln: Option<T>,
    pub sqrtlog: Option<T>,
    pub lil: Option<T>,
}

impl<T: Real> GameState<T> {
    pub fn new(variant: GameVariant, initial_capital: T) -> Result<Self> {
        if !(initial_capital > T::zero() && initial_capital.is_finite()) {
            return Err(Error::InvalidParameter(format!("initial capital must be positive, got {initial_capital}")));
        }
        Ok(GameState { variant, n: 0, s: T::zero(), a: T::zero(), k: initial_capital, k0: initial_capital })
    }

    /// One round. A stake that makes the capital negative for the announced
    /// move ends the game with a collateral violation.
    pub fn play_round(&self, stake: T, x: T) -> Result<(GameState<T>, RoundRecord<T>)> {
        self.variant.check_move(x)?;
        if !stake.is_finite() {
            return Err(Error::InvalidParameter(format!("stake must be finite, got {stake}")));
        }
        let k_new = self.k + stake * x;
        if k_new < T::zero() {
            return Err(Error::CollateralViolation { round: self.n + 1, capital: self.k.as_f64(), stake: stake.as_f64(), x: x.as_f64() });
        }
        let next = GameState { n: self.n + 1, s: self.s + x, a: self.a + x * x, k: k_new, ..*self };
        let eps = if self.k > T::zero() { Some(stake / self.k) } else { None };
        let rec = RoundRecord { n: next.n, stake, eps, x, s: next.s, a: next.a, k_after: k_new };
        Ok((next, rec))
    }

    pub fn self_normalized(&self) -> SelfNormalized<T> {
        if !(self.a > T::zero()) {
            return SelfNormalized::default();
        }
        let la = self.a.ln();
        let sqrtlog = if la > T::zero() { Some(self.s / (self.a * la).sqrt()) } else { None };
        let lil = if la > T::one() { Some(self.s / (T::lit(2.0) * self.a * la.ln()).sqrt()) } else { None };
        SelfNormalized { slln: Some(self.s / self.a), sqrtlog, lil }
    }

    /// Replays a trace from this state, in the order the rounds were played.
    pub fn replay<'a, I: IntoIterator<Item = &'a RoundRecord<T>>>(&self, trace: I) -> Result<GameState<T>> {
        let mut st = *self;
        for r in trace {
            st = st.play_round(r.stake, r.x)?.0;
        }
        Ok(st)
    }
}

/// Skeptic: announces a stake, then sees Reality's move.
pub trait Strategy<T: Real> {
    fn stake(&mut self, state: &GameState<T>) -> T;
    fn observe(&mut self, x: T);
}

/// Reality: sees the state and the stake, announces a move. `Ok(None)` ends
/// the game (exhausted script).
pub trait RealityStrategy<T: Real> {
    fn next_move(&mut self, state: &GameState<T>, stake: T) -> Result<Option<T>>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Completed,
    Exhausted,
    CollateralViolation { round: u64, capital: f64, stake: f64, x: f64 },
}

#[derive(Debug, Clone)]
pub struct GameRun<T> {
    pub initial: GameState<T>,
    pub final_state: GameState<T>,
    pub trace: Vec<RoundRecord<T>>,
    pub verdict: Verdict,
    pub peak_capital: T,
    pub min_capital: T,
    /// Whether `K` ever went above `rich_factor * K0`.
    pub became_rich: bool,
}

pub struct RunOptions<T> {
    pub horizon: u64,
    pub record_trace: bool,
    pub rich_factor: T,
}

impl<T: Real> RunOptions<T> {
    pub fn new(horizon: u64) -> Self {
        RunOptions { horizon, record_trace: true, rich_factor: T::lit(1e9) }
    }
}

/// Plays up to `horizon` rounds. `on_round` sees every state after a round.
pub fn run_game<T: Real>(
    initial: GameState<T>,
    skeptic: &mut dyn Strategy<T>,
    reality: &mut dyn RealityStrategy<T>,
    opts: &RunOptions<T>,
    mut on_round: impl FnMut(&GameState<T>, &RoundRecord<T>),
) -> Result<GameRun<T>> {
    let mut st = initial;
    let mut trace = Vec::new();
    let mut peak = st.k;
    let mut low = st.k;
    let mut verdict = Verdict::Completed;
    for _ in 0..opts.horizon {
        let m = skeptic.stake(&st);
        let Some(x) = reality.next_move(&st, m)? else {
            verdict = Verdict::Exhausted;
            break;
        };
        match st.play_round(m, x) {
            Ok((next, rec)) => {
                skeptic.observe(x);
                st = next;
                peak = peak.max(st.k);
                low = low.min(st.k);
                on_round(&st, &rec);
                if opts.record_trace {
                    trace.push(rec);
                }
            }
            Err(Error::CollateralViolation { round, capital, stake, x }) => {
                verdict = Verdict::CollateralViolation { round, capital, stake, x };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(GameRun { initial, final_state: st, trace, verdict, peak_capital: peak, min_capital: low, became_rich: peak > opts.rich_factor * initial.k0 })
}

pub const TRACE_HEADER: &str = "n,M,eps,x,S,A,K";

fn fmt_num<T: Real>(v: T) -> String {
    // Rust's shortest round-trip formatting keeps full precision.
    format!("{}", v.as_f64())
}

pub fn write_trace_csv<T: Real, W: Write>(out: &mut W, trace: &[RoundRecord<T>]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in trace {
        let eps = r.eps.map(fmt_num).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{},{}", r.n, fmt_num(r.stake), eps, fmt_num(r.x), fmt_num(r.s), fmt_num(r.a), fmt_num(r.k_after))?;
    }
    Ok(())
}

pub fn write_trace_jsonl<T: Real + Serialize, W: Write>(out: &mut W, trace: &[RoundRecord<T>]) -> std::io::Result<()> {
    for r in trace {
        serde_json::to_writer(&mut *out, r)?;
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_examples() {
        let g = GameState::new(GameVariant::Oufg, 1.0).unwrap();
        let (g, r) = g.play_round(0.5, 1.0).unwrap();
        assert_eq!((g.s, g.a, g.k), (1.0, 1.0, 1.5));
        assert_eq!(r.eps, Some(0.5));
        let (g, _) = g.play_round(0.75, -1.0).unwrap();
        assert_eq!((g.s, g.a, g.k, g.n), (0.0, 2.0, 0.75, 2));
    }

    #[test]
    fn bad_starts_and_moves() {
        assert!(GameState::new(GameVariant::Oufg, 0.0).is_err());
        let b = GameState::new(GameVariant::Bfg, 2.5).unwrap();
        assert_eq!((b.n, b.s, b.a, b.k), (0, 0.0, 0.0, 2.5));
        assert!(matches!(b.play_round(0.0, 1.5), Err(Error::IllegalMove { .. })));
        let o = GameState::new(GameVariant::Oufg, 1.0).unwrap();
        assert!(o.play_round(0.0, 1.5).is_ok());
        assert!(matches!(o.play_round(0.0, -1.01), Err(Error::IllegalMove { .. })));
        assert!(matches!(o.play_round(2.0, -1.0), Err(Error::CollateralViolation { round: 1, .. })));
    }

    #[test]
    fn ratios() {
        let e2 = std::f64::consts::E.powi(2);
        let st = GameState { variant: GameVariant::Oufg, n: 10, s: 1.0, a: e2, k: 1.0, k0: 1.0 };
        let r = st.self_normalized();
        assert!((r.sqrtlog.unwrap() - 1.0 / (std::f64::consts::E * 2f64.sqrt())).abs() < 1e-15);
        let st = GameState { s: 0.0, a: 100.0, ..st };
        let r = st.self_normalized();
        assert_eq!((r.slln, r.sqrtlog, r.lil), (Some(0.0), Some(0.0), Some(0.0)));
        let st = GameState { s: 3.0, a: 9.0, ..st };
        assert!((st.self_normalized().slln.unwrap() - 1.0 / 3.0).abs() < 1e-16);
        let st = GameState { s: 0.0, a: 0.0, ..st };
        assert_eq!(st.self_normalized(), SelfNormalized::default());
        // ln A = 0.5: ln ln A < 0, so the lil ratio is undefined
        let st = GameState { s: 1.0, a: 0.5f64.exp(), ..st };
        let r = st.self_normalized();
        assert!(r.sqrtlog.is_some() && r.lil.is_none());
    }

    #[test]
    fn csv_trace_shape() {
        let g = GameState::new(GameVariant::Oufg, 1.0).unwrap();
        let (g1, r1) = g.play_round(0.5, 1.0).unwrap();
        let (_, r2) = g1.play_round(0.0, 0.25).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[r1, r2]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "n,M,eps,x,S,A,K\n1,0.5,0.5,1,1,1,1.5\n2,0,0,0.25,1.25,1.0625,1.5\n");
        let mut buf = Vec::new();
        write_trace_jsonl(&mut buf, &[r1]).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["K"], 1.5);
    }
}
