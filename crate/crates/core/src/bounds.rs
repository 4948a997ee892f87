//! Closed-form lower bounds on mixture capital, each behind its
//! preconditions, plus the log inequality and the EFKP normalizer.
//!
//! Values are kept in log form as `ln_rel + ln_scale`, where `ln_scale` is the
//! prior's split-off constant; compare `ln_rel` against the mixture's
//! relative log capital.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logmath::log_chain;
use crate::priors::{Prior, StaircaseTilt};
use crate::scalar::Real;
use crate::upper_class::efkp_terms;

/// `ln(1 + t) - t + (1 + C) t^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGap<T> {
    pub gap: T,
    /// Whether `t >= -C/(1+C)`, where the gap is guaranteed non-negative.
    pub guaranteed: bool,
}

pub fn log_inequality_gap<T: Real>(t: T, c: T) -> Result<LogGap<T>> {
    if !(t > -T::one()) {
        return Err(Error::InvalidParameter(format!("log inequality needs t > -1, got {t}")));
    }
    if !(c > T::zero()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    let gap = t.ln_1p() - t + (T::one() + c) / T::lit(2.0) * t * t;
    Ok(LogGap { gap, guaranteed: t >= -c / (T::one() + c) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue<T> {
    pub ln_rel: T,
    pub ln_scale: T,
}

impl<T: Real> BoundValue<T> {
    pub fn ln_value(&self) -> T {
        self.ln_rel + self.ln_scale
    }

    pub fn value(&self) -> T {
        self.ln_value().exp()
    }

    /// `K >= bound * (1 - rel_slack)` with `K` given by its relative log.
    pub fn holds(&self, ln_capital_rel: T, rel_slack: T) -> bool {
        ln_capital_rel >= self.ln_rel + (-rel_slack).ln_1p()
    }

    /// `ln K - ln bound`.
    pub fn slack(&self, ln_capital_rel: T) -> T {
        ln_capital_rel - self.ln_rel
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundOutcome<T> {
    Value(BoundValue<T>),
    /// The named precondition failed.
    NotApplicable(String),
}

impl<T: Real> BoundOutcome<T> {
    pub fn value(&self) -> Option<&BoundValue<T>> {
        match self {
            BoundOutcome::Value(v) => Some(v),
            BoundOutcome::NotApplicable(_) => None,
        }
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, BoundOutcome::Value(_))
    }
}

/// Leading constant of the `C`-parametrized bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeadingConstant {
    /// `sqrt(C) / 6`.
    Printed,
    /// `sqrt(C) (1 - sqrt C) / (1 + sqrt C)`.
    Sharp,
    /// `sqrt(C) * k`; used to check that the harness catches a wrong constant.
    Override(f64),
}

impl LeadingConstant {
    fn ln<T: Real>(self, c: T) -> T {
        let r = c.sqrt();
        let k = match self {
            LeadingConstant::Printed => T::one() / T::lit(6.0),
            LeadingConstant::Sharp => (T::one() - r) / (T::one() + r),
            LeadingConstant::Override(k) => T::lit(k),
        };
        r.ln() + k.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery<T> {
    pub s: T,
    pub a: T,
}

fn na<T>(why: impl Into<String>) -> BoundOutcome<T> {
    BoundOutcome::NotApplicable(why.into())
}

/// `(sqrt C / 6) (S/A) pi(S/A) exp((1 - 2C) S^2 / (2A))`, for
/// `C in (0, min(eps_pi, 1/2))` and `0 < S/A < C/2`.
pub fn thm41_bound<T: Real>(prior: &Prior<T>, q: BoundQuery<T>, c: T, k: LeadingConstant) -> BoundOutcome<T> {
    let half = T::lit(0.5);
    if !(c > T::zero() && c < prior.eps_pi().min(half)) {
        return na(format!("C = {c} is not in (0, min(eps_pi, 1/2))"));
    }
    if !(q.a > T::zero()) {
        return na("A > 0");
    }
    let u = q.s / q.a;
    if !(u > T::zero()) {
        return na("S/A > 0");
    }
    if !(u < c * half) {
        return na("S/A < C/2");
    }
    let ln_rel = k.ln(c) + u.ln() + prior.ln_density_rel(-u.ln()) + (T::one() - T::lit(2.0) * c) * q.s * q.s / (T::lit(2.0) * q.a);
    BoundOutcome::Value(BoundValue { ln_rel, ln_scale: prior.ln_scale() })
}

fn thm43_pre<T: Real>(prior: &Prior<T>, q: BoundQuery<T>) -> Option<String> {
    if !(q.a > T::zero()) {
        return Some("A > 0".into());
    }
    if !(q.s > T::zero()) {
        return Some("S > 0".into());
    }
    let lim = T::lit(2.0).max(T::one() / prior.eps_pi());
    if !(q.s * q.s / q.a > lim) {
        return Some("S^2/A > max(2, 1/eps_pi)".into());
    }
    if !(q.s * q.s * q.s / (q.a * q.a) < T::lit(0.5)) {
        return Some("S^3/A^2 < 1/2".into());
    }
    None
}

fn ln_thm43_core<T: Real>(prior: &Prior<T>, q: BoundQuery<T>) -> T {
    let u = q.s / q.a;
    -(T::lit(6.0) * T::E()).ln() - q.a.ln() / T::lit(2.0) + prior.ln_density_rel(-u.ln()) + q.s * q.s / (T::lit(2.0) * q.a)
}

/// `(1/(6e)) A^{-1/2} pi(S/A) exp(S^2/(2A))`, for `S > 0`,
/// `S^2/A > max(2, 1/eps_pi)` and `S^3/A^2 < 1/2`.
pub fn thm43_bound<T: Real>(prior: &Prior<T>, q: BoundQuery<T>) -> BoundOutcome<T> {
    if let Some(why) = thm43_pre(prior, q) {
        return na(why);
    }
    BoundOutcome::Value(BoundValue { ln_rel: ln_thm43_core(prior, q), ln_scale: prior.ln_scale() })
}

/// `u_n = ((1 + sqrt(A)/S) / (1 + A/S^2)) (S/A)`.
pub fn remark41_u<T: Real>(q: BoundQuery<T>) -> T {
    (T::one() + q.a.sqrt() / q.s) / (T::one() + q.a / (q.s * q.s)) * (q.s / q.a)
}

/// `c(u_n)` times the `thm43_bound` value, for the capital of the tilted
/// prior `c pi`; preconditions are those of `thm43_bound` on the base prior.
pub fn remark41_bound<T: Real>(base: &Prior<T>, tilt: &StaircaseTilt<T>, q: BoundQuery<T>) -> BoundOutcome<T> {
    if let Some(why) = thm43_pre(base, q) {
        return na(why);
    }
    let u = remark41_u(q);
    let ln_rel = tilt.ln_value_at_t(-u.ln()) + ln_thm43_core(base, q);
    BoundOutcome::Value(BoundValue { ln_rel, ln_scale: base.ln_scale() })
}

/// `(1/2) pi(delta/3) (delta/3) exp(A delta^2 / 9)` whenever `S > delta A`
/// with `0 < delta < min(eps_pi, 1/2)`.
pub fn prop31_bound<T: Real>(prior: &Prior<T>, q: BoundQuery<T>, delta: T) -> BoundOutcome<T> {
    if !(delta > T::zero() && delta < prior.eps_pi().min(T::lit(0.5))) {
        return na(format!("delta = {delta} is not in (0, min(eps_pi, 1/2))"));
    }
    if !(q.s > delta * q.a) {
        return na("S > delta A");
    }
    let d3 = delta / T::lit(3.0);
    let ln_rel = -T::LN_2() + prior.ln_density_rel(-d3.ln()) + d3.ln() + q.a * delta * delta / T::lit(9.0);
    BoundOutcome::Value(BoundValue { ln_rel, ln_scale: prior.ln_scale() })
}

/// `psi(A) = sqrt(2 ln_2 A + 3 ln_3 A + 2 ln_4 A + ... + 2 ln_b A + 2(1+2 gamma) ln_{b+1} A)`,
/// from `ln A`.
pub fn efkp_psi<T: Real>(ln_a: T, b: usize, gamma: T) -> Result<T> {
    efkp_psi_from_chain(ln_a, 1, b, gamma)
}

/// As `efkp_psi`, from `ln_2 A` for arguments too large to hold `ln A`.
pub fn efkp_psi_from_ln2<T: Real>(ln2_a: T, b: usize, gamma: T) -> Result<T> {
    efkp_psi_from_chain(ln2_a, 2, b, gamma)
}

fn efkp_psi_from_chain<T: Real>(first: T, first_level: usize, b: usize, gamma: T) -> Result<T> {
    if b < 4 {
        return Err(Error::InvalidParameter(format!("EFKP normalizer needs b >= 4, got {b}")));
    }
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    // l_k for k = first_level ..= b+1, the last one positive
    let depth = b + 2 - first_level;
    let chain = log_chain(first, depth, T::zero()).map_err(|e| Error::IteratedLogDomain { what: "ln_{b+1} A".into(), depth: e.depth + first_level - 1 })?;
    let s: T = efkp_terms(b, gamma).into_iter().map(|(k, c)| c * chain[k - first_level]).sum();
    Ok(s.sqrt())
}
