//! Prior densities on `(0, 1]`, their regularity checks and the staircase tilt.
//!
//! Densities are evaluated in `t = ln(1/eps)`. Each prior exposes
//! `ln(eps * pi(eps))` because that quantity stays moderate where `pi` itself
//! overflows (the iterated-log priors only become singular at `t` far beyond
//! any representable `eps`).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logmath::{iterated_exp, log_chain};
use crate::quadrature::{analyze_tail_shaped, LogIntegrator, TailOptions, TailReport, TailVerdict, WindowedIntegral};
use crate::scalar::Real;
use crate::upper_class::UpperClassFunction;

pub type LnFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum PriorFamily<T: Real> {
    Uniform,
    Power {
        a: T,
    },
    /// Singular below `eps0 = exp(-t0)`, constant above.
    Lil {
        t0: T,
    },
    Efkp {
        b: usize,
        gamma: T,
        t0: T,
    },
    Tilted {
        base: Box<Prior<T>>,
        tilt: StaircaseTilt<T>,
    },
    Scaled {
        base: Box<Prior<T>>,
        factor: T,
    },
    /// `F[psi]`.
    FromUpperClass {
        psi: Box<UpperClassFunction<T>>,
    },
    Table(DensityTable<T>),
    /// `ln pi` as a function of `t`.
    Custom {
        name: String,
        ln_density: LnFn<T>,
    },
}

impl<T: Real> fmt::Debug for PriorFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorFamily::Uniform => write!(f, "Uniform"),
            PriorFamily::Power { a } => write!(f, "Power(a={a})"),
            PriorFamily::Lil { t0 } => write!(f, "Lil(t0={t0})"),
            PriorFamily::Efkp { b, gamma, t0 } => write!(f, "Efkp(b={b}, gamma={gamma}, t0={t0:e})"),
            PriorFamily::Tilted { base, tilt } => write!(f, "Tilted({:?}, {} levels)", base.family, tilt.depth()),
            PriorFamily::Scaled { base, factor } => write!(f, "Scaled({:?}, {factor})", base.family),
            PriorFamily::FromUpperClass { psi } => write!(f, "F[{}]", psi.name()),
            PriorFamily::Table(t) => write!(f, "Table({} points)", t.t.len()),
            PriorFamily::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// `(eps, pi)` pairs interpolated linearly in `(ln eps, ln pi)`, constant
/// outside the table.
#[derive(Debug, Clone)]
pub struct DensityTable<T> {
    /// Increasing `t = ln(1/eps)`.
    t: Vec<T>,
    ln_pi: Vec<T>,
}

impl<T: Real> DensityTable<T> {
    pub fn new(points: &[(T, T)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("density table needs at least two points".into()));
        }
        let mut rows: Vec<(T, T)> = Vec::with_capacity(points.len());
        for &(e, p) in points {
            if !(e > T::zero() && e <= T::one()) {
                return Err(Error::InvalidParameter(format!("table epsilon {e} outside (0, 1]")));
            }
            if !(p > T::zero() && p.is_finite()) {
                return Err(Error::InvalidParameter(format!("table density {p} at eps {e} must be positive")));
            }
            rows.push((-e.ln(), p.ln()));
        }
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate epsilon in density table".into()));
        }
        Ok(DensityTable { t: rows.iter().map(|r| r.0).collect(), ln_pi: rows.iter().map(|r| r.1).collect() })
    }

    pub fn ln_density(&self, t: T) -> T {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.ln_pi[0];
        }
        if t >= self.t[n - 1] {
            return self.ln_pi[n - 1];
        }
        let i = self.t.partition_point(|&v| v <= t) - 1;
        let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.ln_pi[i] + w * (self.ln_pi[i + 1] - self.ln_pi[i])
    }
}

#[derive(Clone, Debug)]
pub struct Prior<T: Real> {
    family: PriorFamily<T>,
    ln_eps_pi: T,
    ln_delta_pi: T,
    /// `t` where the singular formula takes over from the constant extension.
    onset_t: T,
    /// Additive constant split off `ln(eps pi)`; see `ln_eps_density_rel`.
    ln_scale: T,
}

/// `ln(eps pi)` of the EFKP formula: `-(L_2 + ... + L_b) - (1 + gamma) L_{b+1}`
/// with `L_1 = t`. `None` outside the tower's domain.
pub fn efkp_ln_eps_density<T: Real>(t: T, b: usize, gamma: T) -> Option<T> {
    let l = log_chain(t, b + 1, T::neg_infinity()).ok()?;
    if !(l[b - 1] > T::zero()) || l[b].is_nan() {
        return None;
    }
    let mut s = T::zero();
    for v in &l[1..b] {
        s = s + *v;
    }
    Some(-s - (T::one() + gamma) * l[b])
}

/// `ln(eps pi)` of the LIL formula: `-ln t - 2 ln ln t`.
pub fn lil_ln_eps_density<T: Real>(t: T) -> Option<T> {
    efkp_ln_eps_density(t, 2, T::one())
}

fn check_tower<T: Real>(t0: T, b: usize) -> Result<()> {
    log_chain(t0, b, T::one()).map(|_| ()).map_err(|e| Error::IteratedLogDomain { what: format!("prior cutoff ln_{b}(1/eps0)"), depth: e.depth })
}

impl<T: Real> Prior<T> {
    pub fn uniform() -> Self {
        Prior { family: PriorFamily::Uniform, ln_eps_pi: T::zero(), ln_delta_pi: T::zero(), onset_t: T::zero(), ln_scale: T::zero() }
    }

    pub fn power(a: T) -> Result<Self> {
        if !(a > T::zero() && a < T::one()) {
            return Err(Error::InvalidParameter(format!("power prior exponent a = {a} must lie in (0, 1)")));
        }
        Ok(Prior { family: PriorFamily::Power { a }, ln_eps_pi: T::zero(), ln_delta_pi: T::zero(), onset_t: T::zero(), ln_scale: T::zero() })
    }

    pub fn lil(eps0: T) -> Result<Self> {
        if !(eps0 > T::zero()) {
            return Err(Error::InvalidParameter(format!("LIL cutoff eps0 = {eps0} must be positive")));
        }
        Self::lil_with_log_cutoff(-eps0.ln())
    }

    /// Cutoff given as `t0 = ln(1/eps0)`.
    pub fn lil_with_log_cutoff(t0: T) -> Result<Self> {
        if !(t0 > T::E()) || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("LIL cutoff needs eps0 < exp(-e), got ln(1/eps0) = {t0}")));
        }
        Self::with_cutoff(PriorFamily::Lil { t0 }, t0)
    }

    pub fn lil_default() -> Self {
        Self::lil_with_log_cutoff(T::E() * T::lit(1.01)).expect("default cutoff is in range")
    }

    pub fn efkp(b: usize, gamma: T, eps0: T) -> Result<Self> {
        if !(eps0 > T::zero()) {
            return Err(Error::InvalidParameter(format!("EFKP cutoff eps0 = {eps0} must be positive")));
        }
        Self::efkp_with_log_cutoff(b, gamma, -eps0.ln())
    }

    pub fn efkp_with_log_cutoff(b: usize, gamma: T, t0: T) -> Result<Self> {
        if b < 4 {
            return Err(Error::InvalidParameter(format!("EFKP depth b = {b} must be at least 4")));
        }
        if !(gamma > T::zero()) {
            return Err(Error::InvalidParameter(format!("EFKP gamma = {gamma} must be positive")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParameter("EFKP cutoff is not representable".into()));
        }
        check_tower(t0, b)?;
        Self::with_cutoff(PriorFamily::Efkp { b, gamma, t0 }, t0)
    }

    /// Cutoff where `ln_b(1/eps0) = 1.5`. Only `b = 4` is representable in
    /// `f64`; deeper towers overflow.
    pub fn efkp_default(b: usize, gamma: T) -> Result<Self> {
        let t0 = iterated_exp(T::lit(1.5), b.saturating_sub(1));
        Self::efkp_with_log_cutoff(b, gamma, t0)
    }

    fn with_cutoff(family: PriorFamily<T>, t0: T) -> Result<Self> {
        let mut p = Prior { family, ln_eps_pi: T::zero(), ln_delta_pi: T::zero(), onset_t: t0, ln_scale: T::zero() };
        // ln pi(eps0) = t0 + ln(eps0 pi(eps0))
        let ln_pi0 = p.singular_ln_eps(t0).ok_or_else(|| Error::InvalidParameter("cutoff outside formula domain".into()))? + t0;
        if ln_pi0.abs() > T::lit(64.0) {
            p.ln_scale = ln_pi0;
        }
        p.ln_delta_pi = grid_min_ln_density(&p, 10_000) + T::lit((1.0 - 1e-3f64).ln());
        Ok(p)
    }

    pub fn scaled(base: Prior<T>, factor: T) -> Result<Self> {
        if !(factor > T::zero() && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factor {factor} must be positive")));
        }
        let lf = factor.ln();
        Ok(Prior {
            ln_eps_pi: base.ln_eps_pi,
            ln_delta_pi: base.ln_delta_pi + lf,
            onset_t: base.onset_t,
            ln_scale: base.ln_scale,
            family: PriorFamily::Scaled { base: Box::new(base), factor },
        })
    }

    pub fn tilted(base: Prior<T>, tilt: StaircaseTilt<T>) -> Self {
        // c >= 1, so the base's lower bound carries over.
        Prior {
            ln_eps_pi: base.ln_eps_pi,
            ln_delta_pi: base.ln_delta_pi,
            onset_t: base.onset_t,
            ln_scale: base.ln_scale,
            family: PriorFamily::Tilted { base: Box::new(base), tilt },
        }
    }

    /// Table prior. `delta_pi` defaults to the grid infimum when `None`.
    pub fn from_table(points: &[(T, T)], eps_pi: T, delta_pi: Option<T>) -> Result<Self> {
        let table = DensityTable::new(points)?;
        Self::declared(PriorFamily::Table(table), eps_pi, delta_pi)
    }

    /// Custom prior from `t -> ln pi(exp(-t))`.
    pub fn custom(name: &str, ln_density: LnFn<T>, eps_pi: T, delta_pi: Option<T>) -> Result<Self> {
        Self::declared(PriorFamily::Custom { name: name.to_string(), ln_density }, eps_pi, delta_pi)
    }

    fn declared(family: PriorFamily<T>, eps_pi: T, delta_pi: Option<T>) -> Result<Self> {
        if !(eps_pi > T::zero() && eps_pi <= T::one()) {
            return Err(Error::InvalidParameter(format!("eps_pi = {eps_pi} must lie in (0, 1]")));
        }
        let mut p = Prior { family, ln_eps_pi: eps_pi.ln(), ln_delta_pi: T::zero(), onset_t: T::zero(), ln_scale: T::zero() };
        p.ln_delta_pi = match delta_pi {
            Some(d) if d > T::zero() => d.ln(),
            Some(d) => return Err(Error::InvalidParameter(format!("delta_pi = {d} must be positive"))),
            None => grid_min_ln_density(&p, 10_000) + T::lit((1.0 - 1e-3f64).ln()),
        };
        Ok(p)
    }

    /// `F[psi]`: `eps pi = psi e^{-psi^2/2}` at `lambda = 1/eps`, constant
    /// below the threshold `M_psi`.
    pub(crate) fn from_upper_class(psi: UpperClassFunction<T>) -> Self {
        let u0 = psi.ln_m();
        let ln_f0 = psi.ln_eps_f(u0) + u0;
        let ln_eps_pi = -u0.max(T::zero());
        let ln_delta = psi.ln_delta();
        let scale = if u0 > T::lit(64.0) { ln_f0 } else { T::zero() };
        Prior {
            family: PriorFamily::FromUpperClass { psi: Box::new(psi) },
            ln_eps_pi: ln_eps_pi.min(T::zero()),
            ln_delta_pi: ln_delta,
            onset_t: u0,
            ln_scale: scale,
        }
    }

    pub fn family(&self) -> &PriorFamily<T> {
        &self.family
    }

    pub fn name(&self) -> String {
        match &self.family {
            PriorFamily::Uniform => "uniform".into(),
            PriorFamily::Power { a } => format!("power(a={a})"),
            PriorFamily::Lil { .. } => "lil".into(),
            PriorFamily::Efkp { b, gamma, .. } => format!("efkp(b={b},gamma={gamma})"),
            PriorFamily::Tilted { base, .. } => format!("tilted({})", base.name()),
            PriorFamily::Scaled { base, factor } => format!("{factor}*{}", base.name()),
            PriorFamily::FromUpperClass { psi } => format!("F[{}]", psi.name()),
            PriorFamily::Table(_) => "table".into(),
            PriorFamily::Custom { name, .. } => name.clone(),
        }
    }

    pub fn is_tilted(&self) -> bool {
        matches!(self.family, PriorFamily::Tilted { .. })
    }

    pub fn eps_pi(&self) -> T {
        self.ln_eps_pi.exp()
    }

    pub fn ln_eps_pi(&self) -> T {
        self.ln_eps_pi
    }

    pub fn delta_pi(&self) -> T {
        self.ln_delta_pi.exp()
    }

    pub fn ln_delta_pi(&self) -> T {
        self.ln_delta_pi
    }

    pub fn onset_t(&self) -> T {
        self.onset_t
    }

    /// The constant removed by `ln_eps_density_rel`. Zero except for priors
    /// whose constant extension sits at an astronomically large level.
    pub fn ln_scale(&self) -> T {
        self.ln_scale
    }

    fn singular_ln_eps(&self, t: T) -> Option<T> {
        match &self.family {
            PriorFamily::Lil { .. } => lil_ln_eps_density(t),
            PriorFamily::Efkp { b, gamma, .. } => efkp_ln_eps_density(t, *b, *gamma),
            _ => None,
        }
    }

    /// `ln(eps pi(eps))` at `eps = exp(-t)`.
    pub fn ln_eps_density(&self, t: T) -> T {
        match &self.family {
            PriorFamily::Uniform => -t,
            PriorFamily::Power { a } => -(T::one() - *a) * t,
            PriorFamily::Lil { t0 } | PriorFamily::Efkp { t0, .. } => {
                if t > *t0 {
                    self.singular_ln_eps(t).unwrap_or(T::neg_infinity())
                } else {
                    // ln pi(eps0) - t
                    self.singular_ln_eps(*t0).unwrap_or(T::neg_infinity()) + (*t0 - t)
                }
            }
            PriorFamily::Tilted { base, tilt } => base.ln_eps_density(t) + tilt.ln_value_at_t(t),
            PriorFamily::Scaled { base, factor } => base.ln_eps_density(t) + factor.ln(),
            PriorFamily::FromUpperClass { psi } => {
                let u0 = psi.ln_m();
                if t > u0 {
                    psi.ln_eps_f(t)
                } else {
                    psi.ln_eps_f(u0) + (u0 - t)
                }
            }
            PriorFamily::Table(tab) => tab.ln_density(t) - t,
            PriorFamily::Custom { ln_density, .. } => ln_density(t) - t,
        }
    }

    /// `ln(eps pi(eps)) - ln_scale`, evaluated without forming the large
    /// constant. Mixture weights and capital comparisons use this form.
    pub fn ln_eps_density_rel(&self, t: T) -> T {
        if self.ln_scale == T::zero() {
            return self.ln_eps_density(t);
        }
        match &self.family {
            PriorFamily::Tilted { base, tilt } => base.ln_eps_density_rel(t) + tilt.ln_value_at_t(t),
            PriorFamily::Scaled { base, factor } => base.ln_eps_density_rel(t) + factor.ln(),
            _ => {
                if t > self.onset_t {
                    self.ln_eps_density(t) - self.ln_scale
                } else {
                    -t
                }
            }
        }
    }

    /// `ln pi(eps)` at `eps = exp(-t)`.
    pub fn ln_density(&self, t: T) -> T {
        self.ln_eps_density(t) + t
    }

    /// `ln pi(eps) - ln_scale`.
    pub fn ln_density_rel(&self, t: T) -> T {
        if self.ln_scale != T::zero() && t <= self.onset_t && !self.is_tilted() && !matches!(self.family, PriorFamily::Scaled { .. }) {
            return T::zero();
        }
        self.ln_eps_density_rel(t) + t
    }

    pub fn ln_density_at(&self, eps: T) -> T {
        self.ln_density(-eps.ln())
    }

    pub fn density(&self, eps: T) -> T {
        self.ln_density_at(eps).exp()
    }
}

/// Validation grid in `t`: uniform on `[ln(1/eps_pi), ln 1e30]`, plus a
/// geometric stretch in `t` past the onset when the singular part starts
/// deeper than that.
pub fn assumption_grid<T: Real>(prior: &Prior<T>, points: usize) -> Vec<T> {
    let t_lo = -prior.ln_eps_pi();
    let depth = T::lit(1e30f64.ln());
    let t_hi = depth.max(t_lo + depth);
    let onset = prior.onset_t();
    let deep = onset > t_hi;
    let n1 = if deep { points / 2 } else { points };
    let mut g: Vec<T> = (0..n1).map(|i| t_lo + (t_hi - t_lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n1.max(2) - 1)).collect();
    if deep {
        let n2 = points - n1;
        let hi = (onset * T::lit(1e6)).min(T::lit(1e300)).min(T::max_value() / T::lit(1e6));
        let (la, lb) = (onset.ln(), hi.ln());
        g.extend((0..n2).map(|i| (la + (lb - la) * T::from_usize_lossy(i) / T::from_usize_lossy(n2.max(2) - 1)).exp()));
    }
    g
}

fn grid_min_ln_density<T: Real>(prior: &Prior<T>, points: usize) -> T {
    let scale = prior.ln_scale();
    assumption_grid(prior, points).into_iter().map(|t| prior.ln_density_rel(t)).fold(T::infinity(), T::min) + scale
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub prior: String,
    pub grid_points: usize,
    pub ln_min_density: f64,
    pub ln_delta_pi: f64,
    pub lower_bound_ok: bool,
    pub monotonicity_checked: bool,
    pub monotonicity_violations: usize,
    pub worst_increase: f64,
    pub ln_integral: f64,
    pub integral: TailReport,
    pub integral_ok: bool,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.lower_bound_ok && (!self.monotonicity_checked || self.monotonicity_violations == 0) && self.integral_ok
    }
}

pub fn integrability<T: Real>(prior: &Prior<T>) -> TailReport {
    let f = |t: T| prior.ln_eps_density_rel(t);
    let shape = |t: T| prior.ln_eps_density(t);
    analyze_tail_shaped(&f, &shape, &TailOptions::new(T::zero()))
}

/// Checks the three parts of the prior regularity assumption on a grid.
pub fn validate_assumption1<T: Real>(prior: &Prior<T>, grid_points: usize) -> Result<ValidationReport> {
    if grid_points < 10 {
        return Err(Error::InvalidParameter(format!("validation needs at least 10 grid points, got {grid_points}")));
    }
    let grid = assumption_grid(prior, grid_points);
    let scale = prior.ln_scale();
    let ln_min = grid.iter().map(|&t| prior.ln_density_rel(t)).fold(T::infinity(), T::min) + scale;
    let lower_ok = ln_min >= prior.ln_delta_pi();

    let mut notes = Vec::new();
    let checked = !prior.is_tilted();
    let mut violations = 0;
    let mut worst = 0.0f64;
    if checked {
        // eps*pi non-decreasing in eps <=> ln(eps*pi) non-increasing in t
        let vals: Vec<T> = grid.iter().map(|&t| prior.ln_eps_density_rel(t)).collect();
        for w in vals.windows(2) {
            let inc = (w[1] - w[0]).as_f64();
            if inc > 1e-12 {
                violations += 1;
            }
            worst = worst.max(inc);
        }
    } else {
        notes.push("tilted prior: monotonicity of eps*pi not required, check skipped".into());
    }
    let integral = integrability(prior);
    let integral_ok = integral.verdict == TailVerdict::Convergent;
    Ok(ValidationReport {
        prior: prior.name(),
        grid_points,
        ln_min_density: ln_min.as_f64(),
        ln_delta_pi: prior.ln_delta_pi().as_f64(),
        lower_bound_ok: lower_ok,
        monotonicity_checked: checked,
        monotonicity_violations: violations,
        worst_increase: worst,
        ln_integral: integral.evidence.ln_partial_grown + scale.as_f64(),
        integral_ok,
        integral,
        notes,
    })
}

/// Step function `c(eps) = k` on `[eps_{k+1}, eps_k)`, `c = 1` above `eps_1`,
/// and `c = K` below the deepest breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseTilt<T> {
    /// Increasing `t_k = ln(1/eps_k)`, `k = 1..=K`.
    pub breakpoints_t: Vec<T>,
}

impl<T: Real> StaircaseTilt<T> {
    /// The trivial tilt `c = 1`.
    pub fn trivial() -> Self {
        StaircaseTilt { breakpoints_t: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.breakpoints_t.len()
    }

    pub fn breakpoint_eps(&self, k: usize) -> T {
        (-self.breakpoints_t[k - 1]).exp()
    }

    pub fn value_at_t(&self, t: T) -> T {
        // number of breakpoints strictly below t, at least 1
        let k = self.breakpoints_t.partition_point(|&b| b < t);
        T::from_usize_lossy(k.max(1))
    }

    pub fn ln_value_at_t(&self, t: T) -> T {
        self.value_at_t(t).ln()
    }

    pub fn value_at(&self, eps: T) -> T {
        self.value_at_t(-eps.ln())
    }
}

/// Breakpoints with `int_0^{eps_k} pi = 2^{-k} int_0^1 pi`, by bisection on
/// the cumulative integral. Stops at `k_max` levels or when a breakpoint
/// falls in the last (unresolved) window of the integration range.
pub fn build_staircase_tilt<T: Real>(prior: &Prior<T>, k_max: usize) -> Result<StaircaseTilt<T>> {
    let integ = LogIntegrator::default();
    let f = |t: T| prior.ln_eps_density_rel(t);
    let cap = TailOptions::<T>::new(T::zero()).cutoff;
    let win = WindowedIntegral::compute(&integ, &f, T::zero(), cap);
    let suffix = win.ln_suffix();
    let total = suffix[0];
    if !total.is_finite() {
        return Err(Error::AssumptionViolated("prior mass is zero or not finite".into()));
    }
    let nw = win.ln_masses.len();
    let mut bps: Vec<T> = Vec::new();
    let ln2 = T::LN_2();
    for k in 1..=k_max {
        let target = total - T::from_usize_lossy(k) * ln2;
        // window i with suffix[i] >= target > suffix[i+1]
        let Some(i) = (0..nw).find(|&i| suffix[i] >= target && suffix[i + 1] < target) else { break };
        if i + 1 == nw && k > 1 {
            break;
        }
        let (a, b) = (win.edges[i], win.edges[i + 1]);
        if suffix[i + 1] == suffix[i] {
            return Err(Error::AssumptionViolated("cumulative prior mass is flat near zero".into()));
        }
        let tail = |t: T| crate::logmath::log_add(integ.integrate(&f, t, b).ln_value, suffix[i + 1]);
        let (mut lo, mut hi) = (a, b);
        for _ in 0..200 {
            let mid = lo + (hi - lo) / T::lit(2.0);
            if !(mid > lo && mid < hi) {
                break;
            }
            if tail(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_k = lo + (hi - lo) / T::lit(2.0);
        if let Some(&last) = bps.last() {
            if !(t_k > last) {
                return Err(Error::AssumptionViolated("cumulative prior mass is not strictly increasing near zero".into()));
            }
        }
        bps.push(t_k);
    }
    Ok(StaircaseTilt { breakpoints_t: bps })
}
