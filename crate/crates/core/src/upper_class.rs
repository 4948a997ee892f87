//! Upper-class functions `psi`, the integral test, the functionals `F` and
//! `G`, their compositions and the two equivalence relations.
//!
//! `psi` is evaluated at `u = ln(lambda)`; with `lambda = 1/eps` this is the
//! same coordinate as the priors' `t`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logmath::{iterated_exp, log_chain};
use crate::priors::{LnFn, Prior};
use crate::quadrature::{analyze_tail, TailEvidence, TailOptions, TailVerdict};
use crate::scalar::Real;

#[derive(Clone)]
pub enum PsiFamily<T: Real> {
    /// `psi^2 = sum c_k ln_k(lambda)` over `(k, c_k)`.
    IteratedLogSum {
        terms: Vec<(usize, T)>,
    },
    /// The EFKP bound: coefficients `2, 3, 2, ..., 2, 2(1 + 2 gamma)` on
    /// `ln_2 .. ln_{b+1}`.
    Efkp {
        b: usize,
        gamma: T,
        terms: Vec<(usize, T)>,
    },
    /// `sqrt(c ln_2 lambda)`.
    SqrtLogLog {
        c: T,
    },
    Constant {
        c: T,
    },
    /// `sqrt(psi^2 + shift)`.
    Shifted {
        base: Box<UpperClassFunction<T>>,
        shift: T,
    },
    Min(Box<UpperClassFunction<T>>, Box<UpperClassFunction<T>>),
    /// `G[pi]`.
    FromPrior {
        prior: Box<Prior<T>>,
    },
    /// `psi^2` as a function of `u`.
    Custom {
        name: String,
        psi_sq: LnFn<T>,
    },
}

#[derive(Clone)]
pub struct UpperClassFunction<T: Real> {
    family: PsiFamily<T>,
    ln_m: T,
    ln_delta: T,
}

impl<T: Real> fmt::Debug for UpperClassFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (ln M = {:e})", self.name(), self.ln_m)
    }
}

fn terms_psi_sq<T: Real>(terms: &[(usize, T)], u: T) -> T {
    let depth = terms.iter().map(|t| t.0).max().unwrap_or(1);
    let Ok(l) = log_chain(u, depth, T::neg_infinity()) else { return T::nan() };
    terms.iter().fold(T::zero(), |s, &(k, c)| s + c * l[k - 1])
}

/// Smallest `u` where `ln_depth(lambda) >= 0`.
fn tower_threshold<T: Real>(depth: usize) -> T {
    if depth <= 1 {
        T::zero()
    } else {
        iterated_exp(T::one(), depth - 2)
    }
}

/// Bisection (in `ln(1 + u)`) for the first `u >= lo` with `pred(u)`.
fn first_true<T: Real>(lo: T, pred: &dyn Fn(T) -> bool) -> T {
    if pred(lo) {
        return lo;
    }
    let cap = T::lit(1e300).min(T::max_value() / T::lit(1e4));
    if !pred(cap) {
        return T::infinity();
    }
    let (mut a, mut b) = (lo.ln_1p(), cap.ln_1p());
    for _ in 0..300 {
        let m = a + (b - a) / T::lit(2.0);
        if !(m > a && m < b) {
            break;
        }
        if pred(m.exp_m1()) {
            b = m;
        } else {
            a = m;
        }
    }
    b.exp_m1()
}

/// Grid in `u`: uniform on `[ln M, ln M + 69]`, then geometric up to `1e300`.
pub fn psi_grid<T: Real>(ln_m: T, points: usize) -> Vec<T> {
    let n1 = points / 2;
    let n2 = points - n1;
    let span = T::lit(1e30f64.ln());
    let mut g: Vec<T> = (0..n1).map(|i| ln_m + span * T::from_usize_lossy(i) / T::from_usize_lossy(n1.max(2) - 1)).collect();
    let lo = (ln_m + span).max(T::one());
    let hi = T::lit(1e300).min(T::max_value() / T::lit(1e4)).max(lo * T::lit(10.0));
    let (la, lb) = (lo.ln(), hi.ln());
    g.extend((0..n2).map(|i| (la + (lb - la) * T::from_usize_lossy(i) / T::from_usize_lossy(n2.max(2) - 1)).exp()));
    g
}

impl<T: Real> UpperClassFunction<T> {
    fn finish(family: PsiFamily<T>, domain_lo: T) -> Result<Self> {
        let mut f = UpperClassFunction { family, ln_m: domain_lo, ln_delta: T::zero() };
        let lo = domain_lo;
        let ln_m = first_true(lo, &|u| f.raw_psi_sq(u) >= T::one());
        if !ln_m.is_finite() {
            return Err(Error::InvalidParameter(format!("{}: psi never reaches 1 on a representable range", f.name())));
        }
        f.ln_m = ln_m;
        let grid = psi_grid(ln_m, 10_000);
        let min = grid.iter().map(|&u| f.ln_ass2(u)).fold(T::infinity(), T::min);
        f.ln_delta = min + T::lit((1.0 - 1e-3f64).ln());
        Ok(f)
    }

    pub fn iterated_log_sum(terms: Vec<(usize, T)>) -> Result<Self> {
        if terms.is_empty() || terms.iter().any(|&(k, c)| k == 0 || !(c >= T::zero())) {
            return Err(Error::InvalidParameter("iterated-log terms need depth >= 1 and non-negative coefficients".into()));
        }
        let depth = terms.iter().map(|t| t.0).max().unwrap();
        Self::finish(PsiFamily::IteratedLogSum { terms }, tower_threshold(depth))
    }

    pub fn efkp(b: usize, gamma: T) -> Result<Self> {
        if b < 4 {
            return Err(Error::InvalidParameter(format!("EFKP depth b = {b} must be at least 4")));
        }
        if !(gamma > T::zero()) {
            return Err(Error::InvalidParameter(format!("EFKP gamma = {gamma} must be positive")));
        }
        let terms = efkp_terms(b, gamma);
        Self::finish(PsiFamily::Efkp { b, gamma, terms }, tower_threshold(b + 1))
    }

    pub fn sqrt_log_log(c: T) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(Error::InvalidParameter(format!("coefficient c = {c} must be positive")));
        }
        Self::finish(PsiFamily::SqrtLogLog { c }, T::one())
    }

    pub fn constant(c: T) -> Result<Self> {
        if !(c >= T::one()) {
            return Err(Error::InvalidParameter(format!("constant psi = {c} must be at least 1")));
        }
        Self::finish(PsiFamily::Constant { c }, T::zero())
    }

    pub fn shifted(base: UpperClassFunction<T>, shift: T) -> Result<Self> {
        let lo = base.ln_m;
        Self::finish(PsiFamily::Shifted { base: Box::new(base), shift }, lo)
    }

    /// Pointwise minimum of two functions.
    pub fn min(a: UpperClassFunction<T>, b: UpperClassFunction<T>) -> Result<Self> {
        let lo = a.ln_m.max(b.ln_m);
        Self::finish(PsiFamily::Min(Box::new(a), Box::new(b)), lo)
    }

    /// `psi^2` supplied as a function of `u = ln lambda`, valid for `u >= ln_m`.
    pub fn custom(name: &str, psi_sq: LnFn<T>, ln_m: T) -> Result<Self> {
        Self::finish(PsiFamily::Custom { name: name.to_string(), psi_sq }, ln_m)
    }

    pub fn family(&self) -> &PsiFamily<T> {
        &self.family
    }

    pub fn name(&self) -> String {
        match &self.family {
            PsiFamily::IteratedLogSum { terms } => {
                let parts: Vec<String> = terms.iter().map(|(k, c)| format!("{c}*ln_{k}")).collect();
                format!("sqrt({})", parts.join("+"))
            }
            PsiFamily::Efkp { b, gamma, .. } => format!("efkp_psi(b={b},gamma={gamma})"),
            PsiFamily::SqrtLogLog { c } => format!("sqrt({c}*ln_2)"),
            PsiFamily::Constant { c } => format!("const({c})"),
            PsiFamily::Shifted { base, shift } => format!("sqrt({}^2+{shift})", base.name()),
            PsiFamily::Min(a, b) => format!("min({},{})", a.name(), b.name()),
            PsiFamily::FromPrior { prior } => format!("G[{}]", prior.name()),
            PsiFamily::Custom { name, .. } => name.clone(),
        }
    }

    /// Domain threshold as `ln M_psi`.
    pub fn ln_m(&self) -> T {
        self.ln_m
    }

    pub fn ln_delta(&self) -> T {
        self.ln_delta
    }

    pub fn delta(&self) -> T {
        self.ln_delta.exp()
    }

    fn raw_psi_sq(&self, u: T) -> T {
        match &self.family {
            PsiFamily::IteratedLogSum { terms } | PsiFamily::Efkp { terms, .. } => terms_psi_sq(terms, u),
            PsiFamily::SqrtLogLog { c } => {
                if u > T::zero() {
                    *c * u.ln()
                } else {
                    T::nan()
                }
            }
            PsiFamily::Constant { c } => *c * *c,
            PsiFamily::Shifted { base, shift } => base.psi_sq(u) + *shift,
            PsiFamily::Min(a, b) => a.psi_sq(u).min(b.psi_sq(u)),
            PsiFamily::FromPrior { prior } => {
                let beta = beta_raw(prior, u).max(T::one());
                beta + beta.ln()
            }
            PsiFamily::Custom { psi_sq, .. } => psi_sq(u),
        }
    }

    /// `psi(lambda)^2` at `u = ln lambda`; held at its threshold value below
    /// `ln M_psi`.
    pub fn psi_sq(&self, u: T) -> T {
        self.raw_psi_sq(u.max(self.ln_m))
    }

    pub fn psi(&self, u: T) -> T {
        self.psi_sq(u).sqrt()
    }

    /// `ln psi - psi^2 / 2`: the integrand of `I(psi)` in `du`, and
    /// `ln(eps F[psi](eps))` at `eps = exp(-u)`.
    pub fn ln_eps_f(&self, u: T) -> T {
        let s = self.psi_sq(u);
        s.ln() / T::lit(2.0) - s / T::lit(2.0)
    }

    /// `ln(lambda psi e^{-psi^2/2})`.
    pub fn ln_ass2(&self, u: T) -> T {
        u + self.ln_eps_f(u)
    }
}

/// `(k, c_k)` for the EFKP bound.
pub fn efkp_terms<T: Real>(b: usize, gamma: T) -> Vec<(usize, T)> {
    let mut t = Vec::with_capacity(b);
    for k in 2..=b {
        t.push((k, if k == 3 { T::lit(3.0) } else { T::lit(2.0) }));
    }
    t.push((b + 1, T::lit(2.0) * (T::one() + T::lit(2.0) * gamma)));
    t
}

/// `-2 ln(eps pi(eps))` at `eps = exp(-t)`, before clamping.
pub fn beta_raw<T: Real>(prior: &Prior<T>, t: T) -> T {
    -T::lit(2.0) * prior.ln_eps_density(t)
}

/// `beta = max(-2 ln(eps pi), 1)`.
pub fn beta<T: Real>(prior: &Prior<T>, t: T) -> T {
    beta_raw(prior, t).max(T::one())
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralTestOutcome {
    pub psi: String,
    pub verdict: TailVerdict,
    /// `ln I` at the grown cutoff.
    pub ln_value: f64,
    /// Relative increment between the two cutoffs; an error proxy.
    pub rel_err: f64,
    pub evidence: TailEvidence,
}

/// Integrability of `psi e^{-psi^2/2} dlambda/lambda` past `M_psi`. The
/// growth factor is applied to `ln lambda` (`lambda -> lambda^growth`).
pub fn integral_test<T: Real>(psi: &UpperClassFunction<T>, ln_lambda_hi: T, growth: T) -> Result<IntegralTestOutcome> {
    if !(ln_lambda_hi > psi.ln_m()) {
        return Err(Error::InvalidParameter(format!("cutoff ln lambda = {ln_lambda_hi} must exceed ln M_psi = {}", psi.ln_m())));
    }
    if !(growth > T::one()) {
        return Err(Error::InvalidParameter(format!("growth factor {growth} must exceed 1")));
    }
    let mut opts = TailOptions::new(psi.ln_m());
    opts.cutoff = ln_lambda_hi;
    opts.growth = growth;
    let f = |u: T| psi.ln_eps_f(u);
    let r = analyze_tail(&f, &opts);
    Ok(IntegralTestOutcome {
        psi: psi.name(),
        verdict: r.verdict,
        ln_value: r.evidence.ln_partial_grown,
        rel_err: r.evidence.relative_increment,
        evidence: r.evidence,
    })
}

/// `integral_test` with the default cutoff `ln lambda = 1e300` and growth 10.
pub fn integral_test_default<T: Real>(psi: &UpperClassFunction<T>) -> Result<IntegralTestOutcome> {
    let o = TailOptions::<T>::new(psi.ln_m());
    integral_test(psi, o.cutoff, o.growth)
}

#[derive(Debug, Clone, Serialize)]
pub struct Assumption2Report {
    pub psi: String,
    pub grid_points: usize,
    pub monotonicity_violations: usize,
    pub ln_min_lower: f64,
    pub ln_delta: f64,
    pub lower_bound_ok: bool,
    pub integral: IntegralTestOutcome,
}

impl Assumption2Report {
    pub fn passed(&self) -> bool {
        self.monotonicity_violations == 0 && self.lower_bound_ok && self.integral.verdict == TailVerdict::Convergent
    }
}

pub fn validate_assumption2<T: Real>(psi: &UpperClassFunction<T>, grid_points: usize) -> Result<Assumption2Report> {
    if grid_points < 10 {
        return Err(Error::InvalidParameter(format!("validation needs at least 10 grid points, got {grid_points}")));
    }
    let grid = psi_grid(psi.ln_m(), grid_points);
    let sq: Vec<T> = grid.iter().map(|&u| psi.psi_sq(u)).collect();
    let violations = sq.windows(2).filter(|w| w[1] < w[0] * (T::one() - T::lit(1e-12))).count();
    let ln_min = grid.iter().map(|&u| psi.ln_ass2(u)).fold(T::infinity(), T::min);
    Ok(Assumption2Report {
        psi: psi.name(),
        grid_points,
        monotonicity_violations: violations,
        ln_min_lower: ln_min.as_f64(),
        ln_delta: psi.ln_delta().as_f64(),
        lower_bound_ok: ln_min >= psi.ln_delta(),
        integral: integral_test_default(psi)?,
    })
}

/// `F[psi]`, after checking `psi` against the upper-class assumption.
pub fn apply_f<T: Real>(psi: &UpperClassFunction<T>) -> Result<Prior<T>> {
    let rep = validate_assumption2(psi, 1000)?;
    if !rep.passed() {
        return Err(Error::AssumptionViolated(format!(
            "{} is not in the upper class: monotonicity violations {}, lower bound ok {}, integral test {:?}",
            rep.psi, rep.monotonicity_violations, rep.lower_bound_ok, rep.integral.verdict
        )));
    }
    Ok(Prior::from_upper_class(psi.clone()))
}

/// `F[psi]` without the assumption check, for pointwise identities.
pub fn apply_f_unchecked<T: Real>(psi: &UpperClassFunction<T>) -> Prior<T> {
    Prior::from_upper_class(psi.clone())
}

/// `G[pi]`. `M_psi` is the first `lambda` with `-2 ln((1/lambda) pi(1/lambda)) >= 1`.
pub fn apply_g<T: Real>(prior: &Prior<T>) -> UpperClassFunction<T> {
    let p = prior.clone();
    let lo = first_true(T::zero(), &|u| beta_raw(&p, u) >= T::one());
    let mut f = UpperClassFunction { family: PsiFamily::FromPrior { prior: Box::new(p) }, ln_m: lo, ln_delta: T::zero() };
    let grid = psi_grid(lo, 10_000);
    let min = grid.iter().map(|&u| f.ln_ass2(u)).fold(T::infinity(), T::min);
    f.ln_delta = min + T::lit((1.0 - 1e-3f64).ln());
    f
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FgValue {
    pub beta: f64,
    /// `ln(eps F[G[pi]](eps))` from the closed form and from composing.
    pub ln_eps_closed: f64,
    pub ln_eps_direct: f64,
    /// `F[G[pi]](eps) / pi(eps)` from the closed form.
    pub ratio: f64,
}

const COMPOSE_TOL: f64 = 1e-10;

/// `F[G[pi]]` at `eps = exp(-t)` by the closed form, cross-checked against
/// the direct composition.
pub fn compose_fg<T: Real>(prior: &Prior<T>, t: T) -> Result<FgValue> {
    FgComposer::new(prior).at(t)
}

/// `compose_fg` with `F[G[pi]]` built once, for evaluation on a grid.
pub struct FgComposer<T: Real> {
    prior: Prior<T>,
    fg: Prior<T>,
}

impl<T: Real> FgComposer<T> {
    pub fn new(prior: &Prior<T>) -> Self {
        FgComposer { prior: prior.clone(), fg: apply_f_unchecked(&apply_g(prior)) }
    }

    pub fn at(&self, t: T) -> Result<FgValue> {
        let b = beta_raw(&self.prior, t);
        if !(b >= T::one()) {
            return Err(Error::OutOfAsymptoticRange(format!("beta = {b} < 1 at ln(1/eps) = {t}; the clamp is active")));
        }
        let half_ln = ((b + b.ln()) / b).ln() / T::lit(2.0);
        let closed = self.prior.ln_eps_density(t) + half_ln;
        let direct = self.fg.ln_eps_density(t);
        let diff = (closed - direct).abs();
        // absolute in the log, i.e. relative on the density
        if !(diff.as_f64() <= COMPOSE_TOL) {
            return Err(Error::ConsistencyFault(format!("F[G[pi]] closed form {closed} vs direct {direct} at t = {t}")));
        }
        Ok(FgValue { beta: b.as_f64(), ln_eps_closed: closed.as_f64(), ln_eps_direct: direct.as_f64(), ratio: half_ln.exp().as_f64() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GfValue {
    pub psi: f64,
    pub closed: f64,
    pub direct: f64,
    /// `psi - G[F[psi]]`.
    pub diff: f64,
}

/// `G[F[psi]]` at `u = ln lambda` by the closed form, cross-checked against
/// the direct composition. Also checks `G[F[psi]] < psi` when `psi > 1`.
pub fn compose_gf<T: Real>(psi: &UpperClassFunction<T>, u: T) -> Result<GfValue> {
    if u < psi.ln_m() {
        return Err(Error::InvalidParameter(format!("ln lambda = {u} below ln M_psi = {}", psi.ln_m())));
    }
    let s = psi.psi_sq(u);
    let p = s.sqrt();
    let inner = s - s.ln();
    if !(inner >= T::one()) {
        return Err(Error::OutOfAsymptoticRange(format!("psi^2 - 2 ln psi = {inner} < 1")));
    }
    let closed = (inner + inner.ln()).sqrt();
    let f = apply_f_unchecked(psi);
    let b = beta(&f, u);
    let direct = (b + b.ln()).sqrt();
    if !(((closed - direct) / closed).abs().as_f64() <= COMPOSE_TOL) {
        return Err(Error::ConsistencyFault(format!("G[F[psi]] closed form {closed} vs direct {direct} at u = {u}")));
    }
    if p > T::one() && !(closed < p) {
        return Err(Error::ConsistencyFault(format!("G[F[psi]] = {closed} is not below psi = {p}")));
    }
    Ok(GfValue { psi: p.as_f64(), closed: closed.as_f64(), direct: direct.as_f64(), diff: (p - closed).as_f64() })
}

/// Points in `t = ln(1/eps)` (equivalently `u = ln lambda`).
#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid<T> {
    pub points: Vec<T>,
}

impl<T: Real> LogGrid<T> {
    /// Geometric in `eps` on `[eps_lo, eps_hi]`.
    pub fn geometric_eps(eps_lo: T, eps_hi: T, n: usize) -> Self {
        Self::uniform_t(-eps_hi.ln(), -eps_lo.ln(), n)
    }

    pub fn uniform_t(lo: T, hi: T, n: usize) -> Self {
        let n = n.max(2);
        LogGrid { points: (0..n).map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)).collect() }
    }

    /// `eps` in `[1e-30, 1e-2]`, 200 points.
    pub fn standard() -> Self {
        Self::geometric_eps(T::lit(1e-30), T::lit(1e-2), 200)
    }

    /// Moves the grid past `lo` when it starts below it; keeps the span
    /// where representable, otherwise goes geometric in `t`.
    pub fn beyond(&self, lo: T) -> Self {
        let first = self.points[0];
        if lo < first {
            return self.clone();
        }
        let n = self.points.len();
        let span = *self.points.last().unwrap() - first;
        let start = lo + (lo.abs() * T::lit(1e-12)).max(T::lit(1e-9));
        if start + span > start * (T::one() + T::lit(1e-9)) {
            Self::uniform_t(start, start + span, n)
        } else {
            let (a, b) = (start.ln(), (start * T::lit(1e6)).ln());
            LogGrid { points: (0..n).map(|i| (a + (b - a) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)).exp()).collect() }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EquivalenceOptions {
    /// Ratios must stay in `[1/R, R]`.
    pub ratio_bound: f64,
    /// Largest tolerated slope of `ln ratio` against `ln t` on the deep half.
    pub max_slope: f64,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        EquivalenceOptions { ratio_bound: 1e3, max_slope: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub first: String,
    pub second: String,
    pub ln_ratio_min: f64,
    pub ln_ratio_max: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub tail_slope: f64,
    pub equivalent: bool,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

fn equivalence_from_logs(first: String, second: String, ts: &[f64], lr: &[f64], opts: &EquivalenceOptions) -> EquivalenceReport {
    let lo = lr.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = ts.len() / 2;
    let lx: Vec<f64> = ts[half..].iter().map(|t| t.ln()).collect();
    let s = slope(&lx, &lr[half..]);
    let lb = opts.ratio_bound.ln();
    let finite = lr.iter().all(|v| v.is_finite());
    EquivalenceReport {
        first,
        second,
        ln_ratio_min: lo,
        ln_ratio_max: hi,
        ratio_min: lo.exp(),
        ratio_max: hi.exp(),
        tail_slope: s,
        equivalent: finite && lo >= -lb && hi <= lb && s.abs() <= opts.max_slope,
    }
}

/// `pi_1 ~_0 pi_2`: samples `pi_2 / pi_1` on the grid.
pub fn equivalent_priors<T: Real>(p1: &Prior<T>, p2: &Prior<T>, grid: &LogGrid<T>, opts: &EquivalenceOptions) -> EquivalenceReport {
    let grid = grid.beyond(p1.onset_t().max(p2.onset_t()) - T::one());
    let ds = (p2.ln_scale() - p1.ln_scale()).as_f64();
    let ts: Vec<f64> = grid.points.iter().map(|t| t.as_f64()).collect();
    let lr: Vec<f64> = grid.points.iter().map(|&t| (p2.ln_eps_density_rel(t) - p1.ln_eps_density_rel(t)).as_f64() + ds).collect();
    equivalence_from_logs(p1.name(), p2.name(), &ts, &lr, opts)
}

/// `psi_1 ~_inf psi_2`: samples `(psi_2^2 - psi_1^2) / 2` on the grid.
pub fn equivalent_psis<T: Real>(a: &UpperClassFunction<T>, b: &UpperClassFunction<T>, grid: &LogGrid<T>, opts: &EquivalenceOptions) -> EquivalenceReport {
    let grid = grid.beyond(a.ln_m().max(b.ln_m()));
    let ts: Vec<f64> = grid.points.iter().map(|t| t.as_f64()).collect();
    let lr: Vec<f64> = grid.points.iter().map(|&u| ((b.psi_sq(u) - a.psi_sq(u)) / T::lit(2.0)).as_f64()).collect();
    equivalence_from_logs(a.name(), b.name(), &ts, &lr, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Functional {
    F,
    G,
}

#[derive(Debug, Clone)]
pub enum EquivalentPair<T: Real> {
    Priors(Prior<T>, Prior<T>),
    Psis(UpperClassFunction<T>, UpperClassFunction<T>),
}

#[derive(Debug, Clone, Serialize)]
pub struct PreservationReport {
    pub functional: Functional,
    pub input: EquivalenceReport,
    pub output: Option<EquivalenceReport>,
    pub passed: bool,
    pub note: String,
}

/// Tests that `F` (on psi pairs) or `G` (on prior pairs) maps an equivalent
/// pair to an equivalent pair.
pub fn preserve_equivalence_check<T: Real>(pair: &EquivalentPair<T>, grid: &LogGrid<T>, opts: &EquivalenceOptions) -> Result<PreservationReport> {
    match pair {
        EquivalentPair::Priors(p1, p2) => {
            let input = equivalent_priors(p1, p2, grid, opts);
            if !input.equivalent {
                return Ok(PreservationReport {
                    functional: Functional::G,
                    input,
                    output: None,
                    passed: false,
                    note: "input pair is not equivalent; conclusion skipped".into(),
                });
            }
            let out = equivalent_psis(&apply_g(p1), &apply_g(p2), grid, opts);
            let passed = out.equivalent;
            Ok(PreservationReport { functional: Functional::G, input, output: Some(out), passed, note: String::new() })
        }
        EquivalentPair::Psis(a, b) => {
            let input = equivalent_psis(a, b, grid, opts);
            if !input.equivalent {
                return Ok(PreservationReport {
                    functional: Functional::F,
                    input,
                    output: None,
                    passed: false,
                    note: "input pair is not equivalent; conclusion skipped".into(),
                });
            }
            let out = equivalent_priors(&apply_f(a)?, &apply_f(b)?, grid, opts);
            let passed = out.equivalent;
            Ok(PreservationReport { functional: Functional::F, input, output: Some(out), passed, note: String::new() })
        }
    }
}

/// `sqrt(2 ln_2 lambda + 4 ln_3 lambda)`.
pub fn corollary_psi<T: Real>() -> UpperClassFunction<T> {
    UpperClassFunction::iterated_log_sum(vec![(2, T::lit(2.0)), (3, T::lit(4.0))]).expect("fixed coefficients are valid")
}

pub fn custom_psi_sq<T: Real, F: Fn(T) -> T + Send + Sync + 'static>(f: F) -> LnFn<T> {
    Arc::new(f)
}
