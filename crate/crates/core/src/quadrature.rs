//! Gauss-Legendre rules, the mixture node set, log-domain adaptive
//! integration and the tail classifier used for integrability tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logmath::{log_add, log_sum_exp};
use crate::scalar::Real;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "rule needs at least one node");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 1 { x } else { p1 };
                let pm1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }
}

/// One mixture node in the `t = ln(1/eps)` coordinate.
#[derive(Debug, Clone, Copy)]
pub struct QuadNode<T> {
    pub t: T,
    pub eps: T,
    /// `ln(w dt/deps)`, so that `int_0^1 f deps ~ sum exp(ln_weight) f(eps)`.
    pub ln_weight: T,
}

/// Composite rule on `t in [0, t_max]` with geometrically growing panels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub t_max: f64,
    pub panels: usize,
    pub order: usize,
    pub ratio: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { t_max: 60.0, panels: 40, order: 16, ratio: 1.1 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("quadrature t_max must be positive, got {}", self.t_max)));
        }
        if self.panels == 0 || self.order == 0 {
            return Err(Error::InvalidParameter("quadrature needs at least one panel and one node".into()));
        }
        if !(self.ratio >= 1.0) {
            return Err(Error::InvalidParameter(format!("panel ratio must be >= 1, got {}", self.ratio)));
        }
        Ok(())
    }

    /// Same range with half as many panels; used for the error estimate.
    pub fn coarser(&self) -> Self {
        let panels = (self.panels / 2).max(1);
        QuadratureSpec { panels, ratio: self.ratio.powf(self.panels as f64 / panels as f64), ..*self }
    }

    pub fn finer(&self) -> Self {
        QuadratureSpec { panels: self.panels * 2, ratio: self.ratio.sqrt(), ..*self }
    }

    pub fn panel_edges(&self) -> Vec<f64> {
        let p = self.panels;
        let r = self.ratio;
        let h0 = if (r - 1.0).abs() < 1e-15 { self.t_max / p as f64 } else { self.t_max * (r - 1.0) / (r.powi(p as i32) - 1.0) };
        let mut edges = Vec::with_capacity(p + 1);
        let mut a = 0.0;
        let mut h = h0;
        edges.push(0.0);
        for k in 0..p {
            a += h;
            h *= r;
            edges.push(if k + 1 == p { self.t_max } else { a });
        }
        edges
    }

    pub fn nodes<T: Real>(&self) -> Vec<QuadNode<T>> {
        let rule = GaussLegendre::new(self.order);
        let edges = self.panel_edges();
        let mut out = Vec::with_capacity(self.panels * self.order);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let t = mid + half * x;
                out.push(QuadNode { t: T::lit(t), eps: T::lit((-t).exp()), ln_weight: T::lit((wt * half).ln() - t) });
            }
        }
        out
    }
}

/// Result of a log-domain integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral<T> {
    pub ln_value: T,
    /// Rough relative error bound collected from the adaptive refinement.
    pub rel_err: T,
}

/// Adaptive Gauss-Legendre on `int_a^b exp(log_f(x)) dx`, in the log domain.
///
/// Global refinement: the panel with the largest error estimate is split
/// until the summed estimate drops below `rel_tol` of the total or the panel
/// budget runs out.
pub struct LogIntegrator {
    rule: GaussLegendre,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for LogIntegrator {
    fn default() -> Self {
        LogIntegrator { rule: GaussLegendre::new(16), rel_tol: 1e-11, max_panels: 4000 }
    }
}

struct Piece<T> {
    a: T,
    b: T,
    left: T,
    right: T,
    ln_value: T,
    ln_err: T,
}

impl LogIntegrator {
    fn panel<T: Real>(&self, log_f: &dyn Fn(T) -> T, a: T, b: T) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = a + half;
        let lh = half.ln();
        let vals: Vec<T> = self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(|(x, w)| {
                let v = log_f(mid + half * T::lit(*x));
                if v.is_nan() {
                    T::neg_infinity()
                } else {
                    v + lh + T::lit(w.ln())
                }
            })
            .collect();
        log_sum_exp(vals)
    }

    fn split<T: Real>(&self, log_f: &dyn Fn(T) -> T, a: T, b: T, whole: T) -> Piece<T> {
        let m = a + (b - a) / T::lit(2.0);
        if !(m > a && m < b) {
            return Piece { a, b, left: whole, right: T::neg_infinity(), ln_value: whole, ln_err: T::neg_infinity() };
        }
        let left = self.panel(log_f, a, m);
        let right = self.panel(log_f, m, b);
        let halves = log_add(left, right);
        let ln_err = if halves == T::neg_infinity() {
            whole
        } else if whole == T::neg_infinity() {
            halves
        } else {
            halves + ((whole - halves).exp() - T::one()).abs().ln()
        };
        Piece { a, b, left, right, ln_value: halves, ln_err }
    }

    /// `ln int_a^b exp(log_f)`.
    pub fn integrate<T: Real>(&self, log_f: &dyn Fn(T) -> T, a: T, b: T) -> LogIntegral<T> {
        if !(b > a) {
            return LogIntegral { ln_value: T::neg_infinity(), rel_err: T::zero() };
        }
        let ln_tol = T::lit(self.rel_tol.ln());
        let whole = self.panel(log_f, a, b);
        let mut pieces = vec![self.split(log_f, a, b, whole)];
        let totals = |ps: &[Piece<T>]| (log_sum_exp(ps.iter().map(|p| p.ln_value)), log_sum_exp(ps.iter().map(|p| p.ln_err)));
        let mut iter = 0usize;
        loop {
            if iter < 64 || iter.is_multiple_of(32) {
                let (v, e) = totals(&pieces);
                if v == T::neg_infinity() && e == T::neg_infinity() {
                    return LogIntegral { ln_value: v, rel_err: T::zero() };
                }
                if e <= v + ln_tol || pieces.len() >= self.max_panels {
                    let rel = if v == T::neg_infinity() { T::infinity() } else { (e - v).exp() };
                    return LogIntegral { ln_value: v, rel_err: rel.max(T::lit(self.rel_tol)) };
                }
            }
            iter += 1;
            // worst panel
            let (i, _) = pieces.iter().enumerate().fold((0, T::neg_infinity()), |acc, (i, p)| if p.ln_err > acc.1 { (i, p.ln_err) } else { acc });
            let p = pieces.swap_remove(i);
            if p.ln_err == T::neg_infinity() {
                pieces.push(p);
                let (v, e) = totals(&pieces);
                return LogIntegral { ln_value: v, rel_err: (e - v).exp().max(T::lit(self.rel_tol)) };
            }
            let m = p.a + (p.b - p.a) / T::lit(2.0);
            if !(m > p.a && m < p.b) {
                pieces.push(Piece { ln_err: T::neg_infinity(), ..p });
                continue;
            }
            pieces.push(self.split(log_f, p.a, m, p.left));
            pieces.push(self.split(log_f, m, p.b, p.right));
        }
    }
}

/// Integral split on windows `[b_i, b_{i+1}]` whose edges double.
#[derive(Debug, Clone)]
pub struct WindowedIntegral<T> {
    pub edges: Vec<T>,
    pub ln_masses: Vec<T>,
}

/// Window edges from `lo` to `hi`: each step goes to `max(2b, b + 1)`.
pub fn doubling_edges<T: Real>(lo: T, hi: T) -> Vec<T> {
    let mut edges = vec![lo];
    let mut b = lo;
    while b < hi {
        let next = (b * T::lit(2.0)).max(b + T::one());
        b = if next >= hi || !next.is_finite() { hi } else { next };
        edges.push(b);
    }
    edges
}

impl<T: Real> WindowedIntegral<T> {
    pub fn compute(integrator: &LogIntegrator, log_f: &dyn Fn(T) -> T, lo: T, hi: T) -> Self {
        let edges = doubling_edges(lo, hi);
        let ln_masses = edges.windows(2).map(|w| integrator.integrate(log_f, w[0], w[1]).ln_value).collect();
        WindowedIntegral { edges, ln_masses }
    }

    pub fn ln_total(&self) -> T {
        log_sum_exp(self.ln_masses.iter().copied())
    }

    /// `ln` of the mass of windows `i..`.
    pub fn ln_suffix(&self) -> Vec<T> {
        let mut out = vec![T::neg_infinity(); self.ln_masses.len() + 1];
        for i in (0..self.ln_masses.len()).rev() {
            out[i] = log_add(out[i + 1], self.ln_masses[i]);
        }
        out
    }
}

/// Verdict of an integrability test on `int^inf f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Local exponent of `f` against one iterated-log scale.
///
/// At level `m` the integrand is rewritten in the variable `l_m` (`l_0 = x`,
/// `l_{k+1} = ln l_k`) and `s_m = -d ln h_m / d ln l_m` is measured, with
/// `h_m = f * l_0 * ... * l_{m-1}`. `s_m > 1` converges like `l_m^{-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertrandExponent {
    pub level: usize,
    pub exponent: f64,
    /// `l_{m+1}` at the cutoff; the level is trusted only when it is large.
    pub scale: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEvidence {
    pub lower: f64,
    pub cutoff: f64,
    pub grown_cutoff: f64,
    pub ln_partial: f64,
    pub ln_partial_grown: f64,
    /// `(I(grown) - I(cutoff)) / I(cutoff)`.
    pub relative_increment: f64,
    pub exponents: Vec<BertrandExponent>,
    pub decisive_level: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub verdict: TailVerdict,
    pub evidence: TailEvidence,
}

#[derive(Debug, Clone, Copy)]
pub struct TailOptions<T> {
    pub lower: T,
    pub cutoff: T,
    /// The cutoff is multiplied by this for the increment check.
    pub growth: T,
    pub margin: T,
    pub increment_tol: T,
    pub reliable_scale: T,
    pub max_level: usize,
    pub step: T,
}

impl<T: Real> TailOptions<T> {
    pub fn new(lower: T) -> Self {
        let cap = T::lit(1e300).min(T::max_value() / T::lit(1e4));
        TailOptions {
            lower,
            cutoff: cap,
            growth: T::lit(10.0),
            margin: T::lit(0.1),
            increment_tol: T::lit(1e-3),
            reliable_scale: T::one(),
            max_level: 4,
            step: T::lit(1e-6),
        }
    }
}

fn bertrand_exponents<T: Real>(log_f: &dyn Fn(T) -> T, x: T, opts: &TailOptions<T>) -> Vec<BertrandExponent> {
    let mut out = Vec::new();
    // chain[k] = l_k(x)
    let mut chain = vec![x];
    for _ in 0..=opts.max_level {
        let last = *chain.last().unwrap();
        if !(last > T::zero()) {
            break;
        }
        chain.push(last.ln());
    }
    for m in 0..=opts.max_level {
        if m + 1 >= chain.len() {
            break;
        }
        let y = chain[m + 1];
        let h = opts.step * T::one().max(y.abs());
        let eval = |yy: T| -> T {
            // rebuild l_m .. l_0 from l_{m+1} = yy
            let mut ls = vec![yy];
            for _ in 0..=m {
                let v = ls.last().unwrap().exp();
                ls.push(v);
            }
            ls.reverse(); // ls[k] = l_k
            let x_p = ls[0];
            if !x_p.is_finite() {
                return T::nan();
            }
            let mut v = log_f(x_p);
            for l in ls.iter().take(m + 1).skip(1) {
                v = v + *l;
            }
            v
        };
        let s = -(eval(y + h) - eval(y - h)) / (h + h);
        let scale = y.as_f64();
        out.push(BertrandExponent { level: m, exponent: s.as_f64(), scale, reliable: s.is_finite() && y >= opts.reliable_scale });
    }
    out
}

/// Classifies `int_lower^inf exp(log_f)`. Partial integrals are taken on
/// doubling windows up to the cutoff and up to `growth * cutoff`.
pub fn analyze_tail<T: Real>(log_f: &dyn Fn(T) -> T, opts: &TailOptions<T>) -> TailReport {
    analyze_tail_shaped(log_f, log_f, opts)
}

/// As `analyze_tail`, with the local exponents read off `log_shape`, which
/// must equal `log_f` up to an additive constant. Lets callers integrate a
/// rescaled function while measuring decay on an unscaled one.
pub fn analyze_tail_shaped<T: Real>(log_f: &dyn Fn(T) -> T, log_shape: &dyn Fn(T) -> T, opts: &TailOptions<T>) -> TailReport {
    let integ = LogIntegrator::default();
    let grown = (opts.cutoff * opts.growth).min(T::max_value() / T::lit(10.0));
    let base = WindowedIntegral::compute(&integ, log_f, opts.lower, opts.cutoff);
    let extra = WindowedIntegral::compute(&integ, log_f, opts.cutoff, grown);
    let ln_i = base.ln_total();
    let ln_extra = extra.ln_total();
    let ln_g = log_add(ln_i, ln_extra);
    let rel_inc = if ln_i == T::neg_infinity() {
        if ln_extra == T::neg_infinity() {
            T::zero()
        } else {
            T::infinity()
        }
    } else {
        (ln_extra - ln_i).exp()
    };
    let exps = bertrand_exponents(log_shape, opts.cutoff, opts);
    let top = log_f(opts.cutoff);

    let mut decisive = None;
    let mut verdict = TailVerdict::Inconclusive;
    if top == T::neg_infinity() && rel_inc == T::zero() && ln_i.is_finite() {
        verdict = TailVerdict::Convergent;
    } else {
        for e in &exps {
            if !e.reliable {
                break;
            }
            let s = T::lit(e.exponent);
            if s > T::one() + opts.margin {
                decisive = Some(e.level);
                if rel_inc < opts.increment_tol && ln_i.is_finite() {
                    verdict = TailVerdict::Convergent;
                }
                break;
            }
            if s < T::one() - opts.margin {
                decisive = Some(e.level);
                verdict = TailVerdict::Divergent;
                break;
            }
        }
    }
    TailReport {
        verdict,
        evidence: TailEvidence {
            lower: opts.lower.as_f64(),
            cutoff: opts.cutoff.as_f64(),
            grown_cutoff: grown.as_f64(),
            ln_partial: ln_i.as_f64(),
            ln_partial_grown: ln_g.as_f64(),
            relative_increment: rel_inc.as_f64(),
            exponents: exps,
            decisive_level: decisive,
        },
    }
}
