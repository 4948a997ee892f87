//! Log-domain helpers and iterated logarithms.

use crate::scalar::Real;

/// `ln(sum exp(v))` over the iterator. Empty input and all `-inf` give `-inf`.
pub fn log_sum_exp<T: Real, I: IntoIterator<Item = T>>(values: I) -> T
where
    I::IntoIter: Clone,
{
    let it = values.into_iter();
    let m = it.clone().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() || !m.is_finite() {
        return m;
    }
    let s: T = it.map(|v| (v - m).exp()).sum();
    m + s.ln()
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(exp(a) - exp(b))` for `a >= b`; `-inf` when they are equal.
pub fn log_sub<T: Real>(a: T, b: T) -> T {
    if b == T::neg_infinity() {
        return a;
    }
    if b >= a {
        return T::neg_infinity();
    }
    a + (-(b - a).exp()).ln_1p()
}

/// `ln(1 + eps * x)`, with `-inf` at (and beyond) the bankruptcy boundary.
pub fn ln_growth<T: Real>(eps: T, x: T) -> T {
    let z = eps * x;
    if z <= -T::one() {
        T::neg_infinity()
    } else {
        z.ln_1p()
    }
}

/// Returned when an iterated logarithm leaves its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IteratedLogDomain {
    /// Depth whose value fell at or below the required floor.
    pub depth: usize,
}

/// Chain `[l_1, l_2, ..., l_depth]` with `l_1 = first` and `l_{k+1} = ln l_k`.
///
/// Every entry must be strictly above `floor` (use `0` for "defined", `1` for
/// "next log positive"). Reports the first depth that fails.
pub fn log_chain<T: Real>(first: T, depth: usize, floor: T) -> Result<Vec<T>, IteratedLogDomain> {
    let mut out = Vec::with_capacity(depth);
    let mut v = first;
    for k in 1..=depth {
        if k > 1 {
            v = v.ln();
        }
        if !(v > floor) {
            return Err(IteratedLogDomain { depth: k });
        }
        out.push(v);
    }
    Ok(out)
}

/// `ln_k(x)` for a value given as `ln x`: `ln_1 = ln_x`, `ln_{k+1} = ln(ln_k)`.
/// Returns `None` once an intermediate is non-positive before the last step.
pub fn iterated_ln_from_log<T: Real>(ln_x: T, k: usize) -> Option<T> {
    let mut v = ln_x;
    for _ in 1..k {
        if !(v > T::zero()) {
            return None;
        }
        v = v.ln();
    }
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

/// `exp` applied `k` times.
pub fn iterated_exp<T: Real>(x: T, k: usize) -> T {
    (0..k).fold(x, |v, _| v.exp())
}
