//! The update operators `M_α`: median, power-mean minimizer and midrange.
//!
//! All three are exactly monotone in floating point: raising any input never
//! lowers the output. For `1 < α < ∞, α ≠ 2` the root of
//! `ψ(y) = Σ sign(y − v)|y − v|^{α−1}` is resolved on the fixed grid of
//! doubles that are multiples of `2⁻⁴⁰`: the result is the midpoint of the
//! first grid point with `ψ ≥ 0` and the last with `ψ ≤ 0`, clamped to the
//! input range. `ψ` is evaluated in a fixed order, which makes it
//! nondecreasing in `y` and nonincreasing in every `v`; both grid ends
//! inherit this.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    /// `α = 1`
    Median,
    /// `1 < α < ∞`
    Power(f64),
    /// `α = ∞`
    Midrange,
}

impl Alpha {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            Ok(Alpha::Median)
        } else if alpha == f64::INFINITY {
            Ok(Alpha::Midrange)
        } else if alpha > 1.0 && alpha.is_finite() {
            Ok(Alpha::Power(alpha))
        } else {
            Err(Error::InvalidParameter(format!(
                "alpha must lie in [1, ∞], got {alpha}"
            )))
        }
    }

    /// Accepts a number, `inf` or `infinity`.
    pub fn parse(s: &str) -> Result<Self> {
        let v = match s.trim() {
            "inf" | "infinity" | "∞" => f64::INFINITY,
            t => t
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad alpha {s:?}")))?,
        };
        Self::new(v)
    }

    pub fn value(self) -> f64 {
        match self {
            Alpha::Median => 1.0,
            Alpha::Power(a) => a,
            Alpha::Midrange => f64::INFINITY,
        }
    }

    /// `M_α(values)`; `values` is reordered in place.
    pub fn apply(self, values: &mut [f64]) -> f64 {
        match self {
            Alpha::Median => median_in_place(values),
            Alpha::Midrange => {
                let (lo, hi) = min_max(values);
                0.5 * (lo + hi)
            }
            Alpha::Power(a) if a == 2.0 => values.iter().sum::<f64>() / values.len() as f64,
            Alpha::Power(a) => power_root(values, a - 1.0),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Midrange => write!(f, "inf"),
            a => write!(f, "{}", a.value()),
        }
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

fn insertion_sort(v: &mut [f64]) {
    for i in 1..v.len() {
        let x = v[i];
        let mut j = i;
        while j > 0 && v[j - 1] > x {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = x;
    }
}

/// Median of `a_0 ≤ … ≤ a_N`: `a_{N/2}` for even `N`, otherwise the mean of
/// the two central entries.
fn median_in_place(values: &mut [f64]) -> f64 {
    if values.len() <= 32 {
        insertion_sort(values);
    } else {
        values.sort_by(f64::total_cmp);
    }
    let n = values.len() - 1;
    if n % 2 == 0 {
        values[n / 2]
    } else {
        0.5 * (values[(n - 1) / 2] + values[(n + 1) / 2])
    }
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("median input"));
    }
    Ok(median_in_place(&mut values.to_vec()))
}

pub fn m_alpha(values: &[f64], alpha: f64) -> Result<f64> {
    let a = Alpha::new(alpha)?;
    if values.is_empty() {
        return Err(Error::Empty("M_alpha input"));
    }
    Ok(a.apply(&mut values.to_vec()))
}

/// Total-order key: `x < y` iff `key(x) < key(y)` for non-NaN doubles.
fn key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b >= 0 {
        b
    } else {
        b ^ i64::MAX
    }
}

fn from_key(k: i64) -> f64 {
    if k >= 0 {
        f64::from_bits(k as u64)
    } else {
        f64::from_bits((k ^ i64::MAX) as u64)
    }
}

/// Spacing of the root grid below `GRID_BIG`; above it every double is a
/// multiple of the spacing.
const GRID_H: f64 = 1.0 / (1u64 << 40) as f64;
const GRID_BIG: f64 = 4096.0;
const GRID_BIG_STEPS: i64 = 1 << 52;

/// Order-preserving index of a grid point.
fn gkey(x: f64) -> i64 {
    if x.abs() <= GRID_BIG {
        (x / GRID_H) as i64
    } else {
        let k = GRID_BIG_STEPS + (key(x.abs()) - key(GRID_BIG));
        if x < 0.0 {
            -k
        } else {
            k
        }
    }
}

fn from_gkey(k: i64) -> f64 {
    if k.abs() <= GRID_BIG_STEPS {
        k as f64 * GRID_H
    } else {
        let x = from_key(key(GRID_BIG) + (k.abs() - GRID_BIG_STEPS));
        if k < 0 {
            -x
        } else {
            x
        }
    }
}

/// Index of the largest grid point `≤ y`.
fn gkey_floor(y: f64) -> i64 {
    if y.abs() <= GRID_BIG {
        (y / GRID_H).floor() as i64
    } else {
        gkey(y)
    }
}

fn gkey_ceil(y: f64) -> i64 {
    -gkey_floor(-y)
}

/// `ψ(y)`, summed in input order.
#[inline]
fn psi(values: &[f64], y: f64, expo: f64) -> f64 {
    let mut s = 0.0;
    if expo == 0.5 {
        for &v in values {
            let t = y - v;
            s += t.abs().sqrt().copysign(t);
        }
    } else if expo == 2.0 {
        for &v in values {
            let t = y - v;
            s += t * t.abs();
        }
    } else {
        for &v in values {
            let t = y - v;
            s += t.abs().powf(expo).copysign(t);
        }
    }
    s
}

/// `M_α` for `1 < α < ∞`; see the module notes.
fn power_root(values: &[f64], expo: f64) -> f64 {
    let (lo, hi) = min_max(values);
    let (first, last) = zero_set(values, expo);
    (0.5 * (first + last)).clamp(lo, hi)
}

fn zero_set(values: &[f64], expo: f64) -> (f64, f64) {
    let (lo, hi) = min_max(values);
    if lo == hi {
        return (lo, lo);
    }
    // Bracket between consecutive order statistics, where ψ is smooth. The
    // sorted copy only steers the search; ψ keeps the input order.
    let mut stack = [0.0f64; 16];
    let mut heap = Vec::new();
    let sorted: &mut [f64] = if values.len() <= stack.len() {
        let s = &mut stack[..values.len()];
        s.copy_from_slice(values);
        s
    } else {
        heap.extend_from_slice(values);
        &mut heap
    };
    if sorted.len() <= 32 {
        insertion_sort(sorted);
    } else {
        sorted.sort_by(f64::total_cmp);
    }
    let (mut a, mut b) = (0, sorted.len() - 1);
    let (mut fa, mut fb) = (None, None);
    while b - a > 1 {
        let m = (a + b) / 2;
        let f = psi(values, sorted[m], expo);
        if f >= 0.0 {
            b = m;
            fb = Some(f);
        } else {
            a = m;
            fa = Some(f);
        }
    }
    let y = if expo == 0.5 {
        let start = match (fa, fb) {
            (Some(fa), Some(fb)) => (fa / (fa - fb)).clamp(0.01, 0.99),
            _ => 0.5,
        };
        sqrt_halley_root(values, sorted[a], sorted[b], start)
    } else {
        let fa = fa.unwrap_or_else(|| psi(values, lo, expo));
        let fb = fb.unwrap_or_else(|| psi(values, hi, expo));
        newton_root(values, expo, (sorted[a], fa), (sorted[b], fb))
    };
    zero_set_ends(values, expo, y, lo, hi)
}

/// Safeguarded Newton for `ψ = 0` in a sign-changing bracket, stopped a few
/// ulps from the root.
fn newton_root(values: &[f64], expo: f64, (mut lo, flo): (f64, f64), (mut hi, fhi): (f64, f64)) -> f64 {
    if flo >= 0.0 {
        return lo;
    }
    // ψ carries absolute rounding error, so the stop test uses the data scale
    let tol = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let mut y = lo - flo * ((hi - lo) / (fhi - flo));
    if !(y > lo && y < hi) {
        y = 0.5 * (lo + hi);
    }
    for _ in 0..100 {
        let (f, df) = psi_slope(values, y, expo);
        if f == 0.0 {
            return y;
        }
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let step = f / df;
        if step.abs() <= tol {
            return y - step;
        }
        let mut next = y - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= tol {
            return next;
        }
        y = next;
    }
    y
}

/// Approximate root for `expo = 1/2` in `[va, vb]` between consecutive
/// order statistics. With `y = va + L u²/D`, `D = u² + (1 − u)²`, the terms
/// at the two ends become `√L u/√D` and `−√L (1 − u)/√D`, so the function
/// of `u` is smooth and Halley's iteration converges cubically.
fn sqrt_halley_root(values: &[f64], va: f64, vb: f64, start: f64) -> f64 {
    let l = vb - va;
    let sl = l.sqrt();
    // after a step this small the cubic rate leaves an error well inside one
    // grid cell; the exact search absorbs the rest
    let tol = 1e-5 * l;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut u = start;
    for _ in 0..60 {
        let w = 1.0 - u;
        let id = 1.0 / (u * u + w * w);
        let isd = id.sqrt();
        let i3 = isd * id;
        let dd = 4.0 * u - 2.0;
        let y = va + l * u * u * id;
        let y1 = 2.0 * l * u * w * id * id;
        let y2 = 2.0 * l * ((1.0 - 2.0 * u) - 2.0 * u * w * dd * id) * id * id;
        let (mut f, mut f1, mut f2) = (0.0, 0.0, 0.0);
        for &v in values {
            if v == va {
                f += sl * u * isd;
                f1 += sl * w * i3;
                f2 -= sl * (1.0 + 1.5 * w * dd * id) * i3;
            } else if v == vb {
                f -= sl * w * isd;
                f1 += sl * u * i3;
                f2 += sl * (1.0 - 1.5 * u * dd * id) * i3;
            } else {
                let t = y - v;
                let r = t.abs().sqrt();
                let ir = 1.0 / r;
                f += r.copysign(t);
                let g1 = 0.5 * ir;
                f1 += g1 * y1;
                f2 += (-0.25 * ir * ir * ir).copysign(t) * y1 * y1 + g1 * y2;
            }
        }
        if f == 0.0 {
            return y;
        }
        if f > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let step = 2.0 * f * f1 / (2.0 * f1 * f1 - f * f2);
        let mut next = u - step;
        let accepted = next > lo && next < hi;
        if !accepted {
            next = 0.5 * (lo + hi);
        }
        u = next;
        if accepted && (step * y1).abs() <= tol {
            break;
        }
    }
    va + l * u * u / (u * u + (1.0 - u) * (1.0 - u))
}

/// `ψ(y)` and `ψ'(y)`.
#[inline]
fn psi_slope(values: &[f64], y: f64, expo: f64) -> (f64, f64) {
    let (mut s, mut ds) = (0.0, 0.0);
    for &v in values {
        let t = y - v;
        let m = t.abs();
        if expo == 0.5 {
            let r = m.sqrt();
            s += r.copysign(t);
            ds += 0.5 / r;
        } else if expo == 2.0 {
            s += t * m;
            ds += 2.0 * m;
        } else {
            let p = m.powf(expo);
            s += p.copysign(t);
            ds += expo * p / m;
        }
    }
    (s, ds)
}

/// Sign of `ψ` on grid indices, remembering recent evaluations.
struct SignProbe<'a> {
    values: &'a [f64],
    expo: f64,
    seen: [(i64, i8); 4],
    next: usize,
}

impl SignProbe<'_> {
    fn sign(&mut self, k: i64) -> i8 {
        if let Some(&(_, c)) = self.seen.iter().find(|e| e.0 == k) {
            return c;
        }
        let f = psi(self.values, from_gkey(k), self.expo);
        let c = if f > 0.0 {
            1
        } else if f < 0.0 {
            -1
        } else {
            0
        };
        self.seen[self.next] = (k, c);
        self.next = (self.next + 1) % self.seen.len();
        c
    }

    /// Last key from `start` toward `limit` on which `keep` holds, given
    /// that it holds at `start`; `keep` is monotone along the walk.
    fn gallop(&mut self, start: i64, limit: i64, keep: impl Fn(i8) -> bool) -> i64 {
        // indices of opposite signs can differ by more than i64 holds
        let (start, limit) = (start as i128, limit as i128);
        let dir = (limit - start).signum();
        let mut good = start;
        let mut step = 1i128;
        let mut bad = loop {
            let k = good + step * dir;
            if (k - limit) * dir >= 0 {
                if keep(self.sign(limit as i64)) {
                    return limit as i64;
                }
                break limit;
            }
            if keep(self.sign(k as i64)) {
                good = k;
                step *= 2;
            } else {
                break k;
            }
        };
        while (bad - good).abs() > 1 {
            let m = good + (bad - good) / 2;
            if keep(self.sign(m as i64)) {
                good = m;
            } else {
                bad = m;
            }
        }
        good as i64
    }
}

/// First grid point with `ψ ≥ 0` and last with `ψ ≤ 0`, searched outward
/// from a guess `y` within the grid hull of `[lo, hi]`.
fn zero_set_ends(values: &[f64], expo: f64, y: f64, lo: f64, hi: f64) -> (f64, f64) {
    let mut p = SignProbe {
        values,
        expo,
        seen: [(i64::MIN, 0); 4],
        next: 0,
    };
    let (klo, khi) = (gkey_floor(lo), gkey_ceil(hi));
    let k0 = gkey_floor(y.clamp(lo, hi));
    let (first, last) = match p.sign(k0) {
        0 => (p.gallop(k0, klo, |c| c >= 0), p.gallop(k0, khi, |c| c <= 0)),
        -1 => {
            let below = p.gallop(k0, khi, |c| c < 0);
            let first = (below + 1).min(khi);
            let last = if p.sign(first) > 0 { below } else { p.gallop(first, khi, |c| c <= 0) };
            (first, last)
        }
        _ => {
            let above = p.gallop(k0, klo, |c| c > 0);
            let last = (above - 1).max(klo);
            let first = if p.sign(last) < 0 { above } else { p.gallop(last, klo, |c| c >= 0) };
            (first, last)
        }
    };
    (from_gkey(first), from_gkey(last))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_examples() {
        assert_eq!(median(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(median(&[10.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }

    #[test]
    fn median_minimizes_absolute_deviation() {
        let a = [0.3, -1.2, 4.0, 2.2, 2.5, -0.7];
        let m = median(&a).unwrap();
        let cost = |y: f64| a.iter().map(|v| (y - v).abs()).sum::<f64>();
        let best = (-2000..=5000)
            .map(|i| cost(i as f64 * 1e-3))
            .fold(f64::INFINITY, f64::min);
        assert!(cost(m) <= best + 1e-12);
    }

    #[test]
    fn m_alpha_examples() {
        assert_eq!(m_alpha(&[0.0, 4.0], 2.0).unwrap(), 2.0);
        assert_eq!(m_alpha(&[1.0, 5.0, 2.0], f64::INFINITY).unwrap(), 3.0);
        assert_eq!(m_alpha(&[-0.7, 0.7], 1.5).unwrap(), 0.0);
        assert!(m_alpha(&[1.0], 0.5).is_err());
    }

    #[test]
    fn power_root_is_a_minimizer() {
        let v = [0.1, 0.25, -3.0, 7.5, 0.2];
        for a in [1.3, 1.5, 3.0, 6.0] {
            let y = m_alpha(&v, a).unwrap();
            let cost = |y: f64| v.iter().map(|x| (y - x).abs().powf(a)).sum::<f64>();
            assert!(cost(y) <= cost(y + 1e-7) && cost(y) <= cost(y - 1e-7), "alpha {a}");
            let (first, last) = zero_set(&v, a - 1.0);
            assert!(psi(&v, first, a - 1.0) >= 0.0);
            assert!(psi(&v, from_gkey(gkey(first) - 1), a - 1.0) < 0.0);
            assert!(psi(&v, last, a - 1.0) <= 0.0);
            assert!(psi(&v, from_gkey(gkey(last) + 1), a - 1.0) > 0.0);
            assert!((y - first).abs() <= 1e-12);
        }
    }

    #[test]
    fn grid_index_round_trip() {
        for x in [-1e300, -5000.0, -4096.0, -1.5, -GRID_H, 0.0, 3.0 * GRID_H, 4095.0, 4096.0, 4096.0 + 2.0 * GRID_H, 7e10] {
            assert_eq!(from_gkey(gkey(x)), x);
        }
        // the grid steps by GRID_H on both sides of GRID_BIG
        for s in [-1.0, 1.0] {
            let b = s * GRID_BIG;
            assert_eq!((gkey(b + GRID_H) - gkey(b)).abs(), 1);
            assert_eq!((gkey(b) - gkey(b - GRID_H)).abs(), 1);
        }
        assert_eq!(gkey_floor(0.3 * GRID_H), 0);
        assert_eq!(gkey_ceil(0.3 * GRID_H), 1);
    }

    #[test]
    fn key_order() {
        let xs = [-3.5, -1e-300, -0.0, 0.0, 1e-300, 2.0, 7e10];
        for w in xs.windows(2) {
            assert!(key(w[0]) < key(w[1]));
            assert_eq!(from_key(key(w[1])), w[1]);
        }
    }
}
