//! Exact counts of merger patterns.
//!
//! `T(J)` counts all non-crossing patterns on `2J` levels and `P(J)` the
//! centrally symmetric ones. Each count is available through a recurrence, a
//! closed form, and a generating-function series so the three can be checked
//! against each other.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Arbitrary-precision nonnegative count.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn one() -> Self {
        Self(BigUint::one())
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        u64::try_from(&self.0).ok()
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        Self(BigUint::from(v))
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        Self(v)
    }
}

impl PartialEq<u64> for BigCount {
    fn eq(&self, other: &u64) -> bool {
        self.0 == BigUint::from(*other)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Truncated power series; `coefficients[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    pub coefficients: Vec<BigCount>,
}

impl Series {
    /// Truncation length.
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficient(&self, k: usize) -> Option<&BigCount> {
        self.coefficients.get(k)
    }
}

/// Memo tables for the two recurrences. Tables only grow; every entry is
/// final once written.
#[derive(Debug, Clone)]
pub struct CountTable {
    t: Vec<BigUint>,
    p: Vec<BigUint>,
}

impl Default for CountTable {
    fn default() -> Self {
        Self::new()
    }
}

impl CountTable {
    pub fn new() -> Self {
        Self {
            t: vec![BigUint::one()],
            p: vec![BigUint::one()],
        }
    }

    /// `T(J) = sum_{i<J} T(i) T(J-1-i)`: level 1 joins level `2i + 2`,
    /// splitting the rest into independent inner and outer groups.
    pub fn t(&mut self, j: usize) -> BigCount {
        while self.t.len() <= j {
            let n = self.t.len();
            let next = (0..n).fold(BigUint::zero(), |acc, i| {
                acc + &self.t[i] * &self.t[n - 1 - i]
            });
            self.t.push(next);
        }
        BigCount(self.t[j].clone())
    }

    /// `P(J) = P(J-1) + sum_{i < floor(J/2)} T(i) P(J-2i-2)`.
    pub fn p(&mut self, j: usize) -> BigCount {
        if j >= 2 {
            self.t(j / 2 - 1);
        }
        while self.p.len() <= j {
            let n = self.p.len();
            let mut next = self.p[n - 1].clone();
            for i in 0..n / 2 {
                next += &self.t[i] * &self.p[n - 2 * i - 2];
            }
            self.p.push(next);
        }
        BigCount(self.p[j].clone())
    }
}

pub fn count_t_recurrence(j: usize) -> BigCount {
    CountTable::new().t(j)
}

pub fn count_p_recurrence(j: usize) -> BigCount {
    CountTable::new().p(j)
}

fn factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Catalan number `(2J)! / ((J+1)! J!)`.
pub fn count_t_closed(j: usize) -> BigCount {
    BigCount(factorial(2 * j) / (factorial(j + 1) * factorial(j)))
}

/// `binomial(J, floor(J/2))`.
pub fn count_p_closed(j: usize) -> BigCount {
    BigCount(binomial(j, j / 2))
}

pub(crate) fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    // Each partial product is itself a binomial, so the division is exact.
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn convolve_truncated(a: &[BigUint], b: &[BigUint], len: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (k, bk) in b.iter().enumerate().take(len - i) {
            out[i + k] += ai * bk;
        }
    }
    out
}

/// Coefficients `0..order` of `f(x) = sum T(J) x^J`, from the fixed point
/// `f = 1 + x f^2`. Each pass fixes one more coefficient.
pub fn series_f(order: usize) -> Series {
    let order = order.max(1);
    let mut f = vec![BigUint::one()];
    while f.len() < order {
        let len = f.len() + 1;
        let sq = convolve_truncated(&f, &f, len - 1);
        let mut next = Vec::with_capacity(len);
        next.push(BigUint::one());
        next.extend(sq);
        f = next;
    }
    Series {
        coefficients: f.into_iter().map(BigCount).collect(),
    }
}

/// Coefficients `0..order` of `g(x) = sum P(J) x^J`, solving
/// `g - 1 = x g + x^2 f(x^2) g` term by term.
pub fn series_g(order: usize) -> Series {
    let order = order.max(1);
    // h = x + x^2 f(x^2); f(x^2) is f with zeros interleaved.
    let f = series_f(order.saturating_sub(1) / 2 + 1);
    let mut h = vec![BigUint::zero(); order];
    if order > 1 {
        h[1] = BigUint::one();
    }
    for (k, c) in f.coefficients.iter().enumerate() {
        let idx = 2 * k + 2;
        if idx < order {
            h[idx] += &c.0;
        }
    }
    // g = 1 + h g, with h[0] = 0, so g[n] only needs g[0..n].
    let mut g: Vec<BigUint> = Vec::with_capacity(order);
    g.push(BigUint::one());
    for n in 1..order {
        let gn = (1..=n).fold(BigUint::zero(), |acc, k| acc + &h[k] * &g[n - k]);
        g.push(gn);
    }
    Series {
        coefficients: g.into_iter().map(BigCount).collect(),
    }
}
