use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{rat, Rational, SeriesError};

/// Output sizes above this are multiplied in parallel.
const PAR_MUL_THRESHOLD: usize = 96;

/// Truncated Laurent series `Σ_{lo ≤ n ≤ hi} a_n qⁿ` with exact coefficients.
///
/// Coefficients below `lo` are zero, coefficients above `hi` are unknown.
#[derive(Clone, Debug)]
pub struct UniSeries {
    lo: i64,
    hi: i64,
    coeffs: BTreeMap<i64, Rational>,
}

impl UniSeries {
    /// The zero series known on `[lo, hi]`.
    pub fn zero(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty window [{lo}, {hi}]");
        UniSeries {
            lo,
            hi,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a series from `(exponent, coefficient)` pairs. Terms above `hi`
    /// are truncated away.
    pub fn from_terms<I>(lo: i64, hi: i64, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        let mut s = Self::zero(lo, hi);
        for (e, c) in terms {
            assert!(e >= lo, "term q^{e} below window start {lo}");
            if e <= hi {
                s.add_term(e, c);
            }
        }
        s
    }

    /// Dense constructor: `coeffs[i]` is the coefficient of `q^(lo + i)`,
    /// and the window ends at `hi`.
    pub fn from_ints(lo: i64, hi: i64, coeffs: &[i64]) -> Self {
        Self::from_terms(lo, hi, coeffs.iter().enumerate().map(|(i, &c)| (lo + i as i64, rat(c))))
    }

    /// `c·q^e` known up to `hi`.
    pub fn monomial(e: i64, c: Rational, hi: i64) -> Self {
        Self::from_terms(e.min(hi), hi, [(e, c)])
    }

    pub fn one(hi: i64) -> Self {
        Self::monomial(0, Rational::one(), hi)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    /// Coefficient of `qⁿ`, or `None` when `n` lies above the window.
    pub fn coeff(&self, n: i64) -> Option<Rational> {
        if n > self.hi {
            None
        } else {
            Some(self.coeffs.get(&n).cloned().unwrap_or_else(Rational::zero))
        }
    }

    /// Integer coefficient of `qⁿ`; `None` above the window or for a
    /// non-integral value.
    pub fn int_coeff(&self, n: i64) -> Option<BigInt> {
        self.coeff(n).and_then(|c| crate::arith::as_integer(&c))
    }

    /// Non-zero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    /// Lowest exponent with a non-zero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    fn add_term(&mut self, e: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    fn dense(&self, from: i64, to: i64) -> Vec<Rational> {
        (from..=to)
            .map(|e| self.coeffs.get(&e).cloned().unwrap_or_else(Rational::zero))
            .collect()
    }

    /// Sum on the common window. The windows must overlap.
    pub fn add(&self, other: &UniSeries) -> Result<UniSeries, SeriesError> {
        if self.lo.max(other.lo) > self.hi.min(other.hi) {
            return Err(SeriesError::IncompatibleWindows);
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi.min(other.hi);
        let mut out = Self::zero(lo, hi);
        for (e, c) in self.terms().chain(other.terms()) {
            if e <= hi {
                out.add_term(e, c.clone());
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &UniSeries) -> Result<UniSeries, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> UniSeries {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> UniSeries {
        let mut out = Self::zero(self.lo, self.hi);
        for (e, c) in self.terms() {
            out.add_term(e, c * k);
        }
        out
    }

    /// Multiplies by `q^by`.
    pub fn shift(&self, by: i64) -> UniSeries {
        UniSeries {
            lo: self.lo + by,
            hi: self.hi + by,
            coeffs: self.coeffs.iter().map(|(&e, c)| (e + by, c.clone())).collect(),
        }
    }

    /// Lowers the truncation order to `hi` (no-op if already lower).
    pub fn truncate(&self, hi: i64) -> UniSeries {
        let hi = hi.min(self.hi).max(self.lo);
        UniSeries {
            lo: self.lo,
            hi,
            coeffs: self.coeffs.range(..=hi).map(|(&e, c)| (e, c.clone())).collect(),
        }
    }

    /// Truncated Cauchy product, exact on
    /// `[a.lo + b.lo, min(a.hi + b.lo, b.hi + a.lo)]`.
    pub fn mul(&self, other: &UniSeries) -> UniSeries {
        let lo = self.lo + other.lo;
        let hi = (self.hi + other.lo).min(other.hi + self.lo);
        let a = self.dense(self.lo, self.hi);
        let b = other.dense(other.lo, other.hi);
        let cell = |e: i64| -> Rational {
            // a index i ↔ exponent self.lo + i, b index j ↔ other.lo + j
            let target = (e - lo) as usize;
            let mut acc = Rational::zero();
            for i in 0..=target.min(a.len() - 1) {
                let j = target - i;
                if j >= b.len() || a[i].is_zero() || b[j].is_zero() {
                    continue;
                }
                acc += &a[i] * &b[j];
            }
            acc
        };
        let n = (hi - lo + 1) as usize;
        let values: Vec<Rational> = if n > PAR_MUL_THRESHOLD {
            (lo..=hi).into_par_iter().map(cell).collect()
        } else {
            (lo..=hi).map(cell).collect()
        };
        Self::from_terms(lo, hi, (lo..=hi).zip(values))
    }

    /// Raises to a positive integer power.
    pub fn pow(&self, k: u32) -> UniSeries {
        assert!(k >= 1, "pow needs k >= 1");
        (1..k).fold(self.clone(), |acc, _| acc.mul(self))
    }

    /// Multiplicative inverse up to `order`.
    ///
    /// The leading coefficient is the first non-zero coefficient; the result
    /// starts at `q^(-v)` and is exact up to `min(order, hi − 2v)`.
    pub fn invert(&self, order: i64) -> Result<UniSeries, SeriesError> {
        let v = self.valuation().ok_or(SeriesError::NonInvertible)?;
        let lead = self.coeffs[&v].clone();
        let hi = order.min(self.hi - 2 * v);
        if hi < -v {
            return Err(SeriesError::EmptyWindow);
        }
        let len = (hi + v + 1) as usize;
        let unit: Vec<Rational> = self.dense(v, v + len as i64 - 1).iter().map(|c| c / &lead).collect();
        let mut inv: Vec<Rational> = Vec::with_capacity(len);
        inv.push(Rational::one());
        for n in 1..len {
            let mut acc = Rational::zero();
            for k in 1..=n {
                if !unit[k].is_zero() {
                    acc += &unit[k] * &inv[n - k];
                }
            }
            inv.push(-acc);
        }
        let lead_inv = lead.recip();
        Ok(Self::from_terms(
            -v,
            hi,
            inv.into_iter().enumerate().map(|(n, c)| (n as i64 - v, c * &lead_inv)),
        ))
    }

    fn positive_part(&self, err: SeriesError) -> Result<(), SeriesError> {
        match self.valuation() {
            Some(v) if v <= 0 => Err(err),
            _ => Ok(()),
        }
    }

    /// `log(1 − a)` up to `order`, for `a` without constant or negative terms.
    pub fn log1m(&self, order: i64) -> Result<UniSeries, SeriesError> {
        self.positive_part(SeriesError::LogOfNonUnit)?;
        let hi = order.min(self.hi);
        if hi < 0 {
            return Err(SeriesError::EmptyWindow);
        }
        let n = hi as usize;
        // b = 1 − a, and n·f_n = n·b_n − Σ_{k<n} k·f_k·b_{n−k}
        let b: Vec<Rational> = self.dense(0, hi).into_iter().map(|c| -c).collect();
        let mut f = vec![Rational::zero(); n + 1];
        for m in 1..=n {
            let mut acc = &b[m] * rat(m as i64);
            for k in 1..m {
                if !f[k].is_zero() && !b[m - k].is_zero() {
                    acc -= &f[k] * &b[m - k] * rat(k as i64);
                }
            }
            f[m] = acc / rat(m as i64);
        }
        Ok(Self::from_terms(
            0,
            hi,
            f.into_iter().enumerate().map(|(e, c)| (e as i64, c)),
        ))
    }

    /// `exp(a)` up to `order`, for `a` without constant or negative terms.
    pub fn exp(&self, order: i64) -> Result<UniSeries, SeriesError> {
        self.positive_part(SeriesError::ExpOfNonPositive)?;
        let hi = order.min(self.hi);
        if hi < 0 {
            return Err(SeriesError::EmptyWindow);
        }
        let n = hi as usize;
        // n·e_n = Σ_{k=1..n} k·a_k·e_{n−k}
        let a = self.dense(0, hi);
        let mut e = vec![Rational::zero(); n + 1];
        e[0] = Rational::one();
        for m in 1..=n {
            let mut acc = Rational::zero();
            for k in 1..=m {
                if !a[k].is_zero() && !e[m - k].is_zero() {
                    acc += &a[k] * &e[m - k] * rat(k as i64);
                }
            }
            e[m] = acc / rat(m as i64);
        }
        Ok(Self::from_terms(
            0,
            hi,
            e.into_iter().enumerate().map(|(x, c)| (x as i64, c)),
        ))
    }

    /// The substitution `q ↦ q^k`. The window grows to `k·hi + k − 1`,
    /// since the exponents strictly between multiples of `k` are zero.
    pub fn substitute_power(&self, k: u32) -> UniSeries {
        assert!(k >= 1, "substitute_power needs k >= 1");
        let k = k as i64;
        UniSeries {
            lo: self.lo * k,
            hi: self.hi * k + k - 1,
            coeffs: self.coeffs.iter().map(|(&e, c)| (e * k, c.clone())).collect(),
        }
    }

    /// First exponent, within the common known range, where the two series
    /// differ.
    pub fn first_mismatch(&self, other: &UniSeries) -> Option<i64> {
        let lo = self.lo.min(other.lo);
        let hi = self.hi.min(other.hi);
        (lo..=hi).find(|&e| self.coeff(e) != other.coeff(e))
    }
}

/// Window-aware equality: series agree on every exponent both windows know.
impl PartialEq for UniSeries {
    fn eq(&self, other: &Self) -> bool {
        self.first_mismatch(other).is_none()
    }
}

impl fmt::Display for UniSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*q")?,
                _ => write!(f, "{c}*q^{e}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(q^{})", self.hi + 1)
    }
}
