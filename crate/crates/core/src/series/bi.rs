use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{rat, Rational, SeriesError};

/// Truncated series `Σ a_{ij} pⁱ qʲ` over the rectangle
/// `0 ≤ i ≤ pmax`, `qmin ≤ j ≤ qmax`.
///
/// `p` exponents are never negative. Coefficients with `j < qmin` are zero;
/// coefficients with `i > pmax` or `j > qmax` are unknown.
#[derive(Clone, Debug)]
pub struct BiSeries {
    pmax: i64,
    qmin: i64,
    qmax: i64,
    coeffs: BTreeMap<(i64, i64), Rational>,
}

impl BiSeries {
    pub fn zero(pmax: i64, qmin: i64, qmax: i64) -> Self {
        assert!(pmax >= 0 && qmin <= qmax, "empty window {pmax}x[{qmin}, {qmax}]");
        BiSeries {
            pmax,
            qmin,
            qmax,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(pmax: i64, qmax: i64) -> Self {
        Self::from_terms(pmax, 0, qmax, [((0, 0), Rational::one())])
    }

    /// Builds a series from `((i, j), coefficient)` pairs, dropping terms
    /// above the window.
    pub fn from_terms<I>(pmax: i64, qmin: i64, qmax: i64, terms: I) -> Self
    where
        I: IntoIterator<Item = ((i64, i64), Rational)>,
    {
        let mut s = Self::zero(pmax, qmin, qmax);
        for ((i, j), c) in terms {
            assert!(i >= 0 && j >= qmin, "term p^{i} q^{j} below window");
            if i <= pmax && j <= qmax {
                s.add_term(i, j, c);
            }
        }
        s
    }

    /// Tabulates `f(i, j)` over the whole window.
    pub fn from_fn<F>(pmax: i64, qmin: i64, qmax: i64, mut f: F) -> Self
    where
        F: FnMut(i64, i64) -> Rational,
    {
        let mut s = Self::zero(pmax, qmin, qmax);
        for i in 0..=pmax {
            for j in qmin..=qmax {
                s.add_term(i, j, f(i, j));
            }
        }
        s
    }

    pub fn pmax(&self) -> i64 {
        self.pmax
    }

    pub fn qmin(&self) -> i64 {
        self.qmin
    }

    pub fn qmax(&self) -> i64 {
        self.qmax
    }

    /// Coefficient of `pⁱqʲ`, or `None` outside the known range.
    pub fn coefficient(&self, i: i64, j: i64) -> Option<Rational> {
        if i > self.pmax || j > self.qmax {
            None
        } else {
            Some(self.coeffs.get(&(i, j)).cloned().unwrap_or_else(Rational::zero))
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), &Rational)> {
        self.coeffs.iter().map(|(&k, c)| (k, c))
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    fn add_term(&mut self, i: i64, j: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry((i, j)).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn add(&self, other: &BiSeries) -> Result<BiSeries, SeriesError> {
        if self.qmin.max(other.qmin) > self.qmax.min(other.qmax) {
            return Err(SeriesError::IncompatibleWindows);
        }
        let pmax = self.pmax.min(other.pmax);
        let qmin = self.qmin.min(other.qmin);
        let qmax = self.qmax.min(other.qmax);
        let mut out = Self::zero(pmax, qmin, qmax);
        for ((i, j), c) in self.terms().chain(other.terms()) {
            if i <= pmax && j <= qmax {
                out.add_term(i, j, c.clone());
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &BiSeries) -> Result<BiSeries, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> BiSeries {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> BiSeries {
        let mut out = Self::zero(self.pmax, self.qmin, self.qmax);
        for ((i, j), c) in self.terms() {
            out.add_term(i, j, c * k);
        }
        out
    }

    /// Restricts to a smaller window (bounds only ever shrink).
    pub fn truncate(&self, pmax: i64, qmax: i64) -> BiSeries {
        let pmax = pmax.min(self.pmax);
        let qmax = qmax.min(self.qmax).max(self.qmin);
        BiSeries {
            pmax,
            qmin: self.qmin,
            qmax,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&(i, j), _)| i <= pmax && j <= qmax)
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
        }
    }

    /// Truncated product, exact on `p ≤ min(pmax)` and
    /// `qmin_a + qmin_b ≤ j ≤ min(qmax_a + qmin_b, qmax_b + qmin_a)`.
    pub fn mul(&self, other: &BiSeries) -> BiSeries {
        let pmax = self.pmax.min(other.pmax);
        let qmin = self.qmin + other.qmin;
        let qmax = (self.qmax + other.qmin).min(other.qmax + self.qmin);
        let mut out = Self::zero(pmax, qmin, qmax);
        for (&(i1, j1), c1) in &self.coeffs {
            if i1 > pmax {
                break;
            }
            for (&(i2, j2), c2) in &other.coeffs {
                if i1 + i2 > pmax {
                    break;
                }
                if j1 + j2 <= qmax {
                    out.add_term(i1 + i2, j1 + j2, c1 * c2);
                }
            }
        }
        out
    }

    /// Positive integer power.
    pub fn pow(&self, k: u32) -> BiSeries {
        assert!(k >= 1, "pow needs k >= 1");
        (1..k).fold(self.clone(), |acc, _| acc.mul(self))
    }

    fn check_positive(&self, err: SeriesError) -> Result<(), SeriesError> {
        if self.coeffs.keys().any(|&(i, j)| j < 0 || (i, j) == (0, 0)) {
            Err(err)
        } else {
            Ok(())
        }
    }

    /// Dense row-major table of the non-negative quadrant `[0, pmax]×[0, qmax]`.
    fn quadrant(&self) -> Vec<Vec<Rational>> {
        (0..=self.pmax)
            .map(|i| {
                (0..=self.qmax)
                    .map(|j| self.coeffs.get(&(i, j)).cloned().unwrap_or_else(Rational::zero))
                    .collect()
            })
            .collect()
    }

    fn from_quadrant(pmax: i64, qmax: i64, cells: Vec<Vec<Rational>>) -> BiSeries {
        let mut out = Self::zero(pmax, 0, qmax);
        for (i, row) in cells.into_iter().enumerate() {
            for (j, c) in row.into_iter().enumerate() {
                out.add_term(i as i64, j as i64, c);
            }
        }
        out
    }

    /// `log(1 − a)` for `a` supported on `i, j ≥ 0` without constant term.
    ///
    /// Uses the Euler operator `E = p∂_p + q∂_q`, which scales the
    /// coefficient of `pⁱqʲ` by `i + j`: from `b·E(log b) = E b` with
    /// `b = 1 − a`.
    pub fn log1m(&self) -> Result<BiSeries, SeriesError> {
        self.check_positive(SeriesError::LogOfNonUnit)?;
        if self.qmax < 0 {
            return Err(SeriesError::EmptyWindow);
        }
        let b: Vec<Vec<Rational>> = self
            .quadrant()
            .into_iter()
            .map(|r| r.into_iter().map(|c| -c).collect())
            .collect();
        let (np, nq) = (self.pmax as usize, self.qmax as usize);
        let mut f = vec![vec![Rational::zero(); nq + 1]; np + 1];
        for i in 0..=np {
            for j in 0..=nq {
                if i + j == 0 {
                    continue;
                }
                let mut acc = &b[i][j] * rat((i + j) as i64);
                for u in 0..=i {
                    for v in 0..=j {
                        if u + v == 0 || (u, v) == (i, j) {
                            continue;
                        }
                        if f[u][v].is_zero() || b[i - u][j - v].is_zero() {
                            continue;
                        }
                        acc -= &f[u][v] * &b[i - u][j - v] * rat((u + v) as i64);
                    }
                }
                f[i][j] = acc / rat((i + j) as i64);
            }
        }
        Ok(Self::from_quadrant(self.pmax, self.qmax, f))
    }

    /// `exp(a)` for `a` supported on `i, j ≥ 0` without constant term.
    pub fn exp(&self) -> Result<BiSeries, SeriesError> {
        self.check_positive(SeriesError::ExpOfNonPositive)?;
        if self.qmax < 0 {
            return Err(SeriesError::EmptyWindow);
        }
        let a = self.quadrant();
        let (np, nq) = (self.pmax as usize, self.qmax as usize);
        let mut e = vec![vec![Rational::zero(); nq + 1]; np + 1];
        e[0][0] = Rational::one();
        for i in 0..=np {
            for j in 0..=nq {
                if i + j == 0 {
                    continue;
                }
                let mut acc = Rational::zero();
                for u in 0..=i {
                    for v in 0..=j {
                        if u + v == 0 || a[u][v].is_zero() || e[i - u][j - v].is_zero() {
                            continue;
                        }
                        acc += &a[u][v] * &e[i - u][j - v] * rat((u + v) as i64);
                    }
                }
                e[i][j] = acc / rat((i + j) as i64);
            }
        }
        Ok(Self::from_quadrant(self.pmax, self.qmax, e))
    }

    /// The substitution `p ↦ pᵏ, q ↦ qᵏ`.
    pub fn substitute_power(&self, k: u32) -> BiSeries {
        assert!(k >= 1, "substitute_power needs k >= 1");
        let k = k as i64;
        BiSeries {
            pmax: self.pmax * k + k - 1,
            qmin: self.qmin * k,
            qmax: self.qmax * k + k - 1,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(i, j), c)| ((i * k, j * k), c.clone()))
                .collect(),
        }
    }

    /// Every cell of the common known window where the two series differ,
    /// in row-major order, with both values.
    pub fn mismatches(&self, other: &BiSeries) -> Vec<((i64, i64), Rational, Rational)> {
        let pmax = self.pmax.min(other.pmax);
        let qmin = self.qmin.min(other.qmin);
        let qmax = self.qmax.min(other.qmax);
        let mut out = Vec::new();
        for i in 0..=pmax {
            for j in qmin..=qmax {
                let a = self.coefficient(i, j).unwrap();
                let b = other.coefficient(i, j).unwrap();
                if a != b {
                    out.push(((i, j), a, b));
                }
            }
        }
        out
    }
}

/// Window-aware equality on the common known window.
impl PartialEq for BiSeries {
    fn eq(&self, other: &Self) -> bool {
        self.mismatches(other).is_empty()
    }
}

impl fmt::Display for BiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for ((i, j), c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}*p^{i}*q^{j}")?;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " [p<={}, {}<=q<={}]", self.pmax, self.qmin, self.qmax)
    }
}
