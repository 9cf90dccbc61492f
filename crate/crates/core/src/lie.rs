//! Root data of the monster Lie algebra.
//!
//! The root lattice is Π₁,₁ = ℤ² with the Lorentzian form
//! `⟨(m,n),(m′,n′)⟩ = −(mn′ + nm′)`. The simple roots are `(1,−1)` with
//! multiplicity one and `(1,n)`, `n ≥ 1`, with multiplicity `c(n)`; the root
//! space of `(m,n)` has dimension `c(mn)`. Below the `gl₂` part the algebra
//! is free on `U = ⊕ V♮_{m+n} p^m q^n`, so the dimensions `c(mn)` must agree
//! with the free Lie algebra dimensions computed from `U`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{as_integer, mobius};
use crate::series::{BiSeries, Rational, SeriesError, UniSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("nmax must be at least -1, got {0}")]
    BadRootBound(i64),
    #[error("coefficient c({needed}) requested but the series is only known to q^{known}")]
    InsufficientOrder { needed: i64, known: i64 },
    #[error("graded pieces need m, n >= 1 (got {0}x{1})")]
    DegenerateGrading(i64, i64),
    #[error("free Lie algebra dimension at ({0},{1}) is not a non-negative integer: {2}")]
    NonIntegral(i64, i64, Rational),
    #[error("matrix size must be positive")]
    EmptyMatrix,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// An element `(m, n)` of Π₁,₁.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVector {
    pub m: i64,
    pub n: i64,
}

impl LatticeVector {
    pub const fn new(m: i64, n: i64) -> Self {
        LatticeVector { m, n }
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// The Lorentzian pairing on Π₁,₁.
pub fn gram(a: LatticeVector, b: LatticeVector) -> i64 {
    -(a.m * b.n + a.n * b.m)
}

/// `c(n)` as an integer; zero for `n = 0` and `n < −1`.
fn c_at(c: &UniSeries, n: i64) -> Result<BigInt, LieError> {
    if n < -1 || n == 0 {
        return Ok(BigInt::zero());
    }
    let value = c.coeff(n).ok_or(LieError::InsufficientOrder {
        needed: n,
        known: c.hi(),
    })?;
    as_integer(&value).ok_or(LieError::NonIntegral(1, n, value))
}

/// Simple roots in catalog order, each with its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleRootList {
    pub entries: Vec<(LatticeVector, BigInt)>,
}

impl SimpleRootList {
    /// The root occupying row `index` of the multiplicity-expanded list.
    pub fn root_at(&self, index: u64) -> Option<LatticeVector> {
        let mut remaining = BigInt::from(index);
        for (root, mult) in &self.entries {
            if &remaining < mult {
                return Some(*root);
            }
            remaining -= mult;
        }
        None
    }

    pub fn multiplicity(&self, root: LatticeVector) -> BigInt {
        self.entries
            .iter()
            .find(|(r, _)| *r == root)
            .map(|(_, m)| m.clone())
            .unwrap_or_default()
    }

    pub fn total_multiplicity(&self) -> BigInt {
        self.entries.iter().map(|(_, m)| m).sum()
    }
}

impl fmt::Display for SimpleRootList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (root, mult)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{root}x{mult}")?;
        }
        Ok(())
    }
}

/// `(1,−1)` once, then `(1,n)` with multiplicity `c(n)` for `1 ≤ n ≤ nmax`.
pub fn simple_roots(nmax: i64, c: &UniSeries) -> Result<SimpleRootList, LieError> {
    if nmax < -1 {
        return Err(LieError::BadRootBound(nmax));
    }
    let mut entries = vec![(LatticeVector::new(1, -1), BigInt::one())];
    for n in 1..=nmax {
        entries.push((LatticeVector::new(1, n), c_at(c, n)?));
    }
    Ok(SimpleRootList { entries })
}

/// A leading square block of the matrix `B` of simple-root inner products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BMatrix {
    /// The simple root of each row.
    pub roots: Vec<LatticeVector>,
    pub entries: Vec<Vec<i64>>,
}

impl BMatrix {
    pub fn size(&self) -> usize {
        self.roots.len()
    }

    pub fn to_rational(&self) -> Vec<Vec<Rational>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|&x| Rational::from_integer(x.into())).collect())
            .collect()
    }
}

/// Gram matrix of the first `count` simple roots, multiplicities expanded.
pub fn build_b_with(count: usize, c: &UniSeries) -> Result<BMatrix, LieError> {
    if count == 0 {
        return Err(LieError::EmptyMatrix);
    }
    let mut roots = Vec::with_capacity(count);
    roots.push(LatticeVector::new(1, -1));
    let mut n = 1;
    while roots.len() < count {
        let mult = c_at(c, n)?;
        let take = mult.min(BigInt::from(count - roots.len()));
        let take = usize::try_from(take).expect("bounded by count");
        roots.extend(std::iter::repeat_n(LatticeVector::new(1, n), take));
        n += 1;
    }
    let entries = roots
        .iter()
        .map(|&a| roots.iter().map(|&b| gram(a, b)).collect())
        .collect();
    Ok(BMatrix { roots, entries })
}

/// [`build_b_with`] on the J coefficients, expanded as far as needed.
pub fn build_b(count: usize) -> Result<BMatrix, LieError> {
    let mut order = 2;
    loop {
        let c = crate::modular::J_series(order).expect("J expansion");
        match build_b_with(count, &c) {
            Err(LieError::InsufficientOrder { .. }) => order *= 2,
            other => return other,
        }
    }
}

/// Block form of `B`: one representative entry per pair of simple roots
/// `(1,a)`, `(1,b)` for `a, b ∈ {−1, 1, 2, …, nmax}`.
pub fn b_blocks(nmax: i64) -> Vec<(i64, Vec<i64>)> {
    let labels: Vec<i64> = std::iter::once(-1).chain(1..=nmax).collect();
    labels
        .iter()
        .map(|&a| {
            let row = labels
                .iter()
                .map(|&b| gram(LatticeVector::new(1, a), LatticeVector::new(1, b)))
                .collect();
            (a, row)
        })
        .collect()
}

/// Outcome of checking conditions B1–B3 on a square matrix.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BConditionsReport {
    /// Pairs `(i, j)` with `a_ij ≠ a_ji`.
    pub b1_violations: Vec<(usize, usize)>,
    /// Off-diagonal pairs with `a_ij > 0`.
    pub b2_violations: Vec<(usize, usize)>,
    /// Pairs with `a_ii > 0` and `2a_ij / a_ii ∉ ℤ`.
    pub b3_violations: Vec<(usize, usize)>,
}

impl BConditionsReport {
    pub fn b1(&self) -> bool {
        self.b1_violations.is_empty()
    }
    pub fn b2(&self) -> bool {
        self.b2_violations.is_empty()
    }
    pub fn b3(&self) -> bool {
        self.b3_violations.is_empty()
    }
    pub fn holds(&self) -> bool {
        self.b1() && self.b2() && self.b3()
    }
}

pub fn check_b_conditions(a: &[Vec<Rational>]) -> BConditionsReport {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n), "matrix must be square");
    let mut report = BConditionsReport::default();
    let two = Rational::from_integer(2.into());
    for i in 0..n {
        for j in 0..n {
            if a[i][j] != a[j][i] {
                report.b1_violations.push((i, j));
            }
            if i != j && a[i][j].is_positive() {
                report.b2_violations.push((i, j));
            }
            if a[i][i].is_positive() && !(&two * &a[i][j] / &a[i][i]).is_integer() {
                report.b3_violations.push((i, j));
            }
        }
    }
    report
}

/// `dim 𝔪_(m,n)`: `c(mn)` away from the origin, 2 at `(0,0)`.
pub fn root_multiplicity(m: i64, n: i64, c: &UniSeries) -> Result<BigInt, LieError> {
    if (m, n) == (0, 0) {
        return Ok(BigInt::from(2));
    }
    c_at(c, m * n)
}

/// Bigraded dimensions indexed by `(m, n)`, `m, n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GradedDims {
    pub dims: BTreeMap<(i64, i64), BigInt>,
}

impl GradedDims {
    pub fn get(&self, m: i64, n: i64) -> Option<&BigInt> {
        self.dims.get(&(m, n))
    }
}

/// Character of `U = H₁(𝔲⁻)`: `Σ_{m,n≥1} c(m+n−1) pᵐqⁿ` on `[0,mmax]×[0,nmax]`.
pub fn generator_character(mmax: i64, nmax: i64, c: &UniSeries) -> Result<BiSeries, LieError> {
    let mut err = None;
    let u = BiSeries::from_fn(mmax, 0, nmax, |m, n| {
        if m == 0 || n == 0 {
            return Rational::zero();
        }
        match c_at(c, m + n - 1) {
            Ok(v) => Rational::from_integer(v),
            Err(e) => {
                err.get_or_insert(e);
                Rational::zero()
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(u),
    }
}

/// Graded dimensions of the free Lie algebra on a bigraded space with
/// character `u`, by the Möbius-inverted logarithm
/// `Σ dim L_d x^d = −Σ_k μ(k)/k · log(1 − u(xᵏ))`.
pub fn free_lie_dims(u: &BiSeries) -> Result<GradedDims, LieError> {
    let (mmax, nmax) = (u.pmax(), u.qmax());
    if mmax < 1 || nmax < 1 {
        return Err(LieError::DegenerateGrading(mmax, nmax));
    }
    let mut total = BiSeries::zero(mmax, 0, nmax);
    for k in 1..=mmax.min(nmax) {
        let mu = mobius(k as u64);
        if mu == 0 {
            continue;
        }
        let log = u.substitute_power(k as u32).truncate(mmax, nmax).log1m()?;
        total = total.add(&log.scale(&Rational::new((-mu).into(), k.into())))?;
    }
    let mut dims = BTreeMap::new();
    for m in 1..=mmax {
        for n in 1..=nmax {
            let value = total.coefficient(m, n).expect("inside window");
            match as_integer(&value) {
                Some(v) if !v.is_negative() => {
                    dims.insert((m, n), v);
                }
                _ => return Err(LieError::NonIntegral(m, n, value)),
            }
        }
    }
    Ok(GradedDims { dims })
}

/// Dimensions of `L(U)` on `[1,mmax]×[1,nmax]` with `dim U_(m,n) = c(m+n−1)`.
pub fn witt_dims(mmax: i64, nmax: i64, c: &UniSeries) -> Result<GradedDims, LieError> {
    if mmax < 1 || nmax < 1 {
        return Err(LieError::DegenerateGrading(mmax, nmax));
    }
    free_lie_dims(&generator_character(mmax, nmax, c)?)
}

fn binomial(n: &BigInt, t: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..t {
        acc *= n - BigInt::from(i);
    }
    acc / crate::arith::factorial(t)
}

/// `∏_d (1 − x^d)^{dim_d}` expanded with exact binomial coefficients on the
/// window of `dims`.
pub fn free_lie_product(dims: &GradedDims, mmax: i64, nmax: i64) -> BiSeries {
    let mut acc = BiSeries::one(mmax, nmax);
    for (&(m, n), dim) in &dims.dims {
        if dim.is_zero() || m > mmax || n > nmax {
            continue;
        }
        let tmax = (mmax / m).min(nmax / n) as u64;
        let factor = BiSeries::from_terms(
            mmax,
            0,
            nmax,
            (0..=tmax).map(|t| {
                let sign = if t % 2 == 0 { 1 } else { -1 };
                (
                    (m * t as i64, n * t as i64),
                    Rational::from_integer(binomial(dim, t) * sign),
                )
            }),
        );
        acc = acc.mul(&factor);
    }
    acc
}

/// Comparison of `dim L(U)_(m,n)` with `dim 𝔪_(m,n) = c(mn)`.
#[derive(Debug, Clone)]
pub struct WittCheck {
    pub mmax: i64,
    pub nmax: i64,
    pub free_dims: GradedDims,
    pub root_dims: GradedDims,
    /// Cells where the free Lie dimension differs from `c(mn)`, row-major.
    pub mismatches: Vec<(i64, i64)>,
    /// Cells where `∏(1 − x^d)^{dim_d}` differs from `1 − ch U`.
    pub oracle_mismatches: Vec<(i64, i64)>,
}

impl WittCheck {
    pub fn passes(&self) -> bool {
        self.mismatches.is_empty() && self.oracle_mismatches.is_empty()
    }
}

pub fn witt_check(mmax: i64, nmax: i64, c: &UniSeries) -> Result<WittCheck, LieError> {
    let u = generator_character(mmax, nmax, c)?;
    let free_dims = free_lie_dims(&u)?;
    let mut root_dims = GradedDims::default();
    let mut mismatches = Vec::new();
    for m in 1..=mmax {
        for n in 1..=nmax {
            let r = root_multiplicity(m, n, c)?;
            if free_dims.get(m, n) != Some(&r) {
                mismatches.push((m, n));
            }
            root_dims.dims.insert((m, n), r);
        }
    }
    let product = free_lie_product(&free_dims, mmax, nmax);
    let expected = BiSeries::one(mmax, nmax).sub(&u)?;
    let oracle_mismatches = product
        .mismatches(&expected)
        .into_iter()
        .map(|(cell, _, _)| cell)
        .collect();
    Ok(WittCheck {
        mmax,
        nmax,
        free_dims,
        root_dims,
        mismatches,
        oracle_mismatches,
    })
}
