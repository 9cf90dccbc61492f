//! The product formula
//!
//! ```text
//! p(J(p) − J(q)) = (1 − p q⁻¹) ∏_{i,j ≥ 1} (1 − pⁱqʲ)^{c(ij)}
//! ```
//!
//! checked coefficient by coefficient. The right side is assembled as
//! `exp(Σ c(ij) log(1 − pⁱqʲ))` so that huge exponents cost nothing extra.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::modular::{J_series, ModularError};
use crate::series::{BiSeries, Rational, SeriesError, UniSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("window bounds must be at least 1 (got pmax {0}, qmax {1})")]
    BadWindow(i64, i64),
    #[error(transparent)]
    Modular(#[from] ModularError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone)]
pub struct ProductReport {
    pub pmax: i64,
    pub qmax: i64,
    pub lhs: BiSeries,
    pub rhs: BiSeries,
    /// `((i, j), lhs, rhs)` for every differing coefficient, row-major.
    pub mismatches: Vec<((i64, i64), Rational, Rational)>,
}

impl ProductReport {
    pub fn passes(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// `p·J(p) − p·J(q)` on `p ≤ pmax`, `q ≤ qmax`, from the coefficients of `j`.
pub fn product_lhs(c: &UniSeries, pmax: i64, qmax: i64) -> BiSeries {
    let coeff = |n: i64| c.coeff(n).expect("J known on the window");
    let left = (-1..pmax).map(|n| ((n + 1, 0), coeff(n)));
    let right = (-1..=qmax).map(|n| ((1, n), -coeff(n)));
    let mut out = BiSeries::from_terms(pmax, -1, qmax, left);
    out = out
        .add(&BiSeries::from_terms(pmax, -1, qmax, right))
        .expect("same window");
    out
}

/// `(1 − p q⁻¹) exp(Σ_{i,j≥1} c(ij) log(1 − pⁱqʲ))` on `p ≤ pmax`, `q ≤ qmax`.
pub fn product_rhs(c: &UniSeries, pmax: i64, qmax: i64) -> Result<BiSeries, ProductError> {
    // the factor (1 − p/q) lowers q-degrees by one, so F is needed to qmax + 1
    let fq = qmax + 1;
    let mut log = BiSeries::zero(pmax, 0, fq);
    for i in 1..=pmax {
        for j in 1..=fq {
            let cij = c.coeff(i * j).expect("J known to pmax * (qmax + 1)");
            if cij.is_zero() {
                continue;
            }
            // log(1 − m) = −Σ m^k / k
            let terms = (1..)
                .take_while(|k| k * i <= pmax && k * j <= fq)
                .map(|k| ((k * i, k * j), -&cij / Rational::from_integer(BigInt::from(k))));
            log = log.add(&BiSeries::from_terms(pmax, 0, fq, terms))?;
        }
    }
    let f = log.exp()?;
    let factor = BiSeries::from_terms(
        pmax,
        -1,
        fq + 1,
        [((0, 0), Rational::one()), ((1, -1), -Rational::one())],
    );
    Ok(factor.mul(&f).truncate(pmax, qmax))
}

/// Compares both sides on `[0, pmax] × [−pmax, qmax]`.
pub fn verify_product(pmax: i64, qmax: i64) -> Result<ProductReport, ProductError> {
    if pmax < 1 || qmax < 1 {
        return Err(ProductError::BadWindow(pmax, qmax));
    }
    let c = J_series(pmax * (qmax + 1))?;
    let lhs = product_lhs(&c, pmax, qmax);
    let rhs = product_rhs(&c, pmax, qmax)?;
    // both sides vanish below q^-1; widen to the reported window
    let widen = |s: &BiSeries| BiSeries::zero(pmax, -pmax, qmax).add(s).expect("nested windows");
    let (lhs, rhs) = (widen(&lhs), widen(&rhs));
    let mismatches = lhs.mismatches(&rhs);
    Ok(ProductReport {
        pmax,
        qmax,
        lhs,
        rhs,
        mismatches,
    })
}
