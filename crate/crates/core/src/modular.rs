//! q-expansions of the classical modular forms and of eta quotients.
//!
//! `j` is computed twice, as `E₄³/Δ` and as `E₆²/Δ + 1728`, and the two
//! expansions must agree on the whole window.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::divisor_power_sum;
use crate::series::{rat, Rational, SeriesError, UniSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModularError {
    #[error("Eisenstein series of weight {0} is not supported (use 4 or 6)")]
    UnsupportedWeight(u32),
    #[error("fractional leading exponent: sum of k*e is {0}, not a multiple of 24")]
    FractionalLeadingExponent(i64),
    #[error("E4^3/Delta and E6^2/Delta + 1728 disagree at q^{0}")]
    CrossCheck(i64),
    #[error("order {0} is below the supported minimum {1}")]
    OrderTooLow(i64, i64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `∏_{n≥1} (1 − q^{kn})^e` together with the prefactor exponent `k·e`,
/// counted in units of 1/24.
#[derive(Debug, Clone)]
pub struct EtaPower {
    pub series: UniSeries,
    pub offset_24ths: i64,
}

/// Expands `η(kτ)^e` without its fractional `q^{ke/24}` prefactor, up to `qᵒʳᵈᵉʳ`.
pub fn dedekind_eta_power(k: u32, e: i64, order: i64) -> Result<EtaPower, ModularError> {
    assert!(k >= 1, "eta scale must be positive");
    if order < 0 {
        return Err(ModularError::OrderTooLow(order, 0));
    }
    let offset_24ths = k as i64 * e;
    let m = order / k as i64;
    // log ∏(1 − qⁿ)^e = −e Σ σ₁(n)/n qⁿ
    let log = UniSeries::from_terms(
        0,
        m,
        (1..=m).map(|n| {
            let sigma = divisor_power_sum(n as u64, 1);
            (n, Rational::new(-sigma * e, n.into()))
        }),
    );
    let series = log.exp(m)?.substitute_power(k).truncate(order);
    Ok(EtaPower { series, offset_24ths })
}

/// `E₄ = 1 + 240 Σ σ₃(n) qⁿ` or `E₆ = 1 − 504 Σ σ₅(n) qⁿ`.
pub fn eisenstein(weight: u32, order: i64) -> Result<UniSeries, ModularError> {
    let (scale, power) = match weight {
        4 => (240, 3),
        6 => (-504, 5),
        w => return Err(ModularError::UnsupportedWeight(w)),
    };
    if order < 0 {
        return Err(ModularError::OrderTooLow(order, 0));
    }
    let terms = std::iter::once((0, Rational::one()))
        .chain((1..=order).map(|n| (n, Rational::from_integer(divisor_power_sum(n as u64, power) * scale))));
    Ok(UniSeries::from_terms(0, order, terms))
}

/// `Δ = q ∏ (1 − qⁿ)²⁴` up to `qᵒʳᵈᵉʳ`.
pub fn delta(order: i64) -> Result<UniSeries, ModularError> {
    if order < 1 {
        return Err(ModularError::OrderTooLow(order, 1));
    }
    Ok(dedekind_eta_power(1, 24, order - 1)?.series.shift(1))
}

/// The j-invariant `q⁻¹ + 744 + 196884q + …` up to `qᵒʳᵈᵉʳ`.
pub fn j_series(order: i64) -> Result<UniSeries, ModularError> {
    if order < -1 {
        return Err(ModularError::OrderTooLow(order, -1));
    }
    let inv_delta = delta(order + 2)?.invert(order)?;
    let e4 = eisenstein(4, order + 1)?;
    let e6 = eisenstein(6, order + 1)?;
    let j = e4.pow(3).mul(&inv_delta);
    let check = e6
        .pow(2)
        .mul(&inv_delta)
        .add(&UniSeries::monomial(0, rat(1728), order))?;
    if let Some(n) = j.first_mismatch(&check) {
        return Err(ModularError::CrossCheck(n));
    }
    Ok(j.truncate(order))
}

/// `J = j − 744`, the normalized Hauptmodul with vanishing constant term.
#[allow(non_snake_case)]
pub fn J_series(order: i64) -> Result<UniSeries, ModularError> {
    let j = j_series(order)?;
    if order < 0 {
        return Ok(j);
    }
    Ok(j.sub(&UniSeries::monomial(0, rat(744), order))?)
}

/// `coeff · ∏_k η(kτ)^{e_k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaMonomial {
    pub coeff: Rational,
    pub factors: BTreeMap<u32, i64>,
}

impl EtaMonomial {
    pub fn new<I: IntoIterator<Item = (u32, i64)>>(coeff: Rational, factors: I) -> Self {
        let mut map = BTreeMap::new();
        for (k, e) in factors {
            *map.entry(k).or_insert(0) += e;
        }
        EtaMonomial { coeff, factors: map }
    }

    /// Leading q-exponent `Σ k·e_k / 24`.
    pub fn leading_exponent(&self) -> Result<i64, ModularError> {
        let total: i64 = self.factors.iter().map(|(&k, &e)| k as i64 * e).sum();
        if total % 24 != 0 {
            return Err(ModularError::FractionalLeadingExponent(total));
        }
        Ok(total / 24)
    }

    pub fn expand(&self, order: i64) -> Result<UniSeries, ModularError> {
        let lead = self.leading_exponent()?;
        let inner = order - lead;
        if inner < 0 {
            return Ok(UniSeries::zero(order, order));
        }
        let mut acc = UniSeries::one(inner);
        for (&k, &e) in &self.factors {
            if e != 0 {
                acc = acc.mul(&dedekind_eta_power(k, e, inner)?.series);
            }
        }
        Ok(acc.scale(&self.coeff).shift(lead))
    }
}

/// A Hauptmodul candidate: a sum of eta monomials, optionally with its
/// constant term removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaRecipe {
    pub monomials: Vec<EtaMonomial>,
    pub normalize: bool,
}

impl EtaRecipe {
    /// The normalized eta quotient `(η(τ)/η(nτ))^e`.
    pub fn quotient(n: u32, e: i64) -> Self {
        EtaRecipe {
            monomials: vec![EtaMonomial::new(Rational::one(), [(1, e), (n, -e)])],
            normalize: true,
        }
    }
}

/// Sums the monomials up to `qᵒʳᵈᵉʳ` and, if requested, drops the constant term.
pub fn expand_recipe(recipe: &EtaRecipe, order: i64) -> Result<UniSeries, ModularError> {
    let mut total: Option<UniSeries> = None;
    for m in &recipe.monomials {
        let s = m.expand(order)?;
        total = Some(match total {
            None => s,
            Some(t) => t.add(&s)?,
        });
    }
    let mut total = total.unwrap_or_else(|| UniSeries::zero(0, order.max(0)));
    if recipe.normalize && order >= 0 {
        let c0 = total.coeff(0).unwrap_or_else(Rational::zero);
        total = total.sub(&UniSeries::monomial(0, c0, order))?;
    }
    Ok(total)
}

/// Checks the Hauptmodul normalization `q⁻¹ + 0 + O(q)`.
pub fn is_normalized_hauptmodul(s: &UniSeries) -> bool {
    s.valuation() == Some(-1) && s.coeff(-1) == Some(Rational::one()) && s.coeff(0).is_none_or(|c| c.is_zero())
}

/// Integer coefficients of `s` on `[from, to]`; `None` if any is unknown or
/// fractional.
pub fn integer_coefficients(s: &UniSeries, from: i64, to: i64) -> Option<Vec<BigInt>> {
    (from..=to).map(|n| s.int_coeff(n)).collect()
}
