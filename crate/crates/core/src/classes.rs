//! Class tables, McKay–Thompson coefficient families and the Euler–Poincaré
//! identity at the level of traces.
//!
//! Adams operations act on class functions by `(Ψᵏf)(g) = f(gᵏ)` and on the
//! grading variables by `p ↦ pᵏ`, `q ↦ qᵏ`. Traced at `g`, the identity
//!
//! ```text
//! Σ_k (1/k) Ψᵏ(𝔲⁻) = Σ_k (1/k) Uᵏ,
//!   𝔲⁻ = Σ_{m,n>0} c(mn) pᵐqⁿ,   U = Σ_{m,n>0} c(m+n−1) pᵐqⁿ
//! ```
//!
//! is what [`verify_ep`] checks coefficient by coefficient.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::modular::{self, EtaMonomial, EtaRecipe, ModularError};
use crate::series::{BiSeries, Rational, SeriesError, UniSeries};

pub type ClassId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("class {0} declared twice")]
    DuplicateClass(String),
    #[error("class {0} must have positive order")]
    BadOrder(String),
    #[error("table is not closed under power maps: {class}^{k} is undefined")]
    NotPowerClosed { class: String, k: u32 },
    #[error("table needs exactly one identity class (found {0})")]
    IdentityCount(usize),
    #[error("identity class {0} must have order 1")]
    IdentityOrder(String),
    #[error("the identity class {0} expands as J and cannot carry eta lines")]
    IdentityRecipe(String),
    #[error("seed index must be at least 1 (got {class} {n})")]
    BadSeedIndex { class: String, n: i64 },
    #[error("series for class {0} is not normalized as q^-1 + 0 + O(q)")]
    NotNormalized(String),
    #[error("series for class {class} has a non-integral coefficient at q^{n}")]
    NonIntegral { class: String, n: i64 },
    #[error("missing coefficients: {}", format_missing(.0))]
    Missing(Vec<(String, i64)>),
    #[error("W must have no constant term and no negative q powers")]
    NotPositive,
    #[error(transparent)]
    Modular(#[from] ModularError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn format_missing(list: &[(String, i64)]) -> String {
    list.iter()
        .map(|(c, n)| format!("{c}({n})"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub name: String,
    pub order: u32,
}

/// Where a class's McKay–Thompson series comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesSource<'a> {
    /// The identity class: `J = j − 744`.
    J,
    Recipe(&'a EtaRecipe),
    /// Only seed values are available.
    SeedsOnly,
}

/// Conjugacy classes with power maps, seed coefficients and eta recipes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    classes: Vec<ClassInfo>,
    identity: Option<ClassId>,
    power: BTreeMap<(ClassId, u32), ClassId>,
    seeds: BTreeMap<(ClassId, i64), BigInt>,
    recipes: BTreeMap<ClassId, EtaRecipe>,
}

impl Default for ClassTable {
    fn default() -> Self {
        Self::new()
    }
}

impl ClassTable {
    pub fn new() -> Self {
        ClassTable {
            classes: Vec::new(),
            identity: None,
            power: BTreeMap::new(),
            seeds: BTreeMap::new(),
            recipes: BTreeMap::new(),
        }
    }

    pub fn add_class(&mut self, name: &str, order: u32) -> Result<ClassId, ClassError> {
        if self.id(name).is_some() {
            return Err(ClassError::DuplicateClass(name.to_string()));
        }
        if order == 0 {
            return Err(ClassError::BadOrder(name.to_string()));
        }
        self.classes.push(ClassInfo {
            name: name.to_string(),
            order,
        });
        Ok(self.classes.len() - 1)
    }

    pub fn set_identity(&mut self, g: ClassId) {
        self.identity = Some(g);
    }

    /// Records `gᵏ = h` explicitly.
    pub fn set_power(&mut self, g: ClassId, k: u32, h: ClassId) {
        self.power.insert((g, k), h);
    }

    pub fn set_seed(&mut self, g: ClassId, n: i64, value: BigInt) -> Result<(), ClassError> {
        if n < 1 {
            return Err(ClassError::BadSeedIndex {
                class: self.name(g).to_string(),
                n,
            });
        }
        self.seeds.insert((g, n), value);
        Ok(())
    }

    pub fn clear_seeds(&mut self) {
        self.seeds.clear();
    }

    /// Appends a monomial to the class's recipe. Table recipes are always
    /// normalized.
    pub fn add_eta_monomial(&mut self, g: ClassId, monomial: EtaMonomial) {
        self.recipes
            .entry(g)
            .or_insert_with(|| EtaRecipe {
                monomials: Vec::new(),
                normalize: true,
            })
            .monomials
            .push(monomial);
    }

    pub fn set_recipe(&mut self, g: ClassId, recipe: EtaRecipe) {
        self.recipes.insert(g, recipe);
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn ids(&self) -> std::ops::Range<ClassId> {
        0..self.classes.len()
    }

    pub fn id(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn require_id(&self, name: &str) -> Result<ClassId, ClassError> {
        self.id(name).ok_or_else(|| ClassError::UnknownClass(name.to_string()))
    }

    pub fn name(&self, g: ClassId) -> &str {
        &self.classes[g].name
    }

    pub fn order(&self, g: ClassId) -> u32 {
        self.classes[g].order
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    pub fn identity(&self) -> Option<ClassId> {
        self.identity
    }

    pub fn explicit_powers(&self) -> &BTreeMap<(ClassId, u32), ClassId> {
        &self.power
    }

    pub fn seeds(&self) -> &BTreeMap<(ClassId, i64), BigInt> {
        &self.seeds
    }

    pub fn recipes(&self) -> &BTreeMap<ClassId, EtaRecipe> {
        &self.recipes
    }

    /// The class of `gᵏ`.
    ///
    /// Explicit entries win, first for `k` itself and then for `k mod ord(g)`.
    /// Otherwise `k ≡ 1` gives `g` and `k ≡ 0` gives the identity.
    pub fn power(&self, g: ClassId, k: u32) -> Result<ClassId, ClassError> {
        assert!(k >= 1, "power maps are defined for k >= 1");
        if let Some(&h) = self.power.get(&(g, k)) {
            return Ok(h);
        }
        let order = self.order(g);
        let r = k % order;
        if let Some(&h) = self.power.get(&(g, r)) {
            return Ok(h);
        }
        match (r, self.identity) {
            (0, Some(e)) => Ok(e),
            (1, _) => Ok(g),
            _ => Err(ClassError::NotPowerClosed {
                class: self.name(g).to_string(),
                k,
            }),
        }
    }

    pub fn source(&self, g: ClassId) -> SeriesSource<'_> {
        if Some(g) == self.identity {
            SeriesSource::J
        } else if let Some(r) = self.recipes.get(&g) {
            SeriesSource::Recipe(r)
        } else {
            SeriesSource::SeedsOnly
        }
    }

    /// Structural checks every loadable table satisfies: one identity class
    /// of order one, recipes only on non-identity classes, and `gᵏ` resolves
    /// for every class and every `1 ≤ k ≤ ord(g)`.
    pub fn validate(&self) -> Result<(), ClassError> {
        let e = self.identity.ok_or(ClassError::IdentityCount(0))?;
        if self.order(e) != 1 {
            return Err(ClassError::IdentityOrder(self.name(e).to_string()));
        }
        if self.recipes.contains_key(&e) {
            return Err(ClassError::IdentityRecipe(self.name(e).to_string()));
        }
        for g in self.ids() {
            for k in 1..=self.order(g) {
                self.power(g, k)?;
            }
        }
        Ok(())
    }

    /// Consistency of the power maps with class orders. Violations are
    /// reported, not rejected, so that deliberately corrupted tables can
    /// still be run through the verifiers.
    pub fn power_map_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in self.ids() {
            let order = self.order(g);
            if let Ok(h) = self.power(g, 1) {
                if h != g {
                    out.push(format!("{}^1 = {} is not {}", self.name(g), self.name(h), self.name(g)));
                }
            }
            for k in 1..=order {
                let Ok(h) = self.power(g, k) else { continue };
                let expected = order / k.gcd(&order);
                if self.order(h) != expected {
                    out.push(format!(
                        "{}^{k} = {} has order {}, expected {expected}",
                        self.name(g),
                        self.name(h),
                        self.order(h)
                    ));
                }
                for l in 1..=order {
                    let (Ok(a), Ok(b)) = (self.power(h, l), self.power(g, k * l)) else {
                        continue;
                    };
                    if a != b {
                        out.push(format!(
                            "({}^{k})^{l} = {} but {}^{} = {}",
                            self.name(g),
                            self.name(a),
                            self.name(g),
                            k * l,
                            self.name(b)
                        ));
                    }
                }
            }
        }
        out
    }

    /// Expands a class's source series to `order` (no seed overrides).
    pub fn expand_source(&self, g: ClassId, order: i64) -> Result<Option<UniSeries>, ClassError> {
        let series = match self.source(g) {
            SeriesSource::J => modular::J_series(order)?,
            SeriesSource::Recipe(r) => modular::expand_recipe(r, order)?,
            SeriesSource::SeedsOnly => return Ok(None),
        };
        if !modular::is_normalized_hauptmodul(&series.truncate(order.max(0))) {
            return Err(ClassError::NotNormalized(self.name(g).to_string()));
        }
        Ok(Some(series))
    }

    /// Seed values used by the solver: explicit `seed` entries, completed at
    /// `n ∈ {1, 2, 3, 5}` from the class's own series when it has one.
    pub fn solver_seeds(&self) -> Result<BTreeMap<(ClassId, i64), BigInt>, ClassError> {
        let mut seeds = self.seeds.clone();
        for g in self.ids() {
            if let Some(series) = self.expand_source(g, 5)? {
                for n in [1, 2, 3, 5] {
                    if let std::collections::btree_map::Entry::Vacant(e) = seeds.entry((g, n)) {
                        let v = series.int_coeff(n).ok_or_else(|| ClassError::NonIntegral {
                            class: self.name(g).to_string(),
                            n,
                        })?;
                        e.insert(v);
                    }
                }
            }
        }
        Ok(seeds)
    }
}

/// McKay–Thompson coefficients `c_g(n)` for `−1 ≤ n ≤ order`, with unknown
/// slots left empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientFamily {
    table: ClassTable,
    order: i64,
    values: Vec<Vec<Option<BigInt>>>,
}

impl CoefficientFamily {
    /// A family with only `c_g(−1) = 1` and `c_g(0) = 0` known.
    pub fn blank(table: &ClassTable, order: i64) -> Self {
        assert!(order >= 0, "family order must be non-negative");
        let width = (order + 2) as usize;
        let values = table
            .ids()
            .map(|_| {
                let mut col = vec![None; width];
                col[0] = Some(BigInt::one());
                col[1] = Some(BigInt::zero());
                col
            })
            .collect();
        CoefficientFamily {
            table: table.clone(),
            order,
            values,
        }
    }

    pub fn table(&self) -> &ClassTable {
        &self.table
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    /// `c_g(n)`: zero below −1, `None` if unknown or beyond the order.
    pub fn get(&self, g: ClassId, n: i64) -> Option<BigInt> {
        if n < -1 {
            return Some(BigInt::zero());
        }
        if n > self.order {
            return None;
        }
        self.values[g][(n + 1) as usize].clone()
    }

    pub fn get_ref(&self, g: ClassId, n: i64) -> Option<&BigInt> {
        if n < -1 || n > self.order {
            return None;
        }
        self.values[g][(n + 1) as usize].as_ref()
    }

    pub fn is_known(&self, g: ClassId, n: i64) -> bool {
        n < -1 || self.get_ref(g, n).is_some()
    }

    pub fn set(&mut self, g: ClassId, n: i64, value: BigInt) {
        assert!((-1..=self.order).contains(&n), "index {n} outside family range");
        self.values[g][(n + 1) as usize] = Some(value);
    }

    pub fn clear(&mut self, g: ClassId, n: i64) {
        self.values[g][(n + 1) as usize] = None;
    }

    /// Unknown indices `1 ≤ n ≤ upto` for class `g`.
    pub fn unknowns(&self, g: ClassId, upto: i64) -> Vec<i64> {
        (1..=upto.min(self.order)).filter(|&n| !self.is_known(g, n)).collect()
    }

    /// The class's series on `[−1, order]` if every slot is known.
    pub fn series(&self, g: ClassId) -> Option<UniSeries> {
        let terms: Option<Vec<(i64, Rational)>> = (-1..=self.order)
            .map(|n| self.get(g, n).map(|v| (n, Rational::from_integer(v))))
            .collect();
        terms.map(|t| UniSeries::from_terms(-1, self.order, t))
    }

    /// Restricts every column to `n ≤ order`.
    pub fn truncated(&self, order: i64) -> Self {
        let order = order.min(self.order);
        let mut out = self.clone();
        out.order = order;
        for col in &mut out.values {
            col.truncate((order + 2) as usize);
        }
        out
    }

    fn require(&self, g: ClassId, n: i64, missing: &mut BTreeSet<(ClassId, i64)>) -> Rational {
        match self.get(g, n) {
            Some(v) => Rational::from_integer(v),
            None => {
                missing.insert((g, n));
                Rational::zero()
            }
        }
    }

    fn missing_error(&self, missing: BTreeSet<(ClassId, i64)>) -> ClassError {
        ClassError::Missing(
            missing
                .into_iter()
                .map(|(g, n)| (self.table.name(g).to_string(), n))
                .collect(),
        )
    }
}

/// Expands every class's series to `order` and applies explicit seed
/// overrides. Classes without a series keep only their seeds.
pub fn load_family(table: &ClassTable, order: i64) -> Result<CoefficientFamily, ClassError> {
    table.validate()?;
    let mut family = CoefficientFamily::blank(table, order);
    let expanded: Vec<Result<Option<UniSeries>, ClassError>> = table
        .ids()
        .into_par_iter()
        .map(|g| table.expand_source(g, order))
        .collect();
    for (g, series) in expanded.into_iter().enumerate() {
        if let Some(series) = series? {
            for n in 1..=order {
                let v = series.int_coeff(n).ok_or_else(|| ClassError::NonIntegral {
                    class: table.name(g).to_string(),
                    n,
                })?;
                family.set(g, n, v);
            }
        }
    }
    for (&(g, n), v) in table.seeds() {
        if n <= order {
            family.set(g, n, v.clone());
        }
    }
    Ok(family)
}

/// Builds the bigraded trace of `g` on one of the two spaces in the identity.
pub type SpaceBuilder = fn(&CoefficientFamily, ClassId, i64, i64) -> Result<BiSeries, ClassError>;

fn graded_trace(
    f: &CoefficientFamily,
    g: ClassId,
    imax: i64,
    jmax: i64,
    index: impl Fn(i64, i64) -> i64,
) -> Result<BiSeries, ClassError> {
    let mut missing = BTreeSet::new();
    let s = BiSeries::from_fn(imax.max(0), 0, jmax.max(0), |m, n| {
        if m == 0 || n == 0 {
            Rational::zero()
        } else {
            f.require(g, index(m, n), &mut missing)
        }
    });
    if missing.is_empty() {
        Ok(s)
    } else {
        Err(f.missing_error(missing))
    }
}

/// Trace of `g` on `𝔲⁻`: `Σ_{m,n>0} c_g(mn) pᵐqⁿ`.
pub fn u_minus_series(f: &CoefficientFamily, g: ClassId, imax: i64, jmax: i64) -> Result<BiSeries, ClassError> {
    graded_trace(f, g, imax, jmax, |m, n| m * n)
}

/// Trace of `g` on `U = H₁(𝔲⁻)`: `Σ_{m,n>0} c_g(m+n−1) pᵐqⁿ`.
#[allow(non_snake_case)]
pub fn U_series(f: &CoefficientFamily, g: ClassId, imax: i64, jmax: i64) -> Result<BiSeries, ClassError> {
    graded_trace(f, g, imax, jmax, |m, n| m + n - 1)
}

/// Trace of `g` on `Ψᵏ(W)`: the trace of `gᵏ` on `W` with `p ↦ pᵏ, q ↦ qᵏ`.
pub fn adams_trace(
    f: &CoefficientFamily,
    g: ClassId,
    k: u32,
    space: SpaceBuilder,
    imax: i64,
    jmax: i64,
) -> Result<BiSeries, ClassError> {
    let h = f.table().power(g, k)?;
    let k64 = k as i64;
    let inner = space(f, h, imax / k64, jmax / k64)?;
    Ok(inner.substitute_power(k).truncate(imax, jmax))
}

/// `Σ_k (1/k) Ψᵏ(𝔲⁻)` traced at `g`.
///
/// `Ψᵏ(𝔲⁻)` starts at `pᵏqᵏ`, so only `k ≤ min(imax, jmax)` reach the window.
pub fn ep_lhs(f: &CoefficientFamily, g: ClassId, imax: i64, jmax: i64) -> Result<BiSeries, ClassError> {
    let mut total = BiSeries::zero(imax, 0, jmax);
    let kmax = imax.min(jmax);
    for k in 1..=kmax {
        let term = adams_trace(f, g, k as u32, u_minus_series, imax, jmax)?;
        total = total.add(&term.scale(&Rational::new(BigInt::one(), k.into())))?;
    }
    debug_assert!(
        adams_trace(f, g, (kmax + 1) as u32, u_minus_series, imax, jmax).map_or(true, |t| t.terms().next().is_none()),
        "Adams terms beyond min(imax, jmax) must vanish on the window"
    );
    Ok(total)
}

/// `Σ_k (1/k) Uᵏ = −log(1 − U)` traced at `g`.
pub fn ep_rhs(f: &CoefficientFamily, g: ClassId, imax: i64, jmax: i64) -> Result<BiSeries, ClassError> {
    Ok(U_series(f, g, imax, jmax)?.log1m()?.neg())
}

/// Coefficient-wise comparison of the two sides of the Euler–Poincaré
/// identity for one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpReport {
    pub class: String,
    pub imax: i64,
    pub jmax: i64,
    /// `((i, j), lhs, rhs)` for every differing coefficient, row-major.
    pub mismatches: Vec<((i64, i64), Rational, Rational)>,
}

impl EpReport {
    pub fn passes(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn verify_ep(f: &CoefficientFamily, g: ClassId, imax: i64, jmax: i64) -> Result<EpReport, ClassError> {
    let lhs = ep_lhs(f, g, imax, jmax)?;
    let rhs = ep_rhs(f, g, imax, jmax)?;
    Ok(EpReport {
        class: f.table().name(g).to_string(),
        imax,
        jmax,
        mismatches: lhs.mismatches(&rhs),
    })
}

/// [`verify_ep`] for every class, in table order, evaluated concurrently.
pub fn verify_ep_all(f: &CoefficientFamily, imax: i64, jmax: i64) -> Result<Vec<EpReport>, ClassError> {
    f.table()
        .ids()
        .into_par_iter()
        .map(|g| verify_ep(f, g, imax, jmax))
        .collect()
}

/// Exterior powers `[∧⁰W, ∧¹W, …, ∧^{tmax}W]` traced at `g`, where `trace(h)`
/// gives the trace of `h` on `W`.
///
/// Uses Newton's identity `n·∧ⁿ = Σ_{i=1..n} (−1)^{i−1} ∧^{n−i} · Ψⁱ`,
/// the coefficientwise form of `d/dt log ∧_t(W) = Σ (−1)ⁿ Ψⁿ⁺¹(W) tⁿ`.
pub fn lambda_wedge_t<F>(table: &ClassTable, g: ClassId, trace: F, tmax: usize) -> Result<Vec<BiSeries>, ClassError>
where
    F: Fn(ClassId) -> Result<BiSeries, ClassError>,
{
    let w = trace(g)?;
    let positive = |s: &BiSeries| s.terms().all(|((i, j), _)| j >= 0 && (i, j) != (0, 0));
    if !positive(&w) {
        return Err(ClassError::NotPositive);
    }
    let (pmax, qmax) = (w.pmax(), w.qmax());
    let mut adams = Vec::with_capacity(tmax);
    for i in 1..=tmax as u32 {
        let wi = trace(table.power(g, i)?)?;
        if !positive(&wi) {
            return Err(ClassError::NotPositive);
        }
        adams.push(wi.substitute_power(i).truncate(pmax, qmax));
    }
    let mut wedge = vec![BiSeries::one(pmax, qmax)];
    for n in 1..=tmax {
        let mut acc = BiSeries::zero(pmax, 0, qmax);
        for i in 1..=n {
            let term = wedge[n - i].mul(&adams[i - 1]);
            acc = if i % 2 == 1 { acc.add(&term)? } else { acc.sub(&term)? };
        }
        wedge.push(acc.scale(&Rational::new(BigInt::one(), BigInt::from(n))));
    }
    Ok(wedge)
}

/// Checks `∧_{−1}(𝔲⁻) = 1 − U` at `g` directly from exterior powers.
pub fn verify_wedge(
    f: &CoefficientFamily,
    g: ClassId,
    imax: i64,
    jmax: i64,
) -> Result<Vec<((i64, i64), Rational, Rational)>, ClassError> {
    // ∧ⁿ(𝔲⁻) starts in p-degree n
    let wedge = lambda_wedge_t(f.table(), g, |h| u_minus_series(f, h, imax, jmax), imax as usize)?;
    let mut alternating = BiSeries::zero(imax, 0, jmax);
    for (n, w) in wedge.iter().enumerate() {
        alternating = if n % 2 == 0 {
            alternating.add(w)?
        } else {
            alternating.sub(w)?
        };
    }
    let expected = BiSeries::one(imax, jmax).sub(&U_series(f, g, imax, jmax)?)?;
    Ok(alternating.mismatches(&expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::parse_table;

    fn catalog() -> ClassTable {
        parse_table(crate::CATALOG).unwrap()
    }

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn power_maps_of_catalog() {
        let t = catalog();
        let id = |n| t.id(n).unwrap();
        assert_eq!(t.power(id("2B"), 2).unwrap(), id("1A"));
        assert_eq!(t.power(id("2B"), 3).unwrap(), id("2B"));
        assert_eq!(t.power(id("4C"), 2).unwrap(), id("2B"));
        assert_eq!(t.power(id("4C"), 6).unwrap(), id("2B"));
        assert_eq!(t.power(id("4C"), 4).unwrap(), id("1A"));
        assert_eq!(t.power(id("3B"), 5).unwrap(), id("3B"));
        assert_eq!(t.power(id("1A"), 7).unwrap(), id("1A"));
        assert!(t.power_map_warnings().is_empty(), "{:?}", t.power_map_warnings());
    }

    #[test]
    fn wrong_power_map_is_warned_not_rejected() {
        let mut t = catalog();
        let b = t.id("2B").unwrap();
        t.set_power(b, 2, b);
        assert!(t.validate().is_ok());
        assert_eq!(t.power(b, 2).unwrap(), b);
        assert!(!t.power_map_warnings().is_empty());
    }

    #[test]
    fn unclosed_table_rejected() {
        let mut t = ClassTable::new();
        let e = t.add_class("1A", 1).unwrap();
        t.set_identity(e);
        t.add_class("5A", 5).unwrap();
        assert!(matches!(t.validate(), Err(ClassError::NotPowerClosed { k: 2, .. })));
    }

    #[test]
    fn load_family_examples() {
        let t = catalog();
        let f = load_family(&t, 6).unwrap();
        assert_eq!(f.get(t.id("1A").unwrap(), 1), Some(BigInt::from(196884)));
        assert_eq!(f.get(t.id("2B").unwrap(), 1), Some(BigInt::from(276)));
        assert_eq!(f.get(t.id("2B").unwrap(), 2), Some(BigInt::from(-2048)));
        for g in t.ids() {
            assert_eq!(f.get(g, -1), Some(BigInt::one()));
            assert_eq!(f.get(g, 0), Some(BigInt::zero()));
        }
    }

    #[test]
    fn seeds_only_classes_keep_unknowns() {
        let mut t = ClassTable::new();
        let e = t.add_class("1A", 1).unwrap();
        t.set_identity(e);
        let x = t.add_class("2X", 2).unwrap();
        t.set_seed(x, 1, BigInt::from(5)).unwrap();
        t.set_seed(x, 3, BigInt::from(7)).unwrap();
        let f = load_family(&t, 6).unwrap();
        assert_eq!(f.unknowns(x, 6), vec![2, 4, 5, 6]);
        assert_eq!(f.get(x, 3), Some(BigInt::from(7)));
    }

    #[test]
    fn graded_trace_coefficients() {
        let t = catalog();
        let f = load_family(&t, 9).unwrap();
        let g = t.id("2B").unwrap();
        let um = u_minus_series(&f, g, 3, 3).unwrap();
        let c = |n| r(i64::try_from(f.get(g, n).unwrap()).unwrap());
        assert_eq!(um.coefficient(1, 1), Some(c(1)));
        assert_eq!(um.coefficient(2, 3), Some(c(6)));
        let u = U_series(&f, g, 3, 3).unwrap();
        assert_eq!(u.coefficient(1, 1), Some(c(1)));
        assert_eq!(u.coefficient(1, 2), Some(c(2)));
        assert_eq!(u.coefficient(3, 3), Some(c(5)));
        let e = t.id("1A").unwrap();
        let c4 = Rational::from_integer(f.get(e, 4).unwrap());
        assert_eq!(u_minus_series(&f, e, 2, 2).unwrap().coefficient(2, 2), Some(c4));
    }

    #[test]
    fn missing_coefficients_are_listed() {
        let t = catalog();
        let f = load_family(&t, 3).unwrap();
        let err = u_minus_series(&f, 0, 2, 3).unwrap_err();
        assert_eq!(err, ClassError::Missing(vec![("1A".into(), 4), ("1A".into(), 6)]));
    }

    #[test]
    fn adams_examples() {
        let t = catalog();
        let f = load_family(&t, 16).unwrap();
        let b = t.id("2B").unwrap();
        let e = t.id("1A").unwrap();
        assert_eq!(
            adams_trace(&f, b, 1, u_minus_series, 4, 4).unwrap(),
            u_minus_series(&f, b, 4, 4).unwrap()
        );
        let psi2 = adams_trace(&f, b, 2, u_minus_series, 4, 4).unwrap();
        let c1 = Rational::from_integer(f.get(e, 1).unwrap());
        assert_eq!(psi2.coefficient(2, 2), Some(c1));
        assert_eq!(psi2.coefficient(1, 1), Some(r(0)));
        let id2 = adams_trace(&f, e, 2, u_minus_series, 4, 4).unwrap();
        assert_eq!(id2, psi2);
        // Ψ² ∘ Ψ² = Ψ⁴ on power-closed tables
        let c = t.id("4C").unwrap();
        let psi4 = adams_trace(&f, c, 4, u_minus_series, 8, 8).unwrap();
        let h = t.power(c, 2).unwrap();
        let twice = adams_trace(&f, h, 2, u_minus_series, 4, 4)
            .unwrap()
            .substitute_power(2)
            .truncate(8, 8);
        assert_eq!(psi4.truncate(8, 8), twice);
    }

    #[test]
    fn ep_sides_low_coefficients() {
        let t = catalog();
        let f = load_family(&t, 16).unwrap();
        for g in t.ids() {
            let c = |n: i64| Rational::from_integer(f.get(g, n).unwrap());
            let g2 = t.power(g, 2).unwrap();
            let c2 = |n: i64| Rational::from_integer(f.get(g2, n).unwrap());
            let half = Rational::new(1.into(), 2.into());
            let lhs = ep_lhs(&f, g, 3, 3).unwrap();
            assert_eq!(lhs.coefficient(1, 1), Some(c(1)));
            assert_eq!(lhs.coefficient(2, 2), Some(c(4) + &half * c2(1)));
            assert_eq!(lhs.coefficient(2, 1), Some(c(2)));
            let rhs = ep_rhs(&f, g, 3, 3).unwrap();
            assert_eq!(rhs.coefficient(1, 1), Some(c(1)));
            assert_eq!(rhs.coefficient(2, 2), Some(c(3) + &half * c(1) * c(1)));
            assert_eq!(rhs.coefficient(2, 3), Some(c(4) + c(1) * c(2)));
        }
    }

    #[test]
    fn ep_holds_on_catalog() {
        let t = catalog();
        let f = load_family(&t, 36).unwrap();
        for report in verify_ep_all(&f, 6, 6).unwrap() {
            assert!(report.passes(), "{}: {:?}", report.class, report.mismatches.first());
        }
    }

    #[test]
    fn corrupted_c4_fails_at_two_two() {
        let mut t = catalog();
        let e = t.id("1A").unwrap();
        let good = modular::J_series(4).unwrap().int_coeff(4).unwrap();
        t.set_seed(e, 4, good + 1).unwrap();
        let f = load_family(&t, 36).unwrap();
        let report = verify_ep(&f, e, 6, 6).unwrap();
        assert!(!report.passes());
        assert_eq!(report.mismatches[0].0, (2, 2));
    }

    #[test]
    fn wedge_of_a_line() {
        let t = catalog();
        let w = |_h: ClassId| Ok(BiSeries::from_terms(4, 0, 4, [((1, 1), r(1))]));
        let wedge = lambda_wedge_t(&t, 0, w, 3).unwrap();
        assert_eq!(wedge[0], BiSeries::one(4, 4));
        assert_eq!(wedge[1], BiSeries::from_terms(4, 0, 4, [((1, 1), r(1))]));
        assert_eq!(wedge[2], BiSeries::zero(4, 0, 4));
        assert_eq!(wedge[3], BiSeries::zero(4, 0, 4));
    }

    #[test]
    fn wedge_is_multiplicative() {
        let t = catalog();
        let g = t.id("4C").unwrap();
        // traces that depend on the class through its order
        let v = |h: ClassId| {
            let o = t.order(h) as i64;
            Ok(BiSeries::from_terms(
                4,
                0,
                4,
                [((1, 0), r(o)), ((1, 2), r(3 - o)), ((2, 1), r(2))],
            ))
        };
        let w = |h: ClassId| {
            let o = t.order(h) as i64;
            Ok(BiSeries::from_terms(
                4,
                0,
                4,
                [((0, 1), r(1)), ((1, 1), r(o * o)), ((2, 2), r(-o))],
            ))
        };
        let sum = |h: ClassId| v(h)?.add(&w(h)?).map_err(ClassError::from);
        let tmax = 8;
        let a = lambda_wedge_t(&t, g, v, tmax).unwrap();
        let b = lambda_wedge_t(&t, g, w, tmax).unwrap();
        let s = lambda_wedge_t(&t, g, sum, tmax).unwrap();
        for n in 0..=tmax {
            let mut conv = BiSeries::zero(4, 0, 4);
            for i in 0..=n {
                conv = conv.add(&a[i].mul(&b[n - i])).unwrap();
            }
            assert_eq!(s[n], conv, "degree {n} in t");
        }
    }

    #[test]
    fn exterior_powers_give_homology() {
        let t = catalog();
        let f = load_family(&t, 25).unwrap();
        for g in t.ids() {
            assert!(verify_wedge(&f, g, 5, 5).unwrap().is_empty(), "class {}", t.name(g));
        }
    }
}
