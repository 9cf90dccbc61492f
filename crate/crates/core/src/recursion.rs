//! Coefficient relations, the Möbius-inverted closed formula, the seed
//! propagation solver and the determinacy audit.
//!
//! Comparing coefficients of `pⁱqʲ` in the traced Euler–Poincaré identity
//! gives, for every class `g`,
//!
//! ```text
//! Σ_{k | (i,j)} (1/k) c_{gᵏ}(ij/k²) = Σ_{a ∈ P(i,j)} (|a|−1)!/a! ∏ c_g(r+s−1)^{a_rs}
//! ```
//!
//! and Möbius inversion over `k` isolates `c_g(ij)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::factorial;
pub use crate::arith::mobius;
use crate::classes::{ClassError, ClassId, ClassTable, CoefficientFamily};
use crate::series::Rational;

/// Seed indices from which every coefficient is determined.
pub const SEED_INDICES: [i64; 4] = [1, 2, 3, 5];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecursionError {
    #[error("relation indices must be positive (got ({0},{1}))")]
    BadTarget(u32, u32),
    #[error("{class}({n}) from relation {first:?} is {first_value} but relation {second:?} gives {second_value}")]
    Contradiction {
        class: String,
        n: i64,
        first: (u32, u32),
        first_value: BigInt,
        second: (u32, u32),
        second_value: BigInt,
    },
    #[error("relation {target:?} for class {class} is violated (residual {residual})")]
    Inconsistent {
        class: String,
        target: (u32, u32),
        residual: BigInt,
    },
    #[error("relation {target:?} for class {class} gives a non-integral value {value} for c({n})")]
    NonIntegral {
        class: String,
        target: (u32, u32),
        n: i64,
        value: Rational,
    },
    #[error("missing seeds: {}", .0.iter().map(|(c, n)| format!("{c}({n})")).collect::<Vec<_>>().join(" "))]
    MissingSeeds(Vec<(String, i64)>),
    #[error(transparent)]
    Class(#[from] ClassError),
}

/// A finitely supported matrix `a = (a_rs)` with positive entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionMatrix {
    entries: Vec<((u32, u32), u32)>,
}

impl PartitionMatrix {
    pub fn new<I: IntoIterator<Item = ((u32, u32), u32)>>(entries: I) -> Self {
        let mut map: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for (cell, a) in entries {
            assert!(cell.0 >= 1 && cell.1 >= 1, "cells are indexed from 1");
            if a > 0 {
                *map.entry(cell).or_insert(0) += a;
            }
        }
        PartitionMatrix {
            entries: map.into_iter().collect(),
        }
    }

    fn from_cells(cells: &[(u32, u32)]) -> Self {
        PartitionMatrix::new(cells.iter().map(|&c| (c, 1)))
    }

    pub fn entries(&self) -> &[((u32, u32), u32)] {
        &self.entries
    }

    pub fn get(&self, r: u32, s: u32) -> u32 {
        self.entries.iter().find(|(c, _)| *c == (r, s)).map_or(0, |e| e.1)
    }

    /// `|a| = Σ a_rs`.
    pub fn size(&self) -> u32 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// `Σ a_rs (r, s)`.
    pub fn target(&self) -> (u32, u32) {
        self.entries
            .iter()
            .fold((0, 0), |(i, j), &((r, s), a)| (i + a * r, j + a * s))
    }

    /// `(|a|−1)!/a!`.
    pub fn weight(&self) -> Rational {
        let den = self
            .entries
            .iter()
            .fold(BigInt::one(), |acc, e| acc * factorial(e.1 as u64));
        Rational::new(factorial(self.size() as u64 - 1), den)
    }
}

impl fmt::Display for PartitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|((r, s), a)| format!("a{r},{s}={a}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Calls `f` with every element of `P(i, j)`, given as the non-increasing
/// list of its cells repeated by multiplicity.
fn visit_partitions<F: FnMut(&[(u32, u32)])>(i: u32, j: u32, f: &mut F) {
    fn rec<F: FnMut(&[(u32, u32)])>(ri: u32, rj: u32, max: (u32, u32), stack: &mut Vec<(u32, u32)>, f: &mut F) {
        if ri == 0 && rj == 0 {
            f(stack);
            return;
        }
        for r in (1..=max.0.min(ri)).rev() {
            let smax = if r == max.0 { max.1.min(rj) } else { rj };
            for s in (1..=smax).rev() {
                let (a, b) = (ri - r, rj - s);
                // every cell uses at least one of each coordinate
                if (a == 0) != (b == 0) {
                    continue;
                }
                stack.push((r, s));
                rec(a, b, (r, s), stack, f);
                stack.pop();
            }
        }
    }
    if i == 0 || j == 0 {
        return;
    }
    rec(i, j, (i, j), &mut Vec::new(), f);
}

/// All of `P(i, j)`, without duplicates.
#[allow(non_snake_case)]
pub fn enumerate_P(i: u32, j: u32) -> Vec<PartitionMatrix> {
    let mut out = Vec::new();
    visit_partitions(i, j, &mut |cells| out.push(PartitionMatrix::from_cells(cells)));
    out
}

/// A product `∏ c(n)^e` over sorted, distinct indices.
pub type IndexMonomial = Vec<(i64, u32)>;

/// `Σ_{a ∈ P(i,j)} (|a|−1)!/a! ∏ c(r+s−1)^{a_rs}` grouped by monomial, in
/// monomial order.
pub fn rhs_monomials(i: u32, j: u32) -> Vec<(Rational, IndexMonomial)> {
    let mut facts = vec![BigInt::one()];
    let mut fact = |n: usize| {
        while facts.len() <= n {
            let k = facts.len();
            let next = &facts[k - 1] * k;
            facts.push(next);
        }
        facts[n].clone()
    };
    let mut grouped: HashMap<IndexMonomial, Rational> = HashMap::new();
    visit_partitions(i, j, &mut |cells| {
        let mut den = BigInt::one();
        let mut run = 1;
        for w in 1..=cells.len() {
            if w < cells.len() && cells[w] == cells[w - 1] {
                run += 1;
            } else {
                den *= fact(run);
                run = 1;
            }
        }
        let weight = Rational::new(fact(cells.len() - 1), den);
        let mut idx: Vec<i64> = cells.iter().map(|&(r, s)| (r + s) as i64 - 1).collect();
        idx.sort_unstable();
        let mut mono: IndexMonomial = Vec::new();
        for n in idx {
            match mono.last_mut() {
                Some((m, e)) if *m == n => *e += 1,
                _ => mono.push((n, 1)),
            }
        }
        *grouped.entry(mono).or_insert_with(Rational::zero) += weight;
    });
    let mut out: Vec<(Rational, IndexMonomial)> = grouped.into_iter().map(|(m, w)| (w, m)).collect();
    out.sort_by(|a, b| a.1.cmp(&b.1));
    out
}

/// One LHS term `(1/k) c_{gᵏ}(index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LhsTerm {
    pub k: u32,
    pub index: i64,
}

/// The coefficient-of-`pⁱqʲ` equality, symbolic in the class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    /// Canonical target with `i ≤ j`.
    pub target: (u32, u32),
    pub lhs: Vec<LhsTerm>,
    pub rhs: Vec<(PartitionMatrix, Rational)>,
}

impl Relation {
    pub fn lhs_coefficient(term: &LhsTerm) -> Rational {
        Rational::new(BigInt::one(), BigInt::from(term.k))
    }

    /// The relation as `LHS − RHS = 0`, grouped and cleared of denominators.
    pub fn polynomial(&self) -> RelationPolynomial {
        let mut grouped: BTreeMap<IndexMonomial, Rational> = BTreeMap::new();
        for (a, w) in &self.rhs {
            let mut mono: BTreeMap<i64, u32> = BTreeMap::new();
            for &((r, s), e) in a.entries() {
                *mono.entry((r + s) as i64 - 1).or_insert(0) += e;
            }
            *grouped.entry(mono.into_iter().collect()).or_insert_with(Rational::zero) += w;
        }
        RelationPolynomial::assemble(
            self.target,
            &self.lhs,
            grouped.into_iter().map(|(m, w)| (w, m)).collect(),
        )
    }
}

fn lhs_terms(i: u32, j: u32) -> Vec<LhsTerm> {
    let d = i.gcd(&j);
    (1..=d)
        .filter(|k| d.is_multiple_of(*k))
        .map(|k| LhsTerm {
            k,
            index: (i as i64 * j as i64) / (k as i64 * k as i64),
        })
        .collect()
}

/// Builds the relation at `(i, j)`; `(j, i)` gives the same relation.
pub fn build_relation(i: u32, j: u32) -> Result<Relation, RecursionError> {
    if i == 0 || j == 0 {
        return Err(RecursionError::BadTarget(i, j));
    }
    let (i, j) = (i.min(j), i.max(j));
    let rhs = enumerate_P(i, j).into_iter().map(|a| {
        let w = a.weight();
        (a, w)
    });
    Ok(Relation {
        target: (i, j),
        lhs: lhs_terms(i, j),
        rhs: rhs.collect(),
    })
}

/// A variable `c_{gᵏ}(index)` of a class-generic relation.
pub type PowerVar = (u32, i64);

/// `Σ coeff · ∏ c_{gᵏ}(n)^e = 0` with integer coefficients; `scale` is the
/// factor that cleared the denominators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationPolynomial {
    pub target: (u32, u32),
    pub scale: BigInt,
    pub terms: Vec<(BigInt, Vec<(PowerVar, u32)>)>,
}

impl RelationPolynomial {
    fn assemble(target: (u32, u32), lhs: &[LhsTerm], rhs: Vec<(Rational, IndexMonomial)>) -> Self {
        let mut rational: Vec<(Rational, Vec<(PowerVar, u32)>)> = lhs
            .iter()
            .map(|t| (Relation::lhs_coefficient(t), vec![((t.k, t.index), 1)]))
            .collect();
        rational.extend(
            rhs.into_iter()
                .map(|(w, m)| (-w, m.into_iter().map(|(n, e)| ((1, n), e)).collect())),
        );
        let scale = rational.iter().fold(BigInt::one(), |acc, (c, _)| acc.lcm(c.denom()));
        let terms = rational
            .into_iter()
            .map(|(c, m)| ((c * Rational::from_integer(scale.clone())).to_integer(), m))
            .collect();
        RelationPolynomial { target, scale, terms }
    }

    /// Specializes to class `g`, merging variables that coincide under the
    /// power maps.
    pub fn instantiate(&self, table: &ClassTable, g: ClassId) -> Result<ClassRelation, ClassError> {
        let mut grouped: BTreeMap<Vec<((ClassId, i64), u32)>, BigInt> = BTreeMap::new();
        for (c, mono) in &self.terms {
            let mut vars: BTreeMap<(ClassId, i64), u32> = BTreeMap::new();
            for &((k, n), e) in mono {
                *vars.entry((table.power(g, k)?, n)).or_insert(0) += e;
            }
            *grouped.entry(vars.into_iter().collect()).or_insert_with(BigInt::zero) += c;
        }
        let mut vars: BTreeSet<(ClassId, i64)> = BTreeSet::new();
        let mut raw = Vec::new();
        for (mono, c) in grouped {
            if c.is_zero() {
                continue;
            }
            vars.extend(mono.iter().map(|v| v.0));
            raw.push((c, mono));
        }
        let vars: Vec<(ClassId, i64)> = vars.into_iter().collect();
        let terms = raw
            .into_iter()
            .map(|(coeff, mono)| Term {
                coeff,
                factors: mono
                    .into_iter()
                    .map(|(v, e)| (vars.binary_search(&v).unwrap(), e))
                    .collect(),
            })
            .collect();
        Ok(ClassRelation {
            class: g,
            target: self.target,
            vars,
            terms,
        })
    }
}

/// [`build_relation`] followed by [`Relation::polynomial`], without storing
/// the partition matrices.
pub fn relation_polynomial(i: u32, j: u32) -> Result<RelationPolynomial, RecursionError> {
    if i == 0 || j == 0 {
        return Err(RecursionError::BadTarget(i, j));
    }
    let (i, j) = (i.min(j), i.max(j));
    Ok(RelationPolynomial::assemble(
        (i, j),
        &lhs_terms(i, j),
        rhs_monomials(i, j),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Term {
    coeff: BigInt,
    factors: Vec<(usize, u32)>,
}

/// A relation specialized to one class, over variables `c_h(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassRelation {
    pub class: ClassId,
    pub target: (u32, u32),
    vars: Vec<(ClassId, i64)>,
    terms: Vec<Term>,
}

impl ClassRelation {
    pub fn vars(&self) -> &[(ClassId, i64)] {
        &self.vars
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }

    /// `true` if `var` occurs in some term and never with exponent above one.
    fn is_linear_in(&self, var: usize) -> bool {
        let mut seen = false;
        for t in &self.terms {
            for &(v, e) in &t.factors {
                if v == var {
                    if e > 1 {
                        return false;
                    }
                    seen = true;
                }
            }
        }
        seen
    }

    fn product(&self, t: &Term, skip: Option<usize>, f: &CoefficientFamily) -> BigInt {
        let mut acc = t.coeff.clone();
        for &(v, e) in &t.factors {
            if Some(v) == skip {
                continue;
            }
            let (h, n) = self.vars[v];
            let value = f.get_ref(h, n).expect("known variable");
            acc *= if e == 1 { value.clone() } else { value.pow(e) };
        }
        acc
    }

    /// Value of `LHS − RHS` (times the scale) when every variable is known.
    fn residual(&self, f: &CoefficientFamily) -> BigInt {
        self.terms.iter().map(|t| self.product(t, None, f)).sum()
    }

    /// Solves `A·u + B = 0` for the single unknown `u`; `None` if `A = 0`.
    fn solve_for(&self, var: usize, f: &CoefficientFamily) -> Option<Rational> {
        let mut a = BigInt::zero();
        let mut b = BigInt::zero();
        for t in &self.terms {
            let p = self.product(t, Some(var), f);
            if t.factors.iter().any(|&(v, _)| v == var) {
                a += p;
            } else {
                b += p;
            }
        }
        (!a.is_zero()).then(|| Rational::new(-b, a))
    }
}

/// All class relations with `2 ≤ i ≤ j` and `ij ≤ bound`.
pub fn class_relations(table: &ClassTable, bound: i64) -> Result<Vec<ClassRelation>, ClassError> {
    let targets: Vec<(u32, u32)> = (2..)
        .take_while(|i| i * i <= bound)
        .flat_map(|i| (i..=bound / i).map(move |j| (i as u32, j as u32)))
        .collect();
    let polys: Vec<RelationPolynomial> = targets
        .into_par_iter()
        .map(|(i, j)| relation_polynomial(i, j).expect("positive target"))
        .collect();
    let mut out = Vec::with_capacity(polys.len() * table.len());
    for p in &polys {
        for g in table.ids() {
            let r = p.instantiate(table, g)?;
            if !r.is_trivial() {
                out.push(r);
            }
        }
    }
    Ok(out)
}

fn require_known(f: &CoefficientFamily, h: ClassId, n: i64, missing: &mut BTreeSet<(ClassId, i64)>) -> BigInt {
    f.get(h, n).unwrap_or_else(|| {
        missing.insert((h, n));
        BigInt::zero()
    })
}

/// `Σ_{a ∈ P(m,n)} (|a|−1)!/a! ∏ c_h(r+s−1)^{a_rs}`.
fn traced_log(f: &CoefficientFamily, h: ClassId, m: u32, n: u32, missing: &mut BTreeSet<(ClassId, i64)>) -> Rational {
    let mut total = Rational::zero();
    for (w, mono) in rhs_monomials(m, n) {
        let mut p = BigInt::one();
        for (idx, e) in mono {
            p *= require_known(f, h, idx, missing).pow(e);
        }
        total += w * Rational::from_integer(p);
    }
    total
}

/// `c_g(ij) = Σ_{k | (i,j)} (μ(k)/k) Σ_{a ∈ P(i/k, j/k)} (|a|−1)!/a! ∏ c_{gᵏ}(r+s−1)^{a_rs}`.
pub fn closed_form_c(f: &CoefficientFamily, g: ClassId, i: u32, j: u32) -> Result<BigInt, RecursionError> {
    assert!(i >= 2 && j >= 2, "the closed formula needs i, j >= 2");
    let table = f.table();
    let d = i.gcd(&j);
    let mut missing = BTreeSet::new();
    let mut total = Rational::zero();
    for k in (1..=d).filter(|k| d.is_multiple_of(*k)) {
        let mu = mobius(k as u64);
        if mu == 0 {
            continue;
        }
        let h = table.power(g, k)?;
        let r = traced_log(f, h, i / k, j / k, &mut missing);
        total += r * Rational::new(mu.into(), k.into());
    }
    if !missing.is_empty() {
        let list = missing
            .into_iter()
            .map(|(h, n)| (table.name(h).to_string(), n))
            .collect();
        return Err(ClassError::Missing(list).into());
    }
    if !total.is_integer() {
        return Err(RecursionError::NonIntegral {
            class: table.name(g).to_string(),
            target: (i, j),
            n: (i * j) as i64,
            value: total,
        });
    }
    Ok(total.to_integer())
}

/// One evaluation of the closed formula against a known value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormCheck {
    pub class: String,
    pub n: i64,
    pub factors: (u32, u32),
    pub expected: BigInt,
    pub computed: Result<BigInt, RecursionError>,
}

impl ClosedFormCheck {
    pub fn agrees(&self) -> bool {
        self.computed.as_ref() == Ok(&self.expected)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormReport {
    pub checks: Vec<ClosedFormCheck>,
}

impl ClosedFormReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(ClosedFormCheck::agrees)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClosedFormCheck> {
        self.checks.iter().filter(|c| !c.agrees())
    }
}

/// Evaluates the closed formula for every class, every composite `n ≤ nmax`
/// and every factorization `n = ij` with `2 ≤ i ≤ j`.
pub fn cross_check_closed_form(f: &CoefficientFamily, nmax: i64) -> ClosedFormReport {
    let mut jobs = Vec::new();
    for g in f.table().ids() {
        for n in 4..=nmax.min(f.order()) {
            for i in (2..).take_while(|i| i * i <= n) {
                if n % i == 0 {
                    jobs.push((g, n, i as u32, (n / i) as u32));
                }
            }
        }
    }
    let checks = jobs
        .into_par_iter()
        .filter_map(|(g, n, i, j)| {
            let expected = f.get(g, n)?;
            Some(ClosedFormCheck {
                class: f.table().name(g).to_string(),
                n,
                factors: (i, j),
                expected,
                computed: closed_form_c(f, g, i, j),
            })
        })
        .collect();
    ClosedFormReport { checks }
}

/// Where a solved coefficient came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Seed,
    Relation {
        class: ClassId,
        target: (u32, u32),
        pass: usize,
    },
}

/// A disagreement recorded by a non-strict solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conflict {
    Tie {
        class: ClassId,
        n: i64,
        kept: ((u32, u32), BigInt),
        other: ((u32, u32), BigInt),
    },
    Residual {
        class: ClassId,
        target: (u32, u32),
        residual: BigInt,
    },
    NonIntegral {
        class: ClassId,
        target: (u32, u32),
        n: i64,
        value: Rational,
    },
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Values on `[−1, nmax]`.
    pub family: CoefficientFamily,
    /// `(class, n)` left unknown with `n ≤ nmax`.
    pub unresolved: Vec<(ClassId, i64)>,
    pub provenance: BTreeMap<(ClassId, i64), Provenance>,
    pub conflicts: Vec<Conflict>,
}

impl SolveOutcome {
    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }
}

/// Solver behaviour on inconsistent input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Any disagreement is an error.
    Strict,
    /// Disagreements are recorded; the first value found is kept.
    Lenient,
}

/// Seeds at `{1, 2, 3, 5}` for every class (completed from the classes'
/// own series), then propagation up to `nmax`.
pub fn propagate_solve(table: &ClassTable, nmax: i64) -> Result<SolveOutcome, RecursionError> {
    let seeds = table.solver_seeds()?;
    let missing: Vec<(String, i64)> = table
        .ids()
        .flat_map(|g| SEED_INDICES.iter().map(move |&n| (g, n)))
        .filter(|key| !seeds.contains_key(key))
        .map(|(g, n)| (table.name(g).to_string(), n))
        .collect();
    if !missing.is_empty() {
        return Err(RecursionError::MissingSeeds(missing));
    }
    solve_with_seeds(table, &seeds, nmax, Mode::Strict)
}

/// Fixed-point propagation from the given seeds over every relation with
/// `ij ≤ 2·nmax`.
///
/// Each pass fires every relation with exactly one unknown that occurs
/// linearly; values for the same unknown within a pass must agree. After
/// the loop, every fully known relation is checked.
pub fn solve_with_seeds(
    table: &ClassTable,
    seeds: &BTreeMap<(ClassId, i64), BigInt>,
    nmax: i64,
    mode: Mode,
) -> Result<SolveOutcome, RecursionError> {
    table.validate()?;
    let nmax = nmax.max(0);
    let bound = 2 * nmax;
    let mut family = CoefficientFamily::blank(table, bound);
    let mut provenance = BTreeMap::new();
    for (&(g, n), v) in seeds {
        if n <= bound {
            family.set(g, n, v.clone());
            provenance.insert((g, n), Provenance::Seed);
        }
    }
    let relations = class_relations(table, bound)?;
    let mut conflicts = Vec::new();
    let name = |g: ClassId| table.name(g).to_string();

    let mut pass = 0;
    loop {
        pass += 1;
        let fired: Vec<(usize, (ClassId, i64), Rational)> = relations
            .par_iter()
            .enumerate()
            .filter_map(|(idx, rel)| {
                let mut unknown = None;
                for (v, &(h, n)) in rel.vars.iter().enumerate() {
                    if !family.is_known(h, n) {
                        if unknown.is_some() {
                            return None;
                        }
                        unknown = Some(v);
                    }
                }
                let v = unknown?;
                if !rel.is_linear_in(v) {
                    return None;
                }
                rel.solve_for(v, &family).map(|value| (idx, rel.vars[v], value))
            })
            .collect();
        if fired.is_empty() {
            break;
        }
        let mut assigned: BTreeMap<(ClassId, i64), ((u32, u32), BigInt)> = BTreeMap::new();
        for (idx, (h, n), value) in fired {
            let rel = &relations[idx];
            if !value.is_integer() {
                if mode == Mode::Strict {
                    return Err(RecursionError::NonIntegral {
                        class: name(rel.class),
                        target: rel.target,
                        n,
                        value,
                    });
                }
                conflicts.push(Conflict::NonIntegral {
                    class: rel.class,
                    target: rel.target,
                    n,
                    value,
                });
                continue;
            }
            let value = value.to_integer();
            match assigned.get(&(h, n)) {
                None => {
                    provenance.insert(
                        (h, n),
                        Provenance::Relation {
                            class: rel.class,
                            target: rel.target,
                            pass,
                        },
                    );
                    assigned.insert((h, n), (rel.target, value));
                }
                Some((first, kept)) if *kept != value => {
                    if mode == Mode::Strict {
                        return Err(RecursionError::Contradiction {
                            class: name(h),
                            n,
                            first: *first,
                            first_value: kept.clone(),
                            second: rel.target,
                            second_value: value,
                        });
                    }
                    conflicts.push(Conflict::Tie {
                        class: h,
                        n,
                        kept: (*first, kept.clone()),
                        other: (rel.target, value),
                    });
                }
                Some(_) => {}
            }
        }
        if assigned.is_empty() {
            break;
        }
        for ((h, n), (_, v)) in assigned {
            family.set(h, n, v);
        }
    }

    let residuals: Vec<(usize, BigInt)> = relations
        .par_iter()
        .enumerate()
        .filter(|(_, rel)| rel.vars.iter().all(|&(h, n)| family.is_known(h, n)))
        .filter_map(|(idx, rel)| {
            let r = rel.residual(&family);
            (!r.is_zero()).then_some((idx, r))
        })
        .collect();
    for (idx, residual) in residuals {
        let rel = &relations[idx];
        if mode == Mode::Strict {
            return Err(RecursionError::Inconsistent {
                class: name(rel.class),
                target: rel.target,
                residual,
            });
        }
        conflicts.push(Conflict::Residual {
            class: rel.class,
            target: rel.target,
            residual,
        });
    }

    let unresolved = table
        .ids()
        .flat_map(|g| family.unknowns(g, nmax).into_iter().map(move |n| (g, n)))
        .collect();
    Ok(SolveOutcome {
        family: family.truncated(nmax),
        unresolved,
        provenance,
        conflicts,
    })
}

/// Indices that the relation system cannot derive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub nmax: i64,
    pub unresolved: Vec<(ClassId, i64)>,
}

impl AuditReport {
    pub fn for_class(&self, g: ClassId) -> Vec<i64> {
        self.unresolved.iter().filter(|u| u.0 == g).map(|u| u.1).collect()
    }
}

/// Symbolic determinacy audit.
///
/// Starting from `given` (plus `c(−1)`, `c(0)`), propagates structurally:
/// a relation determines its only unknown when that unknown occurs linearly.
/// When propagation stalls, the smallest unknown `n ≤ nmax` (ties broken by
/// table order) is declared underivable, treated as known, and propagation
/// resumes. The declared indices are the report.
pub fn determinacy_audit(
    table: &ClassTable,
    nmax: i64,
    given: &BTreeSet<(ClassId, i64)>,
) -> Result<AuditReport, RecursionError> {
    table.validate()?;
    let relations = class_relations(table, 2 * nmax.max(0))?;
    let mut known: BTreeSet<(ClassId, i64)> = given.clone();
    let is_known = |known: &BTreeSet<(ClassId, i64)>, v: &(ClassId, i64)| v.1 <= 0 || known.contains(v);
    let mut unresolved = Vec::new();
    loop {
        loop {
            let mut progress = false;
            for rel in &relations {
                let mut unknown = None;
                let mut count = 0;
                for (v, key) in rel.vars.iter().enumerate() {
                    if !is_known(&known, key) {
                        count += 1;
                        unknown = Some(v);
                    }
                }
                if count == 1 {
                    let v = unknown.unwrap();
                    if rel.is_linear_in(v) {
                        known.insert(rel.vars[v]);
                        progress = true;
                    }
                }
            }
            if !progress {
                break;
            }
        }
        let next = (1..=nmax)
            .flat_map(|n| table.ids().map(move |g| (g, n)))
            .find(|key| !is_known(&known, key));
        match next {
            Some(key) => {
                unresolved.push(key);
                known.insert(key);
            }
            None => break,
        }
    }
    unresolved.sort_unstable();
    Ok(AuditReport { nmax, unresolved })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::load_family;
    use crate::modular::J_series;
    use crate::table::parse_table;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn monster_only() -> ClassTable {
        let mut t = ClassTable::new();
        let e = t.add_class("1A", 1).unwrap();
        t.set_identity(e);
        t
    }

    fn catalog() -> ClassTable {
        parse_table(crate::CATALOG).unwrap()
    }

    fn j_seeds(n_list: &[i64]) -> BTreeMap<(ClassId, i64), BigInt> {
        let j = J_series(6).unwrap();
        n_list.iter().map(|&n| ((0, n), j.int_coeff(n).unwrap())).collect()
    }

    /// Brute force over all integer matrices with entries bounded by the target.
    fn brute_force_count(i: u32, j: u32) -> usize {
        let cells: Vec<(u32, u32)> = (1..=i).flat_map(|r| (1..=j).map(move |s| (r, s))).collect();
        fn rec(cells: &[(u32, u32)], ri: u32, rj: u32) -> usize {
            match cells.split_first() {
                None => usize::from(ri == 0 && rj == 0),
                Some((&(r, s), rest)) => {
                    let mut total = 0;
                    let mut a = 0;
                    while a * r <= ri && a * s <= rj {
                        total += rec(rest, ri - a * r, rj - a * s);
                        a += 1;
                    }
                    total
                }
            }
        }
        rec(&cells, i, j)
    }

    #[test]
    fn mobius_reexport() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(2), -1);
        assert_eq!(mobius(4), 0);
        assert_eq!(mobius(6), 1);
    }

    #[test]
    fn small_partition_sets() {
        assert_eq!(enumerate_P(1, 1), vec![PartitionMatrix::new([((1, 1), 1)])]);
        let p22: BTreeSet<_> = enumerate_P(2, 2).into_iter().collect();
        let expected: BTreeSet<_> = [PartitionMatrix::new([((2, 2), 1)]), PartitionMatrix::new([((1, 1), 2)])]
            .into_iter()
            .collect();
        assert_eq!(p22, expected);
        let p24: BTreeSet<_> = enumerate_P(2, 4).into_iter().collect();
        let expected: BTreeSet<_> = [
            PartitionMatrix::new([((2, 4), 1)]),
            PartitionMatrix::new([((1, 1), 1), ((1, 3), 1)]),
            PartitionMatrix::new([((1, 2), 2)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(p24, expected);
        let p33: BTreeSet<_> = enumerate_P(3, 3).into_iter().collect();
        let expected: BTreeSet<_> = [
            PartitionMatrix::new([((3, 3), 1)]),
            PartitionMatrix::new([((1, 1), 1), ((2, 2), 1)]),
            PartitionMatrix::new([((1, 2), 1), ((2, 1), 1)]),
            PartitionMatrix::new([((1, 1), 3)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(p33, expected);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for i in 1..=5 {
            for j in 1..=6 {
                let all = enumerate_P(i, j);
                let distinct: BTreeSet<_> = all.iter().cloned().collect();
                assert_eq!(distinct.len(), all.len(), "duplicates in P({i},{j})");
                assert_eq!(all.len(), brute_force_count(i, j), "|P({i},{j})|");
                assert!(all.iter().all(|a| a.target() == (i, j) && a.size() >= 1));
            }
        }
    }

    #[test]
    fn weights() {
        assert_eq!(PartitionMatrix::new([((1, 1), 2)]).weight(), r(1, 2));
        assert_eq!(PartitionMatrix::new([((1, 1), 3)]).weight(), r(1, 3));
        assert_eq!(PartitionMatrix::new([((1, 1), 1), ((2, 2), 1)]).weight(), r(1, 1));
        assert_eq!(PartitionMatrix::new([((1, 1), 2), ((1, 2), 1)]).weight(), r(1, 1));
    }

    #[test]
    fn trivial_edge_relations() {
        let t = monster_only();
        for n in 1..=7 {
            let rel = build_relation(1, n).unwrap();
            assert_eq!(rel.rhs, vec![(PartitionMatrix::new([((1, n), 1)]), r(1, 1))]);
            assert!(rel.polynomial().instantiate(&t, 0).unwrap().is_trivial());
        }
    }

    #[test]
    fn relation_two_two() {
        let rel = build_relation(2, 2).unwrap();
        assert_eq!(rel.lhs, vec![LhsTerm { k: 1, index: 4 }, LhsTerm { k: 2, index: 1 }]);
        let p = rel.polynomial();
        assert_eq!(p.scale, BigInt::from(2));
        let mut terms = p.terms.clone();
        terms.sort();
        let mut expected: Vec<(BigInt, Vec<(PowerVar, u32)>)> = vec![
            (2.into(), vec![((1, 4), 1)]),
            (1.into(), vec![((2, 1), 1)]),
            ((-2).into(), vec![((1, 3), 1)]),
            ((-1).into(), vec![((1, 1), 2)]),
        ];
        expected.sort();
        assert_eq!(terms, expected);
    }

    #[test]
    fn relation_two_six_contains_seven() {
        let rel = build_relation(6, 2).unwrap();
        assert_eq!(rel.target, (2, 6));
        assert_eq!(rel.lhs, vec![LhsTerm { k: 1, index: 12 }, LhsTerm { k: 2, index: 3 }]);
        let seven = rel.rhs.iter().find(|(a, _)| a.get(2, 6) == 1).unwrap();
        assert_eq!(seven.1, r(1, 1));
    }

    #[test]
    fn relations_are_symmetric_and_integral() {
        for i in 1..=7 {
            for j in 1..=7 {
                let a = build_relation(i, j).unwrap();
                assert_eq!(a, build_relation(j, i).unwrap());
                let p = a.polynomial();
                assert_eq!(p, relation_polynomial(i, j).unwrap());
                assert!(
                    (BigInt::from(i.gcd(&j)) % &p.scale).is_zero(),
                    "scale {} at ({i},{j})",
                    p.scale
                );
            }
        }
    }

    #[test]
    fn closed_form_small_cases() {
        let t = catalog();
        let f = load_family(&t, 40).unwrap();
        let c = |g: ClassId, n: i64| Rational::from_integer(f.get(g, n).unwrap());
        for g in t.ids() {
            let g2 = t.power(g, 2).unwrap();
            let four = c(g, 3) + r(1, 2) * c(g, 1) * c(g, 1) - r(1, 2) * c(g2, 1);
            assert_eq!(Rational::from_integer(closed_form_c(&f, g, 2, 2).unwrap()), four);
            assert_eq!(closed_form_c(&f, g, 2, 2).unwrap(), f.get(g, 4).unwrap());
        }
        let e = t.id("1A").unwrap();
        let six = c(e, 4) + c(e, 1) * c(e, 2);
        assert_eq!(Rational::from_integer(closed_form_c(&f, e, 2, 3).unwrap()), six);
        let b = t.id("2B").unwrap();
        assert_eq!(closed_form_c(&f, b, 2, 3).unwrap(), f.get(b, 6).unwrap());
        assert_eq!(closed_form_c(&f, e, 2, 6).unwrap(), closed_form_c(&f, e, 3, 4).unwrap());
    }

    #[test]
    fn closed_form_reports_missing() {
        let t = monster_only();
        let f = CoefficientFamily::blank(&t, 10);
        match closed_form_c(&f, 0, 2, 2) {
            Err(RecursionError::Class(ClassError::Missing(list))) => {
                assert_eq!(list, vec![("1A".to_string(), 1), ("1A".to_string(), 3)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cross_check_on_catalog() {
        let f = load_family(&catalog(), 36).unwrap();
        let report = cross_check_closed_form(&f, 36);
        assert!(report.passes(), "{:?}", report.failures().next());
        assert!(report.checks.iter().any(|c| c.n == 36 && c.factors == (6, 6)));
    }

    #[test]
    fn solver_reaches_seven_through_twelve() {
        let t = monster_only();
        let out = solve_with_seeds(&t, &j_seeds(&[1, 2, 3, 5]), 8, Mode::Strict).unwrap();
        assert!(out.is_complete());
        let twelve = out.provenance[&(0, 12)];
        let seven = out.provenance[&(0, 7)];
        assert!(
            matches!(twelve, Provenance::Relation { target: (3, 4), .. }),
            "{twelve:?}"
        );
        match (twelve, seven) {
            (Provenance::Relation { pass: p12, .. }, Provenance::Relation { target, pass: p7, .. }) => {
                assert_eq!(target, (2, 6));
                assert!(p12 < p7);
            }
            other => panic!("unexpected provenance {other:?}"),
        }
        let j = J_series(8).unwrap();
        for n in -1..=8 {
            assert_eq!(out.family.get(0, n), j.int_coeff(n), "c({n})");
        }
    }

    #[test]
    fn missing_five_blocks_odd_chain() {
        let t = monster_only();
        let out = solve_with_seeds(&t, &j_seeds(&[1, 2, 3]), 12, Mode::Strict).unwrap();
        let unresolved: Vec<i64> = out.unresolved.iter().map(|u| u.1).collect();
        assert!(unresolved.contains(&5) && unresolved.contains(&8), "{unresolved:?}");
        assert!(!unresolved.contains(&4) && !unresolved.contains(&6));
    }

    #[test]
    fn propagate_requires_seeds() {
        let mut t = monster_only();
        t.add_class("2X", 2).unwrap();
        let x = t.id("2X").unwrap();
        t.set_seed(x, 1, 5.into()).unwrap();
        match propagate_solve(&t, 6) {
            Err(RecursionError::MissingSeeds(list)) => {
                assert_eq!(list, vec![("2X".into(), 2), ("2X".into(), 3), ("2X".into(), 5)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corrupted_seed_is_inconsistent() {
        let t = monster_only();
        let mut seeds = j_seeds(&[1, 2, 3, 5]);
        // c(4) is determined by (2,2); seeding it wrongly must be caught
        let j = J_series(4).unwrap();
        seeds.insert((0, 4), j.int_coeff(4).unwrap() + 1);
        assert!(solve_with_seeds(&t, &seeds, 10, Mode::Strict).is_err());
        let lenient = solve_with_seeds(&t, &seeds, 10, Mode::Lenient).unwrap();
        assert!(lenient
            .conflicts
            .iter()
            .any(|c| matches!(c, Conflict::Residual { target: (2, 2), .. })));
    }

    #[test]
    fn catalog_derivation_matches_recipes() {
        let t = catalog();
        let out = propagate_solve(&t, 24).unwrap();
        assert!(out.is_complete(), "{:?}", out.unresolved);
        let expanded = load_family(&t, 24).unwrap();
        assert_eq!(out.family, expanded);
    }

    #[test]
    fn audit_examples() {
        let t = monster_only();
        let none = BTreeSet::new();
        let n = |rep: AuditReport| rep.for_class(0);
        assert_eq!(n(determinacy_audit(&t, 4, &none).unwrap()), vec![1, 2, 3]);
        assert_eq!(n(determinacy_audit(&t, 30, &none).unwrap()), vec![1, 2, 3, 5]);
        let seeds: BTreeSet<_> = SEED_INDICES.iter().map(|&k| (0, k)).collect();
        assert!(determinacy_audit(&t, 30, &seeds).unwrap().unresolved.is_empty());
    }
}
