//! Exact verification of the monster Lie algebra identities at bounded order.
//!
//! The crate is organised bottom-up:
//!
//! * [`series`]: truncated Laurent series in one variable and truncated
//!   bivariate series in `p`, `q`, all over exact rationals, with explicit
//!   windows that only ever report coefficients known to be exact.
//! * [`modular`]: q-expansions of Δ, E₄, E₆, j, J and eta-quotient
//!   Hauptmodul candidates.
//! * [`lie`]: the lattice Π₁,₁, simple roots, the simple-root matrix `B`,
//!   root multiplicities and free Lie algebra dimensions.
//! * [`classes`]: class tables with power maps, McKay–Thompson coefficient
//!   families, Adams operations on traces and the Euler–Poincaré checker.
//! * [`recursion`]: the coefficient relations, the closed Möbius-inverted
//!   formula, the seed propagation solver and the determinacy audit.
//! * [`table`]: the line-oriented class table file format.
//! * [`product`]: the product formula `p(J(p) − J(q)) = ∏ (1 − pⁱqʲ)^c(ij)`.

pub mod arith;
pub mod classes;
pub mod lie;
pub mod modular;
pub mod product;
pub mod recursion;
pub mod series;
pub mod table;

pub use classes::{ClassId, ClassTable, CoefficientFamily, EpReport};
pub use lie::{GradedDims, LatticeVector, SimpleRootList};
pub use modular::{EtaMonomial, EtaRecipe};
pub use recursion::{PartitionMatrix, Relation, SolveOutcome};
pub use series::{BiSeries, Rational, SeriesError, UniSeries};

/// Coefficient family shipped with the crate: classes 1A, 2B, 3B and 4C.
pub const CATALOG: &str = include_str!("../../../data/catalog.mtf");
