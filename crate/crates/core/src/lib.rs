//! Exact-arithmetic verification of plausible-value calculus on finite models.
//!
//! The crate provides:
//!
//! - [`retraction`]: generic finite-set retraction machinery (factorization
//!   through a retraction, commutation / combination / fixed-element rules);
//! - [`boolean`]: finite Boolean algebras of propositions over an atom space;
//! - [`unknowns`]: the commutative algebra of unknown numbers with indicators
//!   and exact rational values;
//! - [`pv`]: plausible-value functionals `PV(X|A)` from strictly positive
//!   weight states, plausibility tables, odds;
//! - [`axioms`]: decision procedures for every plausible-value axiom and
//!   derived rule (product rule, sum rule, additivity), with exact witnesses;
//! - [`cox`]: universal-function extraction from plausibility tables,
//!   associativity / first-argument-homogeneity checks, and a seeded
//!   counterexample search over glued distribution pairs.
//!
//! All values are exact rationals; every check is a total enumeration with
//! zero tolerance, and every failure carries a re-evaluable witness.

pub mod axioms;
pub mod boolean;
pub mod cox;
pub mod pv;
pub mod rational;
pub mod report;
pub mod retraction;
pub mod unknowns;

pub use boolean::{AtomSpace, Proposition, SpaceRef};
pub use pv::{PLTable, PVModel, PlausibleValue, WeightState};
pub use rational::Rat;
pub use report::{Report, Verdict, Witness};
pub use unknowns::{Unknown, World};
