//! Desk-scale laboratory for local-to-global questions in groups of
//! Mordell–Weil type.
//!
//! The crate builds trace-zero lattices `Λ = {M·P : tr M = 0}` from points
//! on elliptic curves over Q, reduces them at good primes, and produces
//! machine-checkable fixing-matrix certificates showing `P̄ ∈ Λ̄` at each
//! place while `P ∉ Λ` globally. It also scans reduction orders for
//! prescribed `l`-adic valuation patterns, checks torsion injectivity, and
//! compares orbits of endomorphisms globally and modulo primes.

pub(crate) mod bigint_serde;
pub mod cli;
pub mod dynamics;
pub mod ec;
pub mod error;
pub mod finite_abelian;
pub mod fixture;
pub mod local_global;
pub mod reduction;
pub mod report;
pub mod zmodule;

pub use error::{Error, Result};
