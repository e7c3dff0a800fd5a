//! Exact no-arbitrage analysis for finite-state, discrete-time markets.
//!
//! Everything is decided over exact rationals by a single certified simplex
//! ([`lp`]). On top of it sit the vector lattice of random variables
//! ([`lattice`]), finitely generated cones and semi-solid sets with their gauges
//! ([`cone`]), filtered markets with their arbitrage, martingale-measure and
//! superreplication programs ([`market`]), constructive separating functionals
//! ([`separation`]), the cross-checked concept verdicts ([`concepts`]) and the
//! randomized property lab ([`lab`]). [`format`] and [`cli`] provide the JSON
//! file formats and the `noarb` command line.

pub mod cli;
pub mod concepts;
pub mod cone;
pub mod error;
pub mod format;
pub mod lab;
pub mod lattice;
pub mod lp;
pub mod market;
pub mod num;
pub mod separation;

pub use error::{Error, Result};
pub use num::Rational;
