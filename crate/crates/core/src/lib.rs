//! Exact symbolic calculus for deployed hyperbolic polycycles.
//!
//! The crate is organized in two layers. The symbolic layer works over an
//! exact coefficient ring of multivariate rational functions: compensators
//! and log-exponential sums ([`logexp`]), the chi-homogeneous block calculus
//! with Euler operators, Wronskians and transverse ideals ([`chi`]), and
//! Hironaka-style division in local polynomial rings ([`division`]). The
//! numeric layer computes Dulac maps of deployed resonant saddles through the
//! Dulac integral operator with an independent ODE oracle ([`dulac`]), and
//! counts limit cycles of polycycle models with Rolle-based bounds and the
//! quasi-spherical blow-up verification ([`polycycle`]).

pub mod chi;
pub mod division;
pub mod dulac;
pub mod error;
pub mod logexp;
pub mod mpoly;
pub mod ode;
pub mod polycycle;
pub mod quad;
pub mod ratfn;
pub mod symbol;

pub use error::Error;
pub use ratfn::RatFn;
pub use symbol::Sym;

pub type Result<T> = std::result::Result<T, Error>;
