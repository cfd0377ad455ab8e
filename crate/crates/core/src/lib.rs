//! Finite-mixture (stochastic block) models for large discrete-valued networks.
//!
//! The crate is `no_std` and only needs an allocator. It provides
//!
//! * a sparse dyad store ([`SparseNetwork`]) over a finite dyad alphabet,
//! * tabular and exponential-family dyad models ([`model`]),
//! * the variational generalized EM fitter with a minorize-maximize E-step ([`engine`]),
//! * the sparse Monte Carlo network sampler ([`simulate`]),
//! * parametric bootstrap with label-anchored refits ([`bootstrap`]).
//!
//! File formats, the command line and thread pools live in the `blockmix` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod alphabet;
pub mod bootstrap;
pub mod engine;
mod error;
pub mod math;
pub mod metrics;
pub mod model;
pub mod network;
pub mod rng;
pub mod simulate;

pub use alphabet::{Dyad, DyadAlphabet, EdgeAlphabet};
pub use error::{Error, Result};
pub use network::SparseNetwork;
