//! Simulation and verification tools for discrete line ensembles arising
//! from the asymmetric simple exclusion process, the stochastic six-vertex
//! model and the ascending Hall-Littlewood process.
//!
//! * [`paths`]: up-right lattice paths and uniform bridge measures.
//! * [`gibbs`]: the Hall-Littlewood Gibbs weight, acceptance probability,
//!   rejection resampling and monotonicity verifiers.
//! * [`hallittlewood`]: partitions, skew Hall-Littlewood coefficients, the
//!   ascending process, plane partitions and their Metropolis chain.
//! * [`sixvertex`]: the stochastic six-vertex model in a quadrant.
//! * [`asep`]: continuous-time exclusion with step initial data.
//! * [`coupling`]: the dyadic coupling of Bernoulli bridges with Brownian
//!   bridges and the associated local limit checks.
//! * [`analysis`]: KPZ scaling maps, empirical statistics and diagnostics.
//! * [`harness`]: seeding, replica execution and run persistence.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod asep;
pub mod coupling;
pub mod error;
pub mod gibbs;
pub mod hallittlewood;
pub mod harness;
pub mod paths;
pub mod sixvertex;

pub use error::{Error, Result};
