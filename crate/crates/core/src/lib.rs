//! Simulation and verification workbench for Gibbsian facet processes.
//!
//! The model lives on a bounded window `[0,b]^d`. A facet is an axis-aligned
//! `(d-1)`-dimensional cube of side `2b` centred in the window and normal to a
//! canonical direction. A reference Poisson process drops facets with
//! intensity `a * chi(z) dz` and uniform orientation; the Gibbs process
//! reweights it by `exp(sum_i nu_i G_i)`, where `G_j` sums the `(d-j)`-volume
//! of every `j`-wise facet intersection. The crate provides:
//!
//! * exact intersection measures and U-statistics ([`geometry`], [`ustats`]),
//! * row-constrained partition and pairing enumeration ([`combinatorics`]),
//! * Poisson, rejection and birth-death-move MCMC samplers ([`samplers`]),
//! * correlation-function limits, truncated series, moment integrals and the
//!   asymptotic covariance of the standardized statistics ([`asymptotics`]),
//! * mixed-moment assembly via partition formulas ([`moments`]),
//! * an experiment harness with KS-based distributional checks ([`harness`]),
//! * the exactly solvable two-orientation count law used as a test oracle
//!   ([`reference`]).

pub mod asymptotics;
pub mod combinatorics;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod moments;
mod numeric;
pub mod reference;
pub mod samplers;
pub mod ustats;

pub use error::{Error, Result};
