//! Workbench for one-way Number-on-Forehead (NOF) communication.
//!
//! The crate builds the computable objects around lifting two-party one-way
//! lower bounds to NOF lower bounds with the generalized inner product (GIP)
//! gadget over a prime field, and checks each ingredient by exact enumeration
//! or seeded Monte Carlo:
//!
//! * [`field`]: prime-field arithmetic, primes, additive characters, bit strings.
//! * [`functions`]: GIP, lifted functions `f∘GIPᵏ`, EQ / IND / DISJ, the mod-2 function `G`.
//! * [`nof`]: the protocol model, simulator, verifier, built-in protocols and
//!   exact one-way protocol search.
//! * [`fourier`]: cylinder intersections, character sums and the disperser check.
//! * [`combinatorics`]: bipartite common-neighbourhood largeness checks.
//! * [`density`]: the density-increment argument on rectangles and the
//!   three-party disjointness attack.

pub mod combinatorics;
pub mod density;
mod error;
pub mod field;
pub mod fourier;
pub mod functions;
pub mod nof;
pub(crate) mod par;

pub use error::{Error, Result};

/// Largest domain any exhaustive enumeration will walk.
pub const ENUMERATION_LIMIT: u64 = 1 << 24;
