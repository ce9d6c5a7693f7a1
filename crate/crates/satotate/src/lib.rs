//! Arithmetic statistics for the superelliptic curve family
//! `C_l : y^l = x(x^l - 1)`, `l` an odd prime.
//!
//! The Jacobian of `C_l` has complex multiplication by `Q(zeta_{l^2})`,
//! genus `g = l(l-1)/2`, and Sato-Tate group `<U(1)^g, gamma>` for an
//! explicit block-signed permutation matrix `gamma`. This crate computes:
//!
//! * exact point counts `#C_l(F_q)` for primes `q` (naive enumeration and
//!   a Jacobi-sum formula, cross-checked against each other),
//! * the exponent calculus behind the CM endomorphism and the generator
//!   `gamma` of the Sato-Tate component group, with machine verification
//!   of the identities it satisfies,
//! * exact a1-moments of the Sato-Tate measure and Monte-Carlo moments of
//!   all L-polynomial coefficients,
//! * numerical a1 statistics over prime ranges, with a persistent cache.
//!
//! The `satotate` binary in this workspace exposes all of it on the
//! command line.

pub mod arith;
pub mod counting;
mod error;
pub mod ltrace;
pub mod moments;
pub mod stgroup;

pub use error::{Error, Result};

/// Default memory guard: tables indexed by a prime `q` refuse `q` above this.
pub const DEFAULT_MEMORY_GUARD: u64 = 1 << 26;
