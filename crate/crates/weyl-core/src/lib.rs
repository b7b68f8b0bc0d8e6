//! Exact computational representation theory of twisted loop algebras.
//!
//! Everything is computed over the cyclotomic fields `Q(zeta_m)`, `m = 1, 2, 3`,
//! with arbitrary-precision rational coefficients; there is no floating point
//! anywhere. The crate is `no_std` (with `alloc`): all IO, JSON and CLI live in
//! the companion `weyl-cli` crate.
//!
//! Module map:
//! * [`scalar`] — exact arithmetic in `Q(zeta_m)`.
//! * [`linalg`] — dense exact Gaussian elimination (row spaces, rank, nullspace).
//! * [`rootdata`] — finite root systems, diagram automorphisms, folded data.
//! * [`liealg`] — Chevalley bases, lifted automorphisms, graded pieces,
//!   twisted generators.
//! * [`looplie`] — loop algebras, twisted membership, truncated quotients.
//! * [`xi`] — finitely supported functions on `C*`, equivariance, the
//!   symmetrizer, orbit multisets.
//! * [`hwalg`] — the highest-weight algebra as symmetric Laurent polynomials.
//! * [`weylmod`] — PBW straightening, cyclic highest-weight quotients, local
//!   Weyl modules, Garland identities, embedding checks.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod hwalg;
pub mod liealg;
pub mod linalg;
pub mod looplie;
pub mod rootdata;
pub mod scalar;
pub mod weylmod;
pub mod xi;

pub use scalar::{Rational, Scalar};
