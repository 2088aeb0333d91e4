//! Symbolic-numeric toolkit for central charges on toric Calabi-Yau stacks.
//!
//! The crate is organized around a validated stacky fan:
//!
//! * [`lattice`] — exact combinatorics: cones, box elements, stars, quotient
//!   fans, tropical polytopes and residual volumes.
//! * [`cohomology`] — per-sector cohomology rings and compactly supported
//!   modules, integration, Todd and Gamma classes.
//! * [`ktheory`] — K-classes, Chern characters and the Euler pairing.
//! * [`hypergeometric`] — cohomology-valued Gamma series and B-brane central
//!   charges.
//! * [`periods`] — A-brane central charges as numerical period integrals,
//!   with tropical tail bounds and asymptotics.
//! * [`duality`] — the xi-coefficient pairing between the two solution
//!   spaces and the verification suites built on it.
//! * [`io`] — fan and K-class file formats used by the CLI.

pub mod arith;
pub mod cohomology;
pub mod duality;
pub mod hypergeometric;
pub mod io;
pub mod ktheory;
pub mod lattice;
pub mod periods;
pub mod scalar;
pub mod special;

#[cfg(test)]
pub(crate) mod testfans;
