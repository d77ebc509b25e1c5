//! Period-domain dynamics over indefinite integral quadratic lattices.
//!
//! The core crate is `no_std` (alloc required) and carries the exact and
//! floating-point machinery:
//!
//! - [`lattice`]: integral quadratic lattices, exact form evaluation,
//!   inertia signature, Fujiki-form polarization recovery, reflections,
//!   and Neron-Severi sublattice detection.
//! - [`period`]: the period quadric and its Grassmannian model: positive
//!   oriented 2-planes, hyperkahler 3-planes, twistor spheres, the
//!   positive-cone component selector, and principal-angle distances.
//! - [`monodromy`]: reflection generator sets for finite-covolume
//!   subgroups of the orthogonal group, random words, plane actions.
//! - [`dynamics`]: the ergodic / closed-orbit classifier and random-walk
//!   coverage diagnostics.
//! - [`connectivity`]: chains of twistor curves through generic 3-planes
//!   connecting nearby period points inside a ball.
//!
//! IO, file formats, and the CLI live in the companion `period-dynamics`
//! crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod connectivity;
pub mod dynamics;
pub mod enumerate;
pub mod lattice;
pub mod mat;
pub mod monodromy;
pub mod period;
pub mod rng;

pub use lattice::{LatticeError, LatticeVector, QuadraticLattice, RealVector, SublatticeBasis};
pub use period::{ConeComponentLabel, PeriodPoint, PlaneError, ThreePlane, TwoPlane};

/// Geometric tolerance used for plane invariants unless overridden.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Default coordinate bound for Neron-Severi and genericity enumeration.
pub const DEFAULT_HEIGHT_BOUND: i64 = 10;
