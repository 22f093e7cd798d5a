//! Extended Bloch representation of N-level quantum systems.
//!
//! Density matrices map to real vectors of length `N^2 - 1` through the
//! SU(N) generators, measurements become simplices in that ball, and spin
//! observables along spatial directions get unit Bloch-space representatives.

pub mod bloch;
pub mod cli;
pub mod composite;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod measurement;
pub mod random;
pub mod space;
pub mod spin;

pub use bloch::{BlochVector, DensityState, PureState};
pub use error::{BlochError, Result};
pub use generators::GeneratorSet;
pub use linalg::ComplexMatrix;
pub use spin::{Direction3, Spin, SpinSystem};
