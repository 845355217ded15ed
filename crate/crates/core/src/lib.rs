//! Pseudospectral tools for the cubic defocusing Schroedinger equation on
//! the cylinder R x T, together with a laboratory for the frequency-space
//! multipliers that control its long-time Sobolev growth.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod estimate_lab;
pub mod field;
pub mod fit;
pub mod grid;
pub mod multiplier;
pub mod snapshot;
pub mod study;

pub use num_complex;

pub use error::{Error, Result};
pub use field::{forward_transform, inverse_transform, SpaceTimeTrace, SpectralField};
pub use grid::{Freq, Grid};
pub use multiplier::MultiplierSpec;
