//! Transport of classical and few-photon quantum light through a finite,
//! driven one-dimensional medium described by the nonlinear Schrodinger
//! equation with open boundaries.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod linear;
pub mod ode;
pub mod semiclassical;
pub mod quantum;
pub mod spectral;
pub mod numeric;
pub mod params;
pub mod table;

pub use num_complex::Complex64 as C64;
pub use params::{DimensionlessParams, PhysicalParams};
pub use table::SpectrumTable;
