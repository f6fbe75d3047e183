//! Numerical laboratory for tunneling in a symmetric magnetic double well.
//!
//! The crate computes Agmon-type action constants, single-well radial
//! spectra and WKB profiles, the hopping coefficient between the wells by
//! independent routes, the sharp tunneling action, and the splitting of the
//! two lowest eigenvalues of the full 2-D magnetic operator on a lattice.

// `!(x > 0.0)` is used deliberately: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agmon;
pub mod asymptotics;
pub mod error;
pub mod hopping;
pub mod numerics;
pub mod potential;
pub mod spectral;
pub mod splitting2d;
pub mod wkb;

pub use error::{Error, Result};
