//! Self-contained numerical kernel shared by every physics module.

pub mod bessel;
pub mod laplace;
pub mod minimize;
pub mod quadrature;
pub mod regression;
pub mod roots;
pub mod tridiag;

pub use bessel::{bessel_i0, ln_bessel_i0};
pub use laplace::{integrate_log, LogIntegral};
pub use minimize::{find_basins, minimize_1d, Minimum1D};
pub use quadrature::{integrate, Integral, QuadratureSpec, Transform};
pub use regression::{loglog_fit, PowerFit};
pub use roots::find_root;
pub use tridiag::{symm_tridiag_lowest, TridiagEigen};
