//! Vertical Finsler geometry of m-th root locally Minkowski metrics.
//!
//! The metric `L = A(y)^{1/m}` is given by a homogeneous polynomial `A` of
//! degree `m` (or a product of `m = n` linear forms). From it the crate
//! evaluates, at a direction `y`:
//!
//! * the fundamental tensor `g_ij` and its inverse,
//! * the Cartan torsion `C_jkm`, `C^i_jk` and its vertical gradient,
//! * the vertical curvature `S^l_ijk`, `S_imjk`, Ricci and scalar curvature,
//! * the vertical Einstein-like residual `S_ij − (S/2) g_ij = κ T̃_ij`.
//!
//! [`oracle`] holds finite-difference and dual-number differentiation that is
//! independent of the analytic path, and [`check`] runs the full battery of
//! invariants used to certify the analytic formulas.

pub mod check;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod metric;
pub mod oracle;
pub mod power;
pub mod tensor;

pub use error::{Error, Result};
pub use metric::{Direction, PolynomialMetric};
pub use tensor::Tensor;
