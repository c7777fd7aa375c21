//! Solvers for the unilateral quadratic matrix equations
//! `A0 + A1 X + A2 X^2 = 0` and `X^2 A0 + X A1 + A2 = 0`.
//!
//! The centerpiece is [`bscr::bscr_solve`], block-shifted cyclic reduction,
//! which handles polynomials with several double eigenvalues on the unit
//! circle (null-recurrent QBDs and friends) where plain CR only converges
//! linearly or not at all. Classical CR, shifted CR and the U-based
//! fixed-point iteration are provided as baselines, together with generators
//! for the standard test problems and a benchmark harness.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod bench;
pub mod bscr;
pub mod cr;
pub mod dense;
pub mod error;
pub mod io;
pub mod poly;
pub mod problems;
pub mod report;
pub mod shift;
pub mod small_qme;
pub mod subspace;

pub use dense::{Matrix, C64};
pub use error::{QmeError, Result};
pub use report::SolveReport;
