//! Verification and reduction toolkit for `u_t = (u^n)_xx + C/(x+λ) (u^n)_x`.
//!
//! The crate evaluates closed-form solutions, symmetry generators and
//! similarity reductions with exact first and second derivatives (see
//! [`jet`]) and checks each claim against the PDE residual.

// `!(a > b)` is used on purpose where NaN must be rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod error;
pub mod expr;
pub mod jet;
pub mod params;
pub mod pdesolve;
pub mod pde;
pub mod reduction;
pub mod verify;

pub use error::{Error, Result};
pub use jet::{Jet2, Scalar, Taylor2};
pub use params::{PdeParams, Rational};
pub use pde::{conservation_residual, flux_f, flux_g, pde_residual, Rect, ScalarField};
