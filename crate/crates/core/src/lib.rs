//! Discounted-cost Brownian inventory control with a two-step,
//! quantity-dependent setup cost.
//!
//! The inventory level follows `dZ = -mu dt + sigma dB` between orders. An
//! order of size `xi` costs `K(xi) + k xi`, where `K(xi) = K1` for
//! `0 < xi <= Q` and `K2` above the threshold. This crate computes the two
//! constrained `(s, S)` bands (orders capped at `Q` with setup `K1`, orders of
//! at least `Q` with setup `K2`), decides which regime is optimal, builds the
//! state-dependent order-up-to policy when the capped band wins, and evaluates
//! every discounted cost in closed form.
//!
//! Layout:
//!
//! - [`model`]: parameters, holding-cost families, assumption checks.
//! - [`kernel`]: characteristic roots, the `Lambda` integrals, the band
//!   objective `A(s, S)`, and the value family `v_A` with three derivatives.
//! - [`solver`]: both constrained band problems, `S-bar`, `s-low`, `Xi`,
//!   regime classification and threshold sweeps.
//! - [`policy`]: ordering rules and their closed-form discounted costs.
//! - [`verify`]: lower-bound condition checks, quasi-convexity, and an
//!   exhaustive grid oracle for the band problems.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod kernel;
pub mod model;
pub mod policy;
pub mod quadrature;
pub mod roots;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{ABounds, Kernel, Roots};
pub use model::{HoldingCost, Model, ModelParams, ValidationReport};
pub use policy::{CostCurve, Policy};
pub use solver::{BandSolution, GeneralizedLevels, QSweep, QSweepRow, Regime, RegimeReport, Subproblem};
