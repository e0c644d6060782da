//! Shearfree Lorentzian lifts of three-dimensional Sasakian CR manifolds.
//!
//! A Sasakian CR manifold embedded as `v = F(z, zbar)` in `C^2` is lifted to a
//! four-dimensional Lorentzian metric
//!
//! ```text
//! g = 2 P^2 ( mu mubar + lambda (dr + W mu + Wbar mubar + H lambda) )
//! ```
//!
//! whose Ricci tensor has the quasi-Einstein form `Ric = Lambda g + Phi lambda^2`.
//! The conformal factor comes from a logistic elliptic equation (an ODE for
//! tubular potentials). Every lift can be checked by an independent
//! finite-difference curvature engine.
//!
//! Pipeline: [`potential`] → [`cr`] → [`solver`] → [`lift`] → [`curvature`].

// index loops read better for tensors; `!(a > b)` comparisons are there to reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod cr;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod forms;
pub mod jet;
pub mod lift;
pub mod potential;
pub mod report;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use jet::{Analytic, Jet1, Jet2, ORDER};
