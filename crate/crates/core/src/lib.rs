//! Evaluation and verification toolkit for the quadruple hypergeometric
//! function K₂ and the series families it decomposes into.
//!
//! The crate is organised as
//!
//! - [`series`]: truncated multiple power series (K₂, ₂F₁, Appell F₄,
//!   Lauricella F_C⁽⁴⁾ and a terminating Srivastava F⁽³⁾ shape) with tail
//!   estimates and parameter-shift derivatives;
//! - [`pde`]: the Euler-operator and second-order forms of the K₂ system,
//!   the sixteen Frobenius-type solutions and a numerical rank test;
//! - [`opcalc`]: exact rational operational calculus for derivative and
//!   antiderivative words acting on monomials;
//! - [`identities`]: numeric verification of finite-sum and decomposition
//!   formulas, reporting every candidate form side by side;
//! - [`cli`]: the `k2quad` command-line front end.

pub mod cli;
pub mod error;
pub mod identities;
pub mod opcalc;
pub mod pde;
pub mod pochhammer;
pub mod series;

pub use error::{Error, Result};
pub use series::{K2Params, MultiIndex4, Point4, SeriesValue, TruncationPolicy};
