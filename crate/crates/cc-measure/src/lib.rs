//! Metric derivatives of degree `k`, dimensioned lengths, interpolation
//! complexity and Hausdorff-type measure bounds for curves in
//! Carnot-Caratheodory spaces (Heisenberg, Engel) and in Euclidean space.
//!
//! The crate is organised around four layers:
//!
//! * [`spaces`] - distance engines, dilations and group operations,
//! * [`curves`] - curve representations and the degree-`k` derivative
//!   estimators,
//! * [`measures`] - `k`-dimensional length, epsilon-chain complexity,
//!   metric entropy, constructive Hausdorff/spherical upper bounds and
//!   density profiles,
//! * [`rect`] - finite families of curves modelling rectifiable sets and
//!   their density bounds.
//!
//! The `cc-measure` binary exposes the same operations as a CLI that writes
//! CSV tables and JSON summaries.

pub mod config;
pub mod curves;
pub mod error;
pub mod measures;
pub mod rect;
pub mod report;
pub mod spaces;

pub use error::{Error, Result};
