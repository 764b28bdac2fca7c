//! Finite-dimensional modules over the vertex algebra `(C[t], D)`.
//!
//! A module is determined by the single series `T(x) = Y_M(t, x)` with
//! commuting matrix coefficients satisfying `dT/dx = f(T)`. This crate builds
//! the indecomposable untwisted and `g`-twisted modules in closed form,
//! verifies them, and reconstructs them independently from the ODE.

pub mod coeff;
pub mod error;
pub mod exec;
pub mod matser;
pub mod modules;
pub mod polyalg;
pub mod puiseux;
pub mod series;
pub mod sweep;
pub mod verify;

pub use coeff::{Coeff, Rational, Tolerance};
pub use error::{Error, Result};
pub use exec::Execution;
pub use matser::MatSeries;
pub use modules::{ModuleSpec, TwistedModule};
pub use polyalg::Poly;
pub use puiseux::PuiseuxSeries;
pub use series::{Mat, Series};
