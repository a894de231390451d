//! Exact Følner filling for the uniform boundary condition on bar complexes
//! of amenable groups, together with an exact rational LP oracle for
//! certifying optimal filling norms on finite truncations.
//!
//! Everything is exact: coefficients are big integers, big rationals, or
//! integer step functions on a finite measured set, and every certificate
//! this library emits has been re-verified by an independent boundary
//! computation before it reaches the caller.

pub mod action;
pub mod bar;
pub mod chain;
pub mod coeff;
pub mod cross;
pub mod error;
pub mod group;

pub use error::{Error, Result};
