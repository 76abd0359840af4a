//! Numerical laboratory for the shifted wave equation
//! `u_tt = Δ_H² u + u/4 + F(u)` on the hyperbolic plane, restricted to radial data.
//!
//! The crate has two independent solution paths: the integral representation
//! ([`meanprop`], [`globalsolver`]) and a leapfrog finite-difference solver
//! ([`fdoracle`]). [`blowlab`] rebuilds the lower-bound iteration used for blow-up
//! and checks it against simulated solutions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowlab;
pub mod error;
pub mod fdoracle;
pub mod field;
pub mod globalsolver;
pub mod hypgeo;
pub mod meanprop;
pub mod nonlin;
pub mod profile;

pub use error::{Error, Result};
pub use field::SpaceTimeField;
pub use hypgeo::QuadratureConfig;
pub use profile::{Interp, ProfileKind, RadialFn, RadialProfile};
