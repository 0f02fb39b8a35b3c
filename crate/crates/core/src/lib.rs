//! Numerical toolkit for the L^p-Fisher-Rao Finsler metrics and the
//! Amari–Čencov α-connections on spaces of densities over `[0,1]`.
//!
//! Densities are discretized on a quadrature grid ([`grid`]), mapped to root
//! coordinates by the p-root transform ([`p_root`]), and geodesics are computed
//! in closed form on positive densities ([`dens_geo`]), through a scalar time
//! change on probability densities ([`prob_alpha`]), or by constrained energy
//! minimization on the L^p sphere ([`prob_lp`]). [`tensors`] evaluates the
//! induced Hessian metric, Cartan tensor and Chern-connection terms, and
//! [`parametric`] treats the univariate normal family.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dens_geo;
pub mod error;
pub mod grid;
pub mod interp;
pub mod io;
pub mod ode;
pub mod p_root;
pub mod parametric;
pub mod prob_alpha;
pub mod prob_lp;
pub mod tensors;

pub use error::{Error, Result};
pub use grid::{DensityField, GridSpec, PathGrid, TangentField};
