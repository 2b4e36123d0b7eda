//! Spectral simulator for the damped rotating Gross-Pitaevskii equation
//!
//! ```text
//! (i - gamma) d_t psi = -1/2 Laplacian psi + V psi + g |psi|^{2 sigma} psi - Omega L psi - mu[psi] psi
//! ```
//!
//! with the mass-conserving chemical potential `mu[psi]`. The crate provides
//! the discretization ([`grid`]), the linear Hamiltonian ([`operators`]),
//! observables ([`functionals`]), time stepping ([`evolution`]), the analytic
//! eigenbasis and its mode ODE ([`spectral_basis`]), ground-state computation
//! ([`ground_state`]), file formats and the command line ([`io`], [`cli`]).

// `!(x > 0.0)` is the NaN-rejecting form used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod evolution;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod io;
pub mod operators;
pub mod params;
pub mod selfcheck;
pub mod spectral_basis;
pub(crate) mod sum;

pub use error::{Error, Result};
pub use grid::{spectral_derivative, ComplexField, Grid, Space};
pub use params::PhysParams;
