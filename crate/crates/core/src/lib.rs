//! Multigrid preconditioning for the lowest-order Crouzeix-Raviart (CR)
//! nonconforming discretization of `-div(kappa grad u) = f` with
//! piecewise-constant, possibly high-contrast, coefficients.
//!
//! The preconditioner is a symmetric V-cycle whose coarse spaces are the
//! nested conforming P1 spaces `V_0 ⊂ … ⊂ V_J`, with the CR space on the
//! finest mesh sitting on top of the chain. Between conforming levels the
//! usual linear interpolation is used; from `V_J` into the CR space the
//! prolongation is the matrix of the natural inclusion, whose entries are all
//! `1/d`.
//!
//! Module map:
//!
//! * [`mesh`]: coefficient-resolving initial triangulations and uniform refinement
//! * [`assembly`]: P1 and CR stiffness matrices, load vectors, Dirichlet elimination
//! * [`transfer`]: nested P1 interpolation and the conforming-to-CR inclusion
//! * [`sparse`] / [`dense`]: CSR kernels, smoothers, Cholesky, symmetric eigensolvers
//! * [`mgcycle`]: the level hierarchy and the V-cycle preconditioner
//! * [`operator`]: the linear-operator abstraction shared by PCG and Lanczos
//! * [`krylov`]: PCG, Lanczos spectrum estimation, effective condition numbers
//! * [`experiment`]: the parameter sweeps, tables and dumps driven by the CLI

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod krylov;
pub mod mesh;
pub mod mgcycle;
pub mod operator;
pub mod par;
pub mod sparse;
pub mod transfer;

pub use error::{Error, Result};
