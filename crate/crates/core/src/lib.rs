//! Rigorous numerics for modular-form kernels and lattice energy bounds.
//!
//! The crate is organized bottom-up:
//!
//! - [`rigor`]: arbitrary-precision interval arithmetic (outward rounded) over
//!   dyadic floats, plus axis-aligned complex boxes.
//! - [`qseries`]: truncated formal series in `q^{1/2} = e^{pi i z}` with
//!   pluggable coefficient rings and geometric tail bounds.
//! - [`special`]: elliptic integrals via the AGM, the classical level-1 and
//!   level-2 modular forms, and point evaluation on the upper half-plane.
//! - [`grpalg`]: the group algebra of `PSL_2(Z)` with reduced words, the
//!   six-dimensional representation, and ideal reduction.
//! - [`kernels`]: the bilinear modular kernels, their residues, functional
//!   equations, and non-decaying asymptotics.
//! - [`interp`]: Laplace-transform construction of the generating functions
//!   and the radial interpolation basis.
//! - [`energy`]: lattice theta series, Gaussian/Epstein energies, and the
//!   linear programming bound.
//! - [`positivity`]: kernel positivity certification on the unit square in
//!   lambda coordinates.
//!
//! The crate is `no_std` (with `alloc`); all evaluation contexts are explicit
//! so there is no global state.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod energy;
pub mod grpalg;
pub mod interp;
pub mod kernels;
pub mod positivity;
pub mod qseries;
pub mod rigor;
pub mod special;

/// Errors shared across the evaluation layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Operation left its mathematical domain (division by an interval
    /// containing zero, log of a nonpositive interval, ...).
    DomainError,
    /// Series inversion with a non-invertible leading coefficient.
    ZeroLeadingCoefficient,
    /// Series composition with an inner series of nonpositive valuation.
    NonpositiveValuation,
    /// Rigorous evaluation requested but no tail bound is attached.
    TailUnavailable,
    /// Evaluation point outside the convergence domain of a series.
    ConvergenceDomain,
    /// Matrix is not in `SL_2(Z)` (or not unimodular).
    NotUnimodular,
    /// Word does not lie in the level-2 congruence subgroup.
    NotInGammaTwo,
    /// Kernel evaluated on (or across) the diagonal without compensation.
    DiagonalSingularity,
    /// Kernel evaluated at a translate of the base point carrying a residue.
    PoleAtTranslate,
    /// Residue extraction at a point where the pole is not simple.
    HigherOrderPole,
    /// Requested point is outside the admissible domain of the operation.
    OutsideDomain,
    /// Continuation data for the requested radius is not available.
    OutsideValidity,
    /// Taylor/edge bound failed because the remainder dominates.
    InsufficientOrder,
    /// Gram matrix is not positive definite.
    NotPositiveDefinite,
    /// Epstein zeta evaluated at its pole `s = d/2`.
    PoleAt,
    /// Subdivision budget exhausted before the region was certified.
    BudgetExceeded,
}

pub type Result<T> = core::result::Result<T, Error>;
