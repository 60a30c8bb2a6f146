//! Laplace-transform construction of the generating functions and the radial
//! interpolation basis.

mod fgen;
mod quad;

pub use fgen::{
    eval_zseries_at, radial_derivative, radial_second_derivative, sin_half_pi_over_shift_c,
    sin_sq_half_pi_c, FGen, InterpConfig, TauData,
};
pub use quad::{ComplexIntegrand, GaussRule, QuadCtx};
