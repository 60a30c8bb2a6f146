//! The group algebra of PSL_2(Z): reduced words, the six-dimensional
//! representation, reduction modulo the functional-equation ideal with
//! witnesses, and the residue functionals.

mod rep;
mod words;

pub use rep::{
    basis_words, mat6_mul, phi, reduce_mod_i, rho_of, sigma_of, verify_reduction, Mat6,
    PhiVariant, ReductionResult, RVec6, G_RHO_SIGMA, MAT6_I, SIGMA_S, SIGMA_T,
};
pub use words::{
    check_column_domination, frobenius_sq, mat_canonical, mat_inv, mat_mul, parse_word, rational,
    solve_shift, ColumnDominationReport, GroupAlgebraElement, Letter, Mat2, PslWord, MAT_I, MAT_S,
    MAT_T,
};
