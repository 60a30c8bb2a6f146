//! Elliptic integrals via the AGM, standard modular forms as q-expansions,
//! and rigorous point evaluation on the upper half-plane.

mod agm;
mod eval;
mod forms;

pub use agm::{agm, ellip_e, ellip_e_over_k, ellip_k, NearOneSeries};
pub use eval::{
    max_abs_on_circle, min_abs_on_circle, AxisRoute, AxisValues, CSeriesSet, FormPoint, SpecialCtx,
};
pub use forms::{FormId, StandardForms};
