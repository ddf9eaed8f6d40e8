//! Numerical checks of the qualitative properties of computed profiles.
//!
//! Each check returns its measured quantity alongside a pass flag; a
//! [`VerificationReport`] collects them under stable names.

mod blowup;
mod bounds;
mod inequalities;
mod report;
mod residual;

pub use blowup::{blowup_family, blowup_rescale, blowup_shot, rescale, BlowupReport, RescaleEntry, RescaledProfile};
pub use bounds::{
    apriori_bound, check_cone_bound, check_radial_monotonicity, eps_monotonicity, hardy_integrability, AprioriReport,
    HardyReport, MonotonicityReport, OrderingReport, ORDERING_TOL,
};
pub use inequalities::{monotone_operator_check, picone_check, picone_check_with, MonotoneReport, PiconeReport};
pub use report::{verify_solution, CheckEntry, VerificationReport, RESIDUAL_TOL};
pub use residual::{bump, weak_residual, weak_residual_on, weak_residual_with, DEFAULT_TEST_COUNT};
