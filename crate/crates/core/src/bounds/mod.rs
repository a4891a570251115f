//! Checkers for the inequalities on interval weighted entropies.
//!
//! Each checker returns a [`BoundReport`] holding both sides, the oriented
//! margin and any independent route that was run. Whether a margin must be
//! nonnegative is decided by the caller: several statements only hold
//! under one truncation convention, and the reports record that rather
//! than hide it.

mod checks;
mod quantities;
mod report;

pub use checks::{
    cor21_exponential_check, cor21_limit_form, cor21_uniform_check, prop21_check, thm21_check, thm21_iwcre_check,
    thm22_check, thm22_iwcre_check, thm23_check, thm23_iwcre_check, thm24_check, thm25_check, thm25_iwce_check,
    CheckOptions, ROUTE_TOLERANCE,
};
pub use quantities::{
    eta, eta_bar, gamma_bar_partial, gamma_partial, gfr_h2, mean_abs_psi_deviation, psi_moments,
    reversed_failure_rate, thm23_alpha, thm23_alpha_bar, thm23_alpha_x_route, thm25_lhs, PsiMoments, Thm25Route,
};
pub use report::{real, real_opt, BoundReport, Orientation, TheoremId};
