//! Interval weighted cumulative residual/past entropies, their equivalent
//! forms and decompositions, and the exponential/GEV closed forms.

mod closed_form;
mod identities;
mod measures;
mod truncation;

pub use closed_form::{
    closed_form_icre_exp, closed_form_iwce_gev, closed_form_iwcre_exp_expweight,
    closed_form_iwcre_exp_poly, Form,
};
pub use identities::{
    delta, delta_bar, delta_bar_psi_form, delta_psi_form, interval_partial_entropy,
    iwce_equivalent_form, iwce_weight_derivative_form, iwcre_equivalent_form, vartheta_decomposition,
    DerivativeVariant, VarthetaSplit,
};
pub(crate) use identities::measure_by_both_routes;
pub use measures::{
    conditional_expectation, icpe, icre, interval_shannon_entropy, iwce, iwcre, truncated_cdf,
    truncated_sf, wce, wcre, Measure,
};
pub(crate) use measures::{
    integrate_cdf_functional, interval_measure, require_nonnegative_weight, try_conditional_expectation,
};
pub use truncation::{EntropyValue, Method, TruncationConvention, TruncationInterval};
