//! Delta estimators for signature volatility models.

mod bs;
mod delta;
mod model;
mod payoff;
mod weights;

pub use bs::{bs_delta, bs_price, BsKind};
pub use delta::{
    asian_coeff, delta_finite_difference, delta_malliavin, run_delta, run_delta_payoffs, sample_denominators, DeltaProblem, Estimator, Underlying,
    DEFAULT_FD_EPS, DEFAULT_LOCALIZATION,
};
pub use model::{ModelSpec, Sensitivity};
pub use payoff::{Localizer, Payoff};
pub use weights::{universal_asian_weight, universal_delta_weight, universal_weight, closed_form_weight, MalliavinWeight, RationalFunctional, Truncation, WeightKind, WeightPairs};
