//! Sample-size-independent elicitation: hyperparameters from partition
//! probabilities on the precision parameter, and the joint densities of the
//! leading stick-breaking weights (size-biased and ranked) they imply.

mod elicit;
mod regimes;
mod weights;

pub use elicit::{elicit, elicit_exponential_closed_form, ElicitFamily, ElicitResult, ElicitationProblem};
pub use regimes::{
    ranked_w1_min_location, ranked_w2_min_location, regime_derivative_signs, sb_w1_max_location,
    RegimeReport, SliceBehavior,
};
pub use weights::{
    ranked_joint_density, ranked_mixed_density, sb_joint_density, sb_joint_density_prefix,
    sb_mixed_density, sb_mixed_gamma_cdf_w1, sb_mixed_gamma_density, sb_mixed_gamma_marginal_w1,
    weights_grid, weights_grid_seq, GridPoint, WeightsGiven, WeightsMode,
};
