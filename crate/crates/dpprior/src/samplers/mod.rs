//! Random-variate generation: Jeffreys-prior samplers, stick-breaking
//! weights, ranked-weight maxima and cluster counts.

mod crp;
mod diagnostics;
mod gem;
mod jeffreys;
mod rng;

pub use crp::sample_crp_kn;
pub use diagnostics::integrated_autocorr_time;
pub use gem::{
    estimate_f_alpha, sample_gem, sample_ranked_max, FAlphaCache, FAlphaCacheConfig, FEstimate,
    GemDraw, GemPolicy,
};
pub use jeffreys::{
    sample_jeffreys_ar, sample_jeffreys_ar_chain, sample_jeffreys_mh, sample_jeffreys_slice,
    Chain, MhProposal,
};
pub use rng::RngStream;
