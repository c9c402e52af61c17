//! Numerical support for choosing the prior on the precision parameter of a
//! Dirichlet process: exact cluster-count distributions, sample-size-dependent
//! fits (diffuse, DORO, SCAL, Jeffreys) and sample-size-independent
//! elicitation from stick-breaking weights.

pub mod error;
pub mod kn;
pub mod priors;
pub mod samplers;
pub mod special;
pub mod ssd;
pub mod ssi;

pub(crate) mod exec;
pub(crate) mod opt;
pub(crate) mod quad;

pub use error::{Error, Result};
pub use kn::{KnPmf, MixedKnPmf};
pub use priors::PriorSpec;
pub use samplers::RngStream;
pub use special::StirlingTable;
