//! Scoring alternatives from pairwise winning indices.
//!
//! The pipeline standardizes a performance matrix, estimates pairwise winning
//! indices by sampling weighted-sum models, and then looks for additive value
//! functions whose utility differences are proportional to the winning-index
//! margins. The resulting utilities give a complete ranking of the
//! alternatives.

pub mod analysis;
pub mod error;
pub mod model;
pub mod normalize;
pub mod sampler;
pub mod scoring;
pub mod solver;

pub use error::{Error, Result};
