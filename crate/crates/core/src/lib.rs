//! Decoding thresholds and finite-length error analysis of regular LDPC
//! codes under message-passing decoding.
//!
//! - [`graph`]: Tanner graphs, configuration-model sampling and expansion.
//! - [`de`]: density evolution and threshold search.
//! - [`decoders`]: Gallager B, linearized Gallager B, min-sum and belief
//!   propagation decoders.
//! - [`marking`]: the marking process, witnesses and exhaustive oracles.
//! - [`rprocess`]: the R-process, birth-death tails and FKG checks.
//!
//! Randomness is derived from a master seed by counters (see [`rng`]), so
//! results are reproducible and independent of the thread count.

pub mod de;
pub mod decoders;
pub mod error;
pub mod graph;
pub mod marking;
pub mod rng;
pub mod rprocess;

pub use decoders::{Channel, Decoder, DecoderSpec, NoiseRealization};
pub use error::{Error, Result};
pub use graph::TannerGraph;
