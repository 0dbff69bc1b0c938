//! Topic maps: train word vectors on a corpus, connect its most frequent
//! terms by cosine similarity, prune the network to its strongest links and
//! group the result into communities.
//!
//! The pipeline is [`mapbuilder::build_map`]; each stage is also usable on
//! its own.

pub mod clusters;
pub mod corpus;
pub mod embedding;
mod error;
pub mod mapbuilder;
pub mod synthetic;

pub use error::{Error, Result};
