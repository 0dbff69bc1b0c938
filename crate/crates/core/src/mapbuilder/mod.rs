//! Topic map construction: similarity network over the most frequent terms,
//! pruned to its strongest links and min-max normalized.

mod build;
mod export;
mod graph;
mod prune;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use build::{build_map, map_from_model, BuildConfig, BuildOutput, BuildWarning};
pub use export::{CorpusMeta, TopicMap};
pub use graph::{build_complete_similarity, Link, Node, TermGraph};
pub use prune::{normalize, percentile_threshold, prune, prune_layers, PruneRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    /// Number of most frequent terms to map.
    pub terms: usize,
    /// Percentile (as a fraction) of all pair similarities a link must reach.
    pub percentile: f64,
    /// Maximum links per term.
    pub cap: usize,
    /// Relaxed percentile for the exported base layer; at most `percentile`.
    pub base_percentile: f64,
}

impl Default for MapParams {
    fn default() -> Self {
        MapParams {
            terms: 500,
            percentile: 0.985,
            cap: 12,
            base_percentile: 0.95,
        }
    }
}

impl MapParams {
    pub fn validate(&self) -> Result<()> {
        if self.terms < 2 {
            return Err(Error::invalid("number of terms must be >= 2"));
        }
        if self.cap < 1 {
            return Err(Error::invalid("link cap must be >= 1"));
        }
        if !(self.percentile > 0.0 && self.percentile < 1.0) {
            return Err(Error::invalid("percentile must be in (0, 1)"));
        }
        if !(self.base_percentile > 0.0 && self.base_percentile <= self.percentile) {
            return Err(Error::invalid(
                "base percentile must be in (0, percentile]",
            ));
        }
        Ok(())
    }
}
