use std::collections::HashSet;
use std::fmt;

use log::{info, warn};

use super::export::{CorpusMeta, TopicMap};
use super::graph::build_complete_similarity;
use super::prune::{normalize, prune_layers};
use super::MapParams;
use crate::clusters::{detect_communities, CommunityParams};
use crate::corpus::{count_terms, tokenize_all, top_terms, Document, PhraseModel, PhraseParams, RawDocument};
use crate::embedding::{train, EmbeddingModel, TrainParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct BuildConfig {
    pub train: TrainParams,
    pub map: MapParams,
    /// Phrase detection; `None` leaves tokens as they are.
    pub phrases: Option<PhraseParams>,
    pub stopwords: HashSet<String>,
    /// Community detection; `None` exports null community ids.
    pub communities: Option<CommunityParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuildWarning {
    FewerTermsThanRequested { requested: usize, available: usize },
    /// Frequent terms the model has no vector for.
    DroppedTerms(Vec<String>),
}

impl fmt::Display for BuildWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildWarning::FewerTermsThanRequested { requested, available } => write!(
                f,
                "requested {requested} terms but only {available} pass the filters"
            ),
            BuildWarning::DroppedTerms(terms) => write!(
                f,
                "dropped {} terms without vectors: {}",
                terms.len(),
                terms.join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub map: TopicMap,
    pub model: EmbeddingModel,
    pub warnings: Vec<BuildWarning>,
}

/// Trains on `training` and maps the most frequent terms of `counts`, or of
/// `training` itself when no separate counting corpus is given.
pub fn build_map(
    training: &[RawDocument],
    counts: Option<&[RawDocument]>,
    config: &BuildConfig,
) -> Result<BuildOutput> {
    config.train.validate()?;
    config.map.validate()?;

    let mut train_docs = tokenize_all(training);
    let mut count_docs = counts.map(tokenize_all);
    if let Some(p) = config.phrases {
        let phrases = PhraseModel::learn(&train_docs, p);
        info!("learned {} phrases", phrases.len());
        train_docs = phrases.apply_all(&train_docs);
        count_docs = count_docs.map(|d| phrases.apply_all(&d));
    }

    let model = train(&train_docs, &config.train)?;
    let (map, warnings) = map_from_model(&model, count_docs.as_deref().unwrap_or(&train_docs), config)?;
    Ok(BuildOutput { map, model, warnings })
}

/// Builds the map for an already trained model. `documents` must be
/// tokenized the same way as the training corpus.
pub fn map_from_model(
    model: &EmbeddingModel,
    documents: &[Document],
    config: &BuildConfig,
) -> Result<(TopicMap, Vec<BuildWarning>)> {
    config.map.validate()?;
    let params = &config.map;
    let mut warnings = Vec::new();

    let vocab = count_terms(documents, &config.stopwords, config.train.min_count)?;
    let top = top_terms(&vocab, params.terms);
    if top.len() < params.terms {
        warnings.push(BuildWarning::FewerTermsThanRequested {
            requested: params.terms,
            available: top.len(),
        });
    }
    let (terms, dropped): (Vec<String>, Vec<String>) =
        top.into_iter().partition(|t| model.contains(t));
    if !dropped.is_empty() {
        warnings.push(BuildWarning::DroppedTerms(dropped));
    }
    for w in &warnings {
        warn!("{w}");
    }
    if terms.len() < 2 {
        return Err(Error::invalid(format!(
            "only {} mappable terms; need at least 2",
            terms.len()
        )));
    }

    let mut complete = build_complete_similarity(model, &terms)?;
    complete.set_frequencies(|t| vocab.count(t));
    let cap = params.cap.min(terms.len() - 1);
    let graph = normalize(&prune_layers(
        &complete,
        params.base_percentile,
        params.percentile,
        cap,
    )?)?;
    info!(
        "{} terms, {} links ({} primary)",
        graph.nodes().len(),
        graph.links().len(),
        graph.links().iter().filter(|l| l.primary).count()
    );

    let communities = config.communities.as_ref().map(|cp| {
        detect_communities(&graph.filter_links(|l| l.primary), cp).primary
    });

    let map = TopicMap {
        graph,
        map_params: params.clone(),
        train_params: config.train.clone(),
        communities,
        corpus: CorpusMeta {
            documents: vocab.total_documents,
            tokens: vocab.total_tokens,
            vocab: vocab.len() as u64,
        },
    };
    Ok((map, warnings))
}
