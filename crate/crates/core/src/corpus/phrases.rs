use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Document;

/// Settings for bigram phrase detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhraseParams {
    pub discount: f64,
    pub threshold: f64,
}

impl Default for PhraseParams {
    fn default() -> Self {
        PhraseParams {
            discount: 5.0,
            threshold: 100.0,
        }
    }
}

/// A set of adjacent term pairs to merge into single `a_b` terms.
///
/// Learned once (typically on the training corpus) and then applied to any
/// corpus, so a foreground corpus ends up with the same phrase terms as the
/// background one.
#[derive(Debug, Clone, Default)]
pub struct PhraseModel {
    // first term -> second terms
    pairs: HashMap<String, HashSet<String>>,
}

type Counts<'a> = (HashMap<&'a str, u64>, HashMap<(&'a str, &'a str), u64>);

impl PhraseModel {
    /// Scores every adjacent pair `(a, b)` as
    /// `(count(ab) - discount) / (count(a) * count(b)) * total_tokens`
    /// and keeps those scoring at least `threshold`.
    pub fn learn(documents: &[Document], params: PhraseParams) -> Self {
        let (unigrams, bigrams): Counts = documents
            .par_iter()
            .fold(
                || (HashMap::new(), HashMap::new()),
                |(mut uni, mut bi): Counts, doc| {
                    for t in &doc.tokens {
                        *uni.entry(t.as_str()).or_default() += 1;
                    }
                    for w in doc.tokens.windows(2) {
                        *bi.entry((w[0].as_str(), w[1].as_str())).or_default() += 1;
                    }
                    (uni, bi)
                },
            )
            .reduce(
                || (HashMap::new(), HashMap::new()),
                |(mut ua, mut ba), (ub, bb)| {
                    for (k, v) in ub {
                        *ua.entry(k).or_default() += v;
                    }
                    for (k, v) in bb {
                        *ba.entry(k).or_default() += v;
                    }
                    (ua, ba)
                },
            );
        let total = unigrams.values().sum::<u64>() as f64;

        let mut pairs: HashMap<String, HashSet<String>> = HashMap::new();
        for ((a, b), ab) in bigrams {
            let denom = (unigrams[a] * unigrams[b]) as f64;
            if (ab as f64 - params.discount) / denom * total >= params.threshold {
                pairs.entry(a.to_string()).or_default().insert(b.to_string());
            }
        }
        PhraseModel { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.values().map(HashSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.pairs.get(a).is_some_and(|s| s.contains(b))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs
            .iter()
            .flat_map(|(a, bs)| bs.iter().map(move |b| (a.as_str(), b.as_str())))
    }

    /// Merges known pairs greedily from left to right, without overlap.
    pub fn apply(&self, doc: &Document) -> Document {
        if self.pairs.is_empty() {
            return doc.clone();
        }
        let toks = &doc.tokens;
        let mut out = Vec::with_capacity(toks.len());
        let mut i = 0;
        while i < toks.len() {
            if i + 1 < toks.len() && self.contains(&toks[i], &toks[i + 1]) {
                out.push(format!("{}_{}", toks[i], toks[i + 1]));
                i += 2;
            } else {
                out.push(toks[i].clone());
                i += 1;
            }
        }
        Document::new(doc.id.clone(), out)
    }

    pub fn apply_all(&self, documents: &[Document]) -> Vec<Document> {
        documents.par_iter().map(|d| self.apply(d)).collect()
    }
}

/// Learns phrases on `documents` and merges them in one pass.
pub fn detect_phrases(documents: &[Document], discount: f64, score_threshold: f64) -> Vec<Document> {
    let model = PhraseModel::learn(
        documents,
        PhraseParams {
            discount,
            threshold: score_threshold,
        },
    );
    model.apply_all(documents)
}
