//! Word vectors: skip-gram training, cosine queries and analogy evaluation.

mod analogy;
mod io;
mod train;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub use analogy::{
    evaluate_analogies, load_questions, parse_questions, AnalogyQuestion, AnalogyReport,
    QuestionSection, SectionScore,
};
pub use io::{load_model, read_model, save_model, write_model};
pub use train::train;

/// Skip-gram training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    /// Dimensions per vector.
    pub vector_size: usize,
    /// Maximum context radius, in words on each side.
    pub context: usize,
    pub epochs: usize,
    /// Negative samples per positive pair.
    pub negatives: usize,
    /// Frequent-word subsampling parameter; 0 disables subsampling.
    pub subsample: f64,
    pub initial_lr: f64,
    pub min_count: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            vector_size: 250,
            context: 12,
            epochs: 5,
            negatives: 5,
            subsample: 1e-4,
            initial_lr: 0.025,
            min_count: 5,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if self.vector_size < 1 {
            return Err(Error::invalid("vector size must be >= 1"));
        }
        if self.context < 1 {
            return Err(Error::invalid("context size must be >= 1"));
        }
        if self.epochs < 1 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::invalid("initial learning rate must be positive"));
        }
        if !(self.subsample >= 0.0 && self.subsample.is_finite()) {
            return Err(Error::invalid("subsample must be >= 0"));
        }
        if self.min_count < 1 {
            return Err(Error::invalid("min count must be >= 1"));
        }
        if self.workers < 1 {
            return Err(Error::invalid("workers must be >= 1"));
        }
        Ok(())
    }
}

/// What training knew about the model; absent for models loaded from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainMeta {
    pub params: TrainParams,
    pub vocab: Vocabulary,
}

/// Term vectors plus their unit-normalized copies used for all queries.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f32>,
    unit: Vec<f64>,
    meta: Option<TrainMeta>,
}

/// Query for [`EmbeddingModel::nearest`].
#[derive(Debug, Clone, Copy)]
pub enum Query<'a> {
    Term(&'a str),
    Vector(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub term: String,
    pub similarity: f64,
}

impl EmbeddingModel {
    /// Builds a model from terms and a row-major `terms.len() x dim` matrix.
    pub fn from_vectors(terms: Vec<String>, dim: usize, vectors: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("vector dimension must be >= 1"));
        }
        if vectors.len() != terms.len() * dim {
            return Err(Error::invalid(format!(
                "expected {} values for {} terms of dimension {dim}, got {}",
                terms.len() * dim,
                terms.len(),
                vectors.len()
            )));
        }
        if let Some(i) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value in vector of {:?}",
                terms[i / dim]
            )));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate term {t:?}")));
            }
        }
        let mut unit: Vec<f64> = vectors.iter().map(|&v| v as f64).collect();
        for row in unit.chunks_exact_mut(dim) {
            normalize(row);
        }
        Ok(EmbeddingModel {
            terms,
            index,
            dim,
            vectors,
            unit,
            meta: None,
        })
    }

    /// Convenience constructor from `(term, vector)` rows.
    pub fn from_rows<S: Into<String>>(rows: Vec<(S, Vec<f32>)>) -> Result<Self> {
        let dim = rows.first().map_or(0, |(_, v)| v.len());
        let mut terms = Vec::with_capacity(rows.len());
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for (t, v) in rows {
            let t = t.into();
            if v.len() != dim {
                return Err(Error::invalid(format!("vector of {t:?} has wrong length")));
            }
            terms.push(t);
            flat.extend(v);
        }
        Self::from_vectors(terms, dim, flat)
    }

    pub(crate) fn with_meta(mut self, meta: TrainMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn meta(&self) -> Option<&TrainMeta> {
        self.meta.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in model order (descending training frequency for trained models).
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    pub fn index_of(&self, term: &str) -> Result<usize> {
        self.index
            .get(term)
            .copied()
            .ok_or_else(|| Error::UnknownTerm(term.to_string()))
    }

    /// The raw (unnormalized) vector of a term.
    pub fn vector(&self, term: &str) -> Result<&[f32]> {
        let i = self.index_of(term)?;
        Ok(&self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    pub(crate) fn raw_row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn unit_row(&self, i: usize) -> &[f64] {
        &self.unit[i * self.dim..(i + 1) * self.dim]
    }

    pub fn unit_vector(&self, term: &str) -> Result<&[f64]> {
        Ok(self.unit_row(self.index_of(term)?))
    }

    /// Cosine similarity of two terms.
    pub fn similarity(&self, t1: &str, t2: &str) -> Result<f64> {
        let a = self.index_of(t1)?;
        let b = self.index_of(t2)?;
        Ok(dot(self.unit_row(a), self.unit_row(b)))
    }

    /// The `k` terms most similar to `query`, best first, ties broken by term.
    ///
    /// A term query never returns the term itself. Terms in `exclude` are
    /// skipped.
    pub fn nearest(
        &self,
        query: Query<'_>,
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<Vec<Neighbor>> {
        if k < 1 {
            return Err(Error::invalid("k must be >= 1"));
        }
        let (q, skip): (std::borrow::Cow<'_, [f64]>, Option<usize>) = match query {
            Query::Term(t) => {
                let i = self.index_of(t)?;
                (self.unit_row(i).into(), Some(i))
            }
            Query::Vector(v) => {
                if v.len() != self.dim {
                    return Err(Error::invalid(format!(
                        "query vector has dimension {}, model has {}",
                        v.len(),
                        self.dim
                    )));
                }
                let mut v = v.to_vec();
                if normalize(&mut v) < 1e-12 {
                    return Err(Error::ZeroVector);
                }
                (v.into(), None)
            }
        };

        let mut scored: Vec<(f64, &str)> = self
            .terms
            .iter()
            .enumerate()
            .filter(|(i, t)| Some(*i) != skip && !exclude.contains(*t))
            .map(|(i, t)| (dot(&q, self.unit_row(i)), t.as_str()))
            .collect();
        let by_rank =
            |a: &(f64, &str), b: &(f64, &str)| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1));
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, by_rank);
            scored.truncate(k);
        }
        scored.sort_unstable_by(by_rank);
        Ok(scored
            .into_iter()
            .map(|(s, t)| Neighbor {
                term: t.to_string(),
                similarity: s,
            })
            .collect())
    }

    /// Unit-length mean of the members' unit vectors.
    pub fn compound<S: AsRef<str>>(&self, terms: &[S]) -> Result<Vec<f64>> {
        if terms.is_empty() {
            return Err(Error::invalid("compound needs at least one term"));
        }
        let mut acc = vec![0.0; self.dim];
        for t in terms {
            let row = self.unit_vector(t.as_ref())?;
            for (a, x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
        let n = terms.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        if normalize(&mut acc) < 1e-12 {
            return Err(Error::ZeroVector);
        }
        Ok(acc)
    }
}

/// Scales `v` to unit length in place and returns its original norm. Zero
/// vectors are left untouched.
pub(crate) fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Dot product with four independent accumulators so it vectorizes.
/// Element products are commutative, so `dot(a, b) == dot(b, a)` exactly.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; 4];
    let (ac, ar) = a.split_at(a.len() - a.len() % 4);
    let (bc, br) = b.split_at(ac.len());
    for (x, y) in ac.chunks_exact(4).zip(bc.chunks_exact(4)) {
        for j in 0..4 {
            acc[j] += x[j] * y[j];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ar.iter().zip(br) {
        s += x * y;
    }
    s
}

/// Heuristic vector size for a corpus with `vocab_size` distinct terms,
/// scaled from a reference setting so that `V^2 / |vocab|` stays constant.
/// Never below 10.
pub fn suggest_vector_size(ref_v: u64, ref_vocab_size: u64, vocab_size: u64) -> Result<u64> {
    if ref_v < 1 || ref_vocab_size < 1 || vocab_size < 1 {
        return Err(Error::invalid("vector size heuristic inputs must all be >= 1"));
    }
    let v = ref_v as f64 * (vocab_size as f64 / ref_vocab_size as f64).sqrt();
    Ok((v.round() as u64).max(10))
}
