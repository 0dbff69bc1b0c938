//! Seeded synthetic inputs with known structure, for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::RawDocument;
use crate::embedding::{AnalogyQuestion, EmbeddingModel, QuestionSection};

/// Terms of each topic: `a1..aK` and `b1..bK`.
pub fn topic_terms(per_topic: usize) -> [Vec<String>; 2] {
    ["a", "b"].map(|p| (1..=per_topic).map(|i| format!("{p}{i}")).collect())
}

/// `documents` documents of `length` tokens, each drawn uniformly from the
/// vocabulary of one topic; topics alternate.
pub fn two_topic_corpus(
    documents: usize,
    length: usize,
    per_topic: usize,
    seed: u64,
) -> Vec<RawDocument> {
    let topics = topic_terms(per_topic);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..documents)
        .map(|d| {
            let vocab = &topics[d % 2];
            let words: Vec<&str> = (0..length)
                .map(|_| vocab[rng.random_range(0..vocab.len())].as_str())
                .collect();
            RawDocument {
                id: (d + 1).to_string(),
                text: words.join(" "),
            }
        })
        .collect()
}

/// An embedding in which `capital_i - country_i + country_j` is exactly
/// `capital_j`, with one section of questions over all ordered pairs.
///
/// Countries are `(u_i, -1)` and capitals `(u_i, 1)` for seeded random unit
/// directions `u_i`, so every vector has the same norm and the identity holds
/// for unit vectors too. Random directions keep unrelated terms from tying.
pub fn exact_analogy_model(pairs: usize, seed: u64) -> (EmbeddingModel, Vec<QuestionSection>) {
    let dim = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(2 * pairs);
    for i in 0..pairs {
        let mut u: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f32>().sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        let mut country = u.clone();
        country.push(-1.0);
        let mut capital = u;
        capital.push(1.0);
        rows.push((format!("country{i}"), country));
        rows.push((format!("capital{i}"), capital));
    }
    let model = EmbeddingModel::from_rows(rows).expect("rows are well formed");

    let mut questions = Vec::with_capacity(pairs * pairs.saturating_sub(1));
    for i in 0..pairs {
        for j in 0..pairs {
            if i != j {
                questions.push(AnalogyQuestion {
                    words: [
                        format!("country{i}"),
                        format!("capital{i}"),
                        format!("country{j}"),
                        format!("capital{j}"),
                    ],
                    line: questions.len() + 2,
                });
            }
        }
    }
    let sections = vec![QuestionSection {
        name: "capitals".into(),
        questions,
    }];
    (model, sections)
}

/// The same vectors reassigned to terms by a seeded random permutation.
pub fn permute_terms(model: &EmbeddingModel, seed: u64) -> EmbeddingModel {
    let mut terms = model.terms().to_vec();
    terms.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let rows = terms
        .into_iter()
        .zip(model.terms())
        .map(|(new, old)| (new, model.vector(old).expect("own term").to_vec()))
        .collect();
    EmbeddingModel::from_rows(rows).expect("same shape")
}
