//! Corpus ingestion: tokenization, bigram phrases and term statistics.
//!
//! Terms are lowercase runs of letters and digits. A `.` or `-` is kept when
//! it sits between two such characters, so `U.S.` becomes `u.s` and
//! `forward-looking` stays whole. Everything else separates terms.

mod phrases;
pub mod stopwords;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use phrases::{detect_phrases, PhraseModel, PhraseParams};

/// Splits raw text into normalized terms.
pub fn tokenize(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else if (c == '.' || c == '-')
            && !cur.is_empty()
            && chars.peek().is_some_and(|n| n.is_alphanumeric())
        {
            cur.push(c);
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Normalizes a single user-supplied term (query word, stopword entry) the
/// way corpus text is normalized. Multi-token input is joined with `_`, the
/// phrase separator.
pub fn normalize_term(raw: &str) -> Option<String> {
    let tokens = tokenize(raw);
    if tokens.is_empty() {
        None
    } else {
        Some(tokens.join("_"))
    }
}

/// Raw input text with an identifier (file name or line number).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Self {
        Document {
            id: id.into(),
            tokens,
        }
    }

    pub fn from_raw(raw: &RawDocument) -> Self {
        Document::new(raw.id.clone(), tokenize(&raw.text))
    }
}

pub fn tokenize_all(raw: &[RawDocument]) -> Vec<Document> {
    raw.par_iter().map(Document::from_raw).collect()
}

/// Loads a corpus from either a directory of `.txt` files (one document per
/// file, in file-name order) or a single file with one document per line.
pub fn load_documents(path: &Path) -> Result<Vec<RawDocument>> {
    let meta = fs::metadata(path).map_err(Error::at_path(path))?;
    if meta.is_dir() {
        let mut files = Vec::new();
        for entry in fs::read_dir(path).map_err(Error::at_path(path))? {
            let p = entry.map_err(Error::at_path(path))?.path();
            if p.is_file() && p.extension().is_some_and(|e| e == "txt") {
                files.push(p);
            }
        }
        files.sort();
        files
            .into_iter()
            .map(|p| {
                let text = fs::read_to_string(&p).map_err(Error::at_path(&p))?;
                let id = p
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Ok(RawDocument { id, text })
            })
            .collect()
    } else {
        let text = fs::read_to_string(path).map_err(Error::at_path(path))?;
        Ok(text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| RawDocument {
                id: (i + 1).to_string(),
                text: l.to_string(),
            })
            .collect())
    }
}

/// Term counts of a corpus.
///
/// `entries` holds only terms that survived stopword and min-count filtering;
/// `total_tokens` counts every token seen.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub entries: BTreeMap<String, u64>,
    pub total_tokens: u64,
    pub total_documents: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, term: &str) -> Option<u64> {
        self.entries.get(term).copied()
    }
}

/// Counts token frequencies.
///
/// Terms in `stopwords` or occurring fewer than `min_count` times are left
/// out of the entries but still count toward `total_tokens`.
pub fn count_terms(
    documents: &[Document],
    stopwords: &HashSet<String>,
    min_count: u64,
) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::invalid("min_count must be >= 1"));
    }
    let counts = documents
        .par_iter()
        .fold(HashMap::<&str, u64>::new, |mut acc, doc| {
            for t in &doc.tokens {
                *acc.entry(t.as_str()).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (t, c) in b {
                *a.entry(t).or_default() += c;
            }
            a
        });
    let total_tokens = counts.values().sum();
    let entries = counts
        .into_iter()
        .filter(|(t, c)| *c >= min_count && !stopwords.contains(*t))
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    Ok(Vocabulary {
        entries,
        total_tokens,
        total_documents: documents.len() as u64,
    })
}

/// The `n` most frequent terms, by descending count with ties broken by
/// ascending term.
pub fn top_terms(vocab: &Vocabulary, n: usize) -> Vec<String> {
    let mut ranked: Vec<(&String, u64)> = vocab.entries.iter().map(|(t, &c)| (t, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().take(n).map(|(t, _)| t.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(tokens: &[&str]) -> Document {
        Document::new("d", tokens.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn tokenize_keeps_internal_periods() {
        assert_eq!(tokenize("The U.S. bank"), vec!["the", "u.s", "bank"]);
    }

    #[test]
    fn tokenize_edge_cases() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("!!! ---").is_empty());
        assert_eq!(
            tokenize("Forward-looking statements, Q2 2014."),
            vec!["forward-looking", "statements", "q2", "2014"]
        );
        assert_eq!(tokenize("--x-- a.-b 3.5%"), vec!["x", "a", "b", "3.5"]);
        assert_eq!(tokenize("don't"), vec!["don", "t"]);
        assert_eq!(tokenize("Éclair ÜBER"), vec!["éclair", "über"]);
    }

    #[test]
    fn normalize_joins_multi_token_terms() {
        assert_eq!(normalize_term("Los Angeles").as_deref(), Some("los_angeles"));
        assert_eq!(normalize_term("New_York").as_deref(), Some("new_york"));
        assert_eq!(normalize_term("Athens").as_deref(), Some("athens"));
        assert_eq!(normalize_term("..."), None);
    }

    #[test]
    fn count_terms_examples() {
        let docs = [doc(&["a", "b", "a"])];
        let v = count_terms(&docs, &HashSet::new(), 1).unwrap();
        assert_eq!(v.entries, BTreeMap::from([("a".into(), 2), ("b".into(), 1)]));
        assert_eq!(v.total_tokens, 3);
        assert_eq!(v.total_documents, 1);

        let stop = HashSet::from(["a".to_string()]);
        let v = count_terms(&docs, &stop, 1).unwrap();
        assert_eq!(v.entries, BTreeMap::from([("b".into(), 1)]));
        assert_eq!(v.total_tokens, 3);

        let v = count_terms(&docs, &HashSet::new(), 2).unwrap();
        assert_eq!(v.entries, BTreeMap::from([("a".into(), 2)]));

        assert!(matches!(
            count_terms(&docs, &HashSet::new(), 0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn count_terms_matches_naive_tally() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let words: Vec<String> = (0..300).map(|i| format!("w{i}")).collect();
        let docs: Vec<Document> = (0..100)
            .map(|d| {
                let toks = (0..100)
                    .map(|_| {
                        // skewed draw so counts vary widely
                        let i = (rng.random::<f64>().powi(3) * words.len() as f64) as usize;
                        words[i].clone()
                    })
                    .collect();
                Document::new(d.to_string(), toks)
            })
            .collect();

        let mut naive: BTreeMap<String, u64> = BTreeMap::new();
        let mut total = 0;
        for d in &docs {
            for t in &d.tokens {
                *naive.entry(t.clone()).or_default() += 1;
                total += 1;
            }
        }
        assert_eq!(total, 10_000);
        let v = count_terms(&docs, &HashSet::new(), 1).unwrap();
        assert_eq!(v.entries, naive);
        assert_eq!(v.total_tokens, 10_000);
    }

    #[test]
    fn top_terms_examples() {
        let v = Vocabulary {
            entries: BTreeMap::from([("a".into(), 5), ("c".into(), 3), ("b".into(), 3)]),
            total_tokens: 11,
            total_documents: 1,
        };
        assert_eq!(top_terms(&v, 2), vec!["a", "b"]);
        assert_eq!(top_terms(&v, 10), vec!["a", "b", "c"]);

        let v = Vocabulary {
            entries: BTreeMap::from([("x".into(), 1)]),
            total_tokens: 1,
            total_documents: 1,
        };
        assert_eq!(top_terms(&v, 1), vec!["x"]);
    }

    #[test]
    fn top_terms_against_sort_oracle() {
        let entries: BTreeMap<String, u64> =
            (0..50).map(|i| (format!("t{i:02}"), (i * 7 % 11) as u64 + 1)).collect();
        let v = Vocabulary {
            entries: entries.clone(),
            total_tokens: 0,
            total_documents: 0,
        };
        // oracle: repeatedly extract the max by (count desc, term asc)
        let mut pool: Vec<(String, u64)> = entries.into_iter().collect();
        let mut expected = Vec::new();
        while !pool.is_empty() {
            let mut best = 0;
            for i in 1..pool.len() {
                let (bt, bc) = &pool[best];
                let (t, c) = &pool[i];
                if c > bc || (c == bc && t < bt) {
                    best = i;
                }
            }
            expected.push(pool.remove(best).0);
        }
        assert_eq!(top_terms(&v, 50), expected);
    }

    #[test]
    fn load_line_corpus_and_directory() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("lines.txt");
        fs::write(&file, "first doc\n\n  \nsecond doc\n").unwrap();
        let docs = load_documents(&file).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "1");
        assert_eq!(docs[1].id, "4");

        let sub = dir.path().join("docs");
        fs::create_dir(&sub).unwrap();
        fs::write(sub.join("b.txt"), "bee").unwrap();
        fs::write(sub.join("a.txt"), "ay").unwrap();
        fs::write(sub.join("skip.md"), "nope").unwrap();
        let docs = load_documents(&sub).unwrap();
        let ids: Vec<_> = docs.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["a.txt", "b.txt"]);

        assert!(matches!(
            load_documents(&dir.path().join("missing")),
            Err(Error::Path { .. })
        ));
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(s in "\\PC{0,80}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(&once, &twice);
            for t in &once {
                prop_assert!(!t.is_empty());
                prop_assert_eq!(t.to_lowercase(), t.clone());
            }
        }

        #[test]
        fn count_terms_is_order_invariant(
            docs in prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 0..12), 0..12),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let docs: Vec<Document> = docs.into_iter().map(|t| Document::new("x", t)).collect();
            let mut shuffled = docs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = count_terms(&docs, &HashSet::new(), 1).unwrap();
            let b = count_terms(&shuffled, &HashSet::new(), 1).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn top_terms_is_prefix_closed(
            counts in prop::collection::btree_map("[a-z]{1,3}", 1u64..6, 0..30),
            k in 0usize..32,
        ) {
            let v = Vocabulary { entries: counts, total_tokens: 0, total_documents: 0 };
            let a = top_terms(&v, k);
            let b = top_terms(&v, k + 1);
            prop_assert!(b.starts_with(&a));
        }
    }
}
