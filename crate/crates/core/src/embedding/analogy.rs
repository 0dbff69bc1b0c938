//! Word analogy evaluation ("a is to b as c is to d").
//!
//! Question files use the common format: `: section-name` lines open a
//! section, every other non-blank line holds exactly four words.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{dot, EmbeddingModel};
use crate::corpus::normalize_term;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub words: [String; 4],
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionSection {
    pub name: String,
    pub questions: Vec<AnalogyQuestion>,
}

pub fn parse_questions(text: &str) -> Result<Vec<QuestionSection>> {
    let mut sections: Vec<QuestionSection> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(name) = line.strip_prefix(": ") {
            sections.push(QuestionSection {
                name: name.trim().to_string(),
                questions: Vec::new(),
            });
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 4 {
            return Err(Error::MalformedQuestionFile {
                line: lineno,
                reason: format!("expected 4 words, found {}", words.len()),
            });
        }
        // a word that normalizes to nothing can never be in a vocabulary;
        // keep its lowercase form so the question is counted as skipped
        let norm = |w: &str| normalize_term(w).unwrap_or_else(|| w.to_lowercase());
        let question = AnalogyQuestion {
            words: [norm(words[0]), norm(words[1]), norm(words[2]), norm(words[3])],
            line: lineno,
        };
        if sections.is_empty() {
            sections.push(QuestionSection {
                name: String::new(),
                questions: Vec::new(),
            });
        }
        sections.last_mut().unwrap().questions.push(question);
    }
    Ok(sections)
}

pub fn load_questions(path: &Path) -> Result<Vec<QuestionSection>> {
    let text = fs::read_to_string(path).map_err(Error::at_path(path))?;
    parse_questions(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionScore {
    pub name: String,
    pub correct: usize,
    pub attempted: usize,
    /// Questions with at least one word missing from the model.
    pub skipped: usize,
}

impl SectionScore {
    pub fn accuracy(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.correct as f64 / self.attempted as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalogyReport {
    pub sections: Vec<SectionScore>,
    pub correct: usize,
    pub attempted: usize,
    pub skipped: usize,
    /// Expected accuracy of guessing uniformly among the candidate terms.
    pub chance: f64,
}

impl AnalogyReport {
    pub fn accuracy(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.correct as f64 / self.attempted as f64
        }
    }
}

/// Predicts `d` as the term closest to `v(b) - v(a) + v(c)` (unit vectors),
/// excluding `a`, `b` and `c`. Questions with an out-of-vocabulary word are
/// skipped, not attempted.
pub fn evaluate_analogies(model: &EmbeddingModel, sections: &[QuestionSection]) -> AnalogyReport {
    let scores: Vec<SectionScore> = sections
        .iter()
        .map(|sec| {
            let outcomes: Vec<Option<bool>> = sec
                .questions
                .par_iter()
                .map(|q| {
                    let ids: Option<Vec<usize>> =
                        q.words.iter().map(|w| model.index_of(w).ok()).collect();
                    ids.map(|ids| predict(model, ids[0], ids[1], ids[2]) == Some(ids[3]))
                })
                .collect();
            SectionScore {
                name: sec.name.clone(),
                correct: outcomes.iter().filter(|o| **o == Some(true)).count(),
                attempted: outcomes.iter().filter(|o| o.is_some()).count(),
                skipped: outcomes.iter().filter(|o| o.is_none()).count(),
            }
        })
        .collect();

    let candidates = model.len().saturating_sub(3);
    AnalogyReport {
        correct: scores.iter().map(|s| s.correct).sum(),
        attempted: scores.iter().map(|s| s.attempted).sum(),
        skipped: scores.iter().map(|s| s.skipped).sum(),
        chance: if candidates == 0 {
            0.0
        } else {
            1.0 / candidates as f64
        },
        sections: scores,
    }
}

fn predict(model: &EmbeddingModel, a: usize, b: usize, c: usize) -> Option<usize> {
    let (ua, ub, uc) = (model.unit_row(a), model.unit_row(b), model.unit_row(c));
    let target: Vec<f64> = (0..model.dim()).map(|j| ub[j] - ua[j] + uc[j]).collect();
    let terms = model.terms();
    let mut best: Option<(f64, usize)> = None;
    for i in 0..model.len() {
        if i == a || i == b || i == c {
            continue;
        }
        let s = dot(&target, model.unit_row(i));
        let better = match best {
            None => true,
            Some((bs, bi)) => s > bs || (s == bs && terms[i] < terms[bi]),
        };
        if better {
            best = Some((s, i));
        }
    }
    best.map(|(_, i)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = "\
: capital
Athens Greece Baghdad Iraq
athens greece paris france

: gram
code coding dance dancing
";

    #[test]
    fn parses_sections_and_normalizes_case() {
        let secs = parse_questions(FILE).unwrap();
        assert_eq!(secs.len(), 2);
        assert_eq!(secs[0].name, "capital");
        assert_eq!(secs[0].questions[0].words, ["athens", "greece", "baghdad", "iraq"].map(String::from));
        assert_eq!(secs[0].questions[1].line, 3);
        assert_eq!(secs[1].questions.len(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_questions(": s\na b c d\na b c\n").unwrap_err();
        assert!(matches!(err, Error::MalformedQuestionFile { line: 3, .. }), "{err}");
        let err = parse_questions("a b c d e\n").unwrap_err();
        assert!(matches!(err, Error::MalformedQuestionFile { line: 1, .. }));
    }

    #[test]
    fn all_out_of_vocabulary_is_skipped() {
        let m = EmbeddingModel::from_rows(vec![("x", vec![1.0f32]), ("y", vec![-1.0])]).unwrap();
        let secs = parse_questions(FILE).unwrap();
        let r = evaluate_analogies(&m, &secs);
        assert_eq!(r.attempted, 0);
        assert_eq!(r.skipped, 3);
        assert_eq!(r.accuracy(), 0.0);
    }

    #[test]
    fn predicts_by_vector_offset() {
        // man:woman :: king:queen along a gender axis, plus a distractor
        let m = EmbeddingModel::from_rows(vec![
            ("man", vec![1.0f32, 0.0, 0.0]),
            ("woman", vec![1.0, 1.0, 0.0]),
            ("king", vec![0.0, 0.0, 1.0]),
            ("queen", vec![0.0, 1.0, 1.0]),
            ("castle", vec![0.2, -1.0, 1.0]),
        ])
        .unwrap();
        let secs = parse_questions(": family\nman woman king queen\nwoman man queen king\n").unwrap();
        let r = evaluate_analogies(&m, &secs);
        assert_eq!((r.correct, r.attempted, r.skipped), (2, 2, 0));
        assert_eq!(r.sections[0].accuracy(), 1.0);
        assert!((r.chance - 0.5).abs() < 1e-12);
    }
}
