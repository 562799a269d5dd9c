//! Interaction corpus and subword skip-gram pretraining of the input
//! embedding matrix.
//!
//! Each interaction `(q, a)` becomes a token `f(q) ␟ a`, where `f(q)` is a
//! unique question token. A token has exactly three subword units: the
//! question token, the assessment character and the whole token. Because
//! `(q, 0)` and `(q, 1)` share `f(q)`, their embeddings are linked.

mod skipgram;
mod table;

use std::fmt;
use std::str::FromStr;

use crate::data::Dataset;
use crate::error::{Error, Result};

pub use skipgram::{train_skipgram, SkipGramConfig, SkipGramModel};
pub use table::{build_wxv, random_init, EmbeddingTable};

/// Separates the question token from the assessment character.
pub const SEPARATOR: char = '␟';

/// The unique token of a question index.
pub fn question_token(question: usize) -> String {
    format!("q{question}")
}

fn parse_question_token(s: &str) -> Option<usize> {
    let digits = s.strip_prefix('q')?;
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InteractionToken {
    pub question: usize,
    pub assessment: u8,
}

impl InteractionToken {
    pub fn new(question: usize, assessment: u8) -> Self {
        InteractionToken {
            question,
            assessment,
        }
    }

    /// `[f(q), a, f(q)␟a]`
    pub fn subwords(&self) -> [String; 3] {
        [
            question_token(self.question),
            self.assessment.to_string(),
            self.to_string(),
        ]
    }
}

impl fmt::Display for InteractionToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}{SEPARATOR}{}", self.question, self.assessment)
    }
}

impl FromStr for InteractionToken {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let malformed = || Error::MalformedToken(s.to_string());
        let (q, a) = s.split_once(SEPARATOR).ok_or_else(malformed)?;
        let question = parse_question_token(q).ok_or_else(malformed)?;
        let assessment = match a {
            "0" => 0,
            "1" => 1,
            _ => return Err(malformed()),
        };
        Ok(InteractionToken {
            question,
            assessment,
        })
    }
}

/// The three subword units of a token string.
pub fn extract_subwords(token: &str) -> Result<[String; 3]> {
    Ok(token.parse::<InteractionToken>()?.subwords())
}

/// One sentence of interaction tokens per learner.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Vec<InteractionToken>>,
}

impl Corpus {
    pub fn from_steps<'a>(sequences: impl IntoIterator<Item = &'a [(usize, u8)]>) -> Self {
        Corpus {
            sentences: sequences
                .into_iter()
                .map(|s| s.iter().map(|&(q, a)| InteractionToken::new(q, a)).collect())
                .collect(),
        }
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.sentences
            .iter()
            .map(|s| s.iter().map(ToString::to_string).collect())
            .collect()
    }
}

pub fn encode_corpus(ds: &Dataset) -> Corpus {
    let steps: Vec<Vec<(usize, u8)>> = ds.sequences.iter().map(|s| s.steps()).collect();
    Corpus::from_steps(steps.iter().map(Vec::as_slice))
}
