//! Learner interaction data: ingestion, cleaning, encoding, fold splits and
//! a synthetic generator.

mod dump;
mod ingest;
mod synth;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

pub use ingest::{ingest_csv, ColumnFilter, CsvSchema, IngestSummary};
pub use synth::{synth_generate, MasteryModel, SynthConfig, SynthTruth, Synthetic};

/// One raw row of an interaction log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionRecord {
    pub learner_id: String,
    pub question_id: String,
    pub skill_ids: BTreeSet<String>,
    pub order_key: i64,
    pub assessment: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interaction {
    pub question: usize,
    pub assessment: u8,
    pub order_key: i64,
}

/// Chronologically ordered interactions of one learner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnerSequence {
    pub learner_id: String,
    pub interactions: Vec<Interaction>,
}

impl LearnerSequence {
    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    /// `(question, assessment)` pairs in order.
    pub fn steps(&self) -> Vec<(usize, u8)> {
        self.interactions
            .iter()
            .map(|i| (i.question, i.assessment))
            .collect()
    }
}

/// Bijection between opaque string ids and dense indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ids(ids: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut vocab = Vocab::new();
        for id in ids {
            if vocab.index.contains_key(&id) {
                return Err(Error::invalid(format!("duplicate vocabulary id `{id}`")));
            }
            vocab.intern(&id);
        }
        Ok(vocab)
    }

    /// Returns the index of `id`, assigning the next free one if unseen.
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Which index space a model predicts over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// One output per question.
    Question,
    /// One output per joint skill (multi-skill sets collapsed into one label).
    Skill,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub sequences: Vec<LearnerSequence>,
    pub questions: Vocab,
    pub skills: Vocab,
    /// Skill indices of each question, indexed by question.
    pub question_skills: Vec<BTreeSet<usize>>,
}

impl Dataset {
    pub fn num_questions(&self) -> usize {
        self.questions.len()
    }

    pub fn num_skills(&self) -> usize {
        self.skills.len()
    }

    pub fn num_learners(&self) -> usize {
        self.sequences.len()
    }

    pub fn num_interactions(&self) -> usize {
        self.sequences.iter().map(LearnerSequence::len).sum()
    }

    /// Checks index bounds and per-learner ordering.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_questions();
        if self.question_skills.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.question_skills.len(),
            });
        }
        for skills in &self.question_skills {
            if let Some(&s) = skills.iter().find(|&&s| s >= self.num_skills()) {
                return Err(Error::IndexOutOfRange {
                    what: "skill",
                    index: s,
                    bound: self.num_skills(),
                });
            }
        }
        for seq in &self.sequences {
            for w in seq.interactions.windows(2) {
                if w[0].order_key > w[1].order_key {
                    return Err(Error::invalid(format!(
                        "learner `{}` is not in chronological order",
                        seq.learner_id
                    )));
                }
            }
            for it in &seq.interactions {
                if it.question >= n {
                    return Err(Error::IndexOutOfRange {
                        what: "question",
                        index: it.question,
                        bound: n,
                    });
                }
                if it.assessment > 1 {
                    return Err(Error::invalid(format!(
                        "assessment {} is not binary",
                        it.assessment
                    )));
                }
            }
        }
        Ok(())
    }

    /// Maps every question to a joint-skill index: each distinct skill set
    /// (including the empty set) becomes one label, numbered by first
    /// appearance in question order. Returns the map and the label count.
    pub fn joint_skills(&self) -> (Vec<usize>, usize) {
        let mut labels: HashMap<&BTreeSet<usize>, usize> = HashMap::new();
        let map = self
            .question_skills
            .iter()
            .map(|set| {
                let next = labels.len();
                *labels.entry(set).or_insert(next)
            })
            .collect();
        (map, labels.len())
    }

    /// Item sequences for the given level plus the size of the item space.
    pub fn item_sequences(&self, level: Level) -> (Vec<Vec<(usize, u8)>>, usize) {
        match level {
            Level::Question => (
                self.sequences.iter().map(LearnerSequence::steps).collect(),
                self.num_questions(),
            ),
            Level::Skill => {
                let (map, m) = self.joint_skills();
                let seqs = self
                    .sequences
                    .iter()
                    .map(|s| {
                        s.interactions
                            .iter()
                            .map(|i| (map[i.question], i.assessment))
                            .collect()
                    })
                    .collect();
                (seqs, m)
            }
        }
    }
}

/// Index of the `(q, a)` interaction among the `2n` one-hot slots: `q + a·n`.
pub fn encode_interaction(question: usize, assessment: u8, n: usize) -> Result<usize> {
    if question >= n {
        return Err(Error::IndexOutOfRange {
            what: "question",
            index: question,
            bound: n,
        });
    }
    if assessment > 1 {
        return Err(Error::invalid(format!("assessment {assessment} is not binary")));
    }
    Ok(question + usize::from(assessment) * n)
}

/// Inverse of [`encode_interaction`].
pub fn decode_interaction(code: usize, n: usize) -> Result<(usize, u8)> {
    if code >= 2 * n {
        return Err(Error::IndexOutOfRange {
            what: "interaction",
            index: code,
            bound: 2 * n,
        });
    }
    Ok((code % n, (code / n) as u8))
}

/// Splits a sequence into consecutive windows of at most `max_len` steps.
pub fn chunk_steps(steps: &[(usize, u8)], max_len: usize) -> impl Iterator<Item = &[(usize, u8)]> {
    steps.chunks(max_len.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PreprocessOptions {
    pub dedup: bool,
    /// Drop interactions on questions with no skill label.
    pub drop_unskilled: bool,
    pub min_seq_len: usize,
}

impl PreprocessOptions {
    fn is_identity(&self) -> bool {
        !self.dedup && !self.drop_unskilled && self.min_seq_len <= 1
    }
}

/// Cleans a dataset. Vocabularies are compacted to the questions and skills
/// still referenced, keeping their relative order.
pub fn preprocess(ds: &Dataset, opts: PreprocessOptions) -> Result<Dataset> {
    if opts.is_identity() {
        if ds.sequences.is_empty() {
            return Err(Error::EmptyDataset);
        }
        return Ok(ds.clone());
    }

    let mut sequences = Vec::with_capacity(ds.sequences.len());
    for seq in &ds.sequences {
        let mut seen = HashSet::new();
        let interactions: Vec<Interaction> = seq
            .interactions
            .iter()
            .filter(|i| !opts.drop_unskilled || !ds.question_skills[i.question].is_empty())
            .filter(|i| !opts.dedup || seen.insert(**i))
            .copied()
            .collect();
        if !interactions.is_empty() && interactions.len() >= opts.min_seq_len {
            sequences.push(LearnerSequence {
                learner_id: seq.learner_id.clone(),
                interactions,
            });
        }
    }
    if sequences.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let used: BTreeSet<usize> = sequences
        .iter()
        .flat_map(|s| s.interactions.iter().map(|i| i.question))
        .collect();
    let question_map: BTreeMap<usize, usize> =
        used.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let used_skills: BTreeSet<usize> = used
        .iter()
        .flat_map(|&q| ds.question_skills[q].iter().copied())
        .collect();
    let skill_map: BTreeMap<usize, usize> = used_skills
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();

    let questions = Vocab::from_ids(used.iter().map(|&q| ds.questions.id(q).to_string()))?;
    let skills = Vocab::from_ids(used_skills.iter().map(|&s| ds.skills.id(s).to_string()))?;
    let question_skills = used
        .iter()
        .map(|&q| ds.question_skills[q].iter().map(|s| skill_map[s]).collect())
        .collect();
    for seq in &mut sequences {
        for it in &mut seq.interactions {
            it.question = question_map[&it.question];
        }
    }
    Ok(Dataset {
        sequences,
        questions,
        skills,
        question_skills,
    })
}

/// One cross-validation split over learner indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold_index: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `k` independent seeded shuffles of the learners, each cut at
/// `train_frac`. Learners are never split across halves.
pub fn split_folds(ds: &Dataset, k: usize, train_frac: f64, seed: u64) -> Result<Vec<FoldSplit>> {
    split_learners(ds.num_learners(), k, train_frac, seed)
}

pub fn split_learners(
    num_learners: usize,
    k: usize,
    train_frac: f64,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_frac}"
        )));
    }
    if num_learners < k {
        return Err(Error::invalid(format!(
            "{num_learners} learners cannot fill {k} folds"
        )));
    }
    let n_train = ((num_learners as f64 * train_frac).round() as usize).clamp(1, num_learners - 1);
    Ok((0..k)
        .map(|fold_index| {
            let mut order: Vec<usize> = (0..num_learners).collect();
            order.shuffle(&mut seed::rng_for(seed, fold_index as u64));
            let mut train = order[..n_train].to_vec();
            let mut test = order[n_train..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            FoldSplit {
                fold_index,
                train,
                test,
            }
        })
        .collect())
}
