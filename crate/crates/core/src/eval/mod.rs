//! Evaluation: AUC, the cross-validation harness and PCA export of the
//! input embeddings.

mod auc;
mod cv;
mod pca;

pub use auc::auc;
pub use cv::{
    cross_validate, pretrained_init, run_fold, run_folds, CvConfig, FoldOutcome, FoldRecord,
    FoldReport, Variant,
};
pub use pca::{pca_project, separation_score, PcaProjection, Separation, SEPARATION_CAP};

use crate::data::{Dataset, FoldSplit, Level};
use crate::error::{Error, Result};
use crate::net::{ParamSet, Step};

/// Anything that scores next-step correctness along a sequence.
pub trait Predictor: Sync {
    /// One score per `t = 0..T-1`, predicting the assessment at `t + 1`.
    fn predict_next(&self, seq: &[Step]) -> Result<Vec<f64>>;
}

impl Predictor for ParamSet {
    fn predict_next(&self, seq: &[Step]) -> Result<Vec<f64>> {
        crate::net::predict_next(self, seq)
    }
}

/// Pools `(score, label)` pairs over every prediction step of every
/// sequence.
pub fn evaluate_sequences<'a>(
    model: &impl Predictor,
    sequences: impl IntoIterator<Item = &'a [Step]>,
) -> Result<(Vec<f64>, Vec<u8>)> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for seq in sequences {
        let s = model.predict_next(seq)?;
        if s.len() != seq.len().saturating_sub(1) {
            return Err(Error::DimensionMismatch {
                expected: seq.len().saturating_sub(1),
                got: s.len(),
            });
        }
        scores.extend(s);
        labels.extend(seq.iter().skip(1).map(|&(_, a)| a));
    }
    Ok((scores, labels))
}

/// Micro-pooled `(score, label)` pairs over the test learners of `fold`.
pub fn evaluate_fold(
    model: &impl Predictor,
    ds: &Dataset,
    fold: &FoldSplit,
    level: Level,
) -> Result<(Vec<f64>, Vec<u8>)> {
    let (sequences, _) = ds.item_sequences(level);
    let selected = fold
        .test
        .iter()
        .map(|&l| {
            sequences.get(l).map(Vec::as_slice).ok_or(Error::IndexOutOfRange {
                what: "learner",
                index: l,
                bound: sequences.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    evaluate_sequences(model, selected)
}
