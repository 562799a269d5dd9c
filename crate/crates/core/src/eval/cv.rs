//! Cross-validation over the five model variants.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{auc, evaluate_sequences};
use crate::data::{split_folds, Dataset, FoldSplit, Level};
use crate::embed::{build_wxv, train_skipgram, Corpus, SkipGramConfig};
use crate::error::{Error, Result};
use crate::graph::{build_skill_graph, laplacian, Laplacian, QuestionGraph};
use crate::matrix::Matrix;
use crate::net::{train_sequences, InitMode, ParamSet, Step, TrainConfig};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Skill-level baseline over joint skills.
    DktSkill,
    /// Question level, random init, no penalty.
    QdktBase,
    /// Question level with the Laplacian penalty.
    QdktReg,
    /// Question level with skip-gram initialization.
    QdktFasttext,
    /// Penalty and skip-gram initialization.
    QdktFull,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::DktSkill,
        Variant::QdktBase,
        Variant::QdktReg,
        Variant::QdktFasttext,
        Variant::QdktFull,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::DktSkill => "dkt-skill",
            Variant::QdktBase => "qdkt-base",
            Variant::QdktReg => "qdkt-reg",
            Variant::QdktFasttext => "qdkt-fasttext",
            Variant::QdktFull => "qdkt-full",
        }
    }

    pub fn level(&self) -> Level {
        match self {
            Variant::DktSkill => Level::Skill,
            _ => Level::Question,
        }
    }

    pub fn regularized(&self) -> bool {
        matches!(self, Variant::QdktReg | Variant::QdktFull)
    }

    pub fn pretrained(&self) -> bool {
        matches!(self, Variant::QdktFasttext | Variant::QdktFull)
    }

    pub fn init_mode(&self) -> InitMode {
        if self.pretrained() {
            InitMode::Pretrained
        } else {
            InitMode::Random
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub train: TrainConfig,
    pub skipgram: SkipGramConfig,
    pub k: usize,
    pub train_frac: f64,
    /// Candidate penalty weights; when non-empty, regularized variants pick
    /// one per fold on a validation split of the training learners.
    pub lambda_grid: Vec<f64>,
    pub validation_frac: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            train: TrainConfig::default(),
            skipgram: SkipGramConfig::default(),
            k: 5,
            train_frac: 0.7,
            lambda_grid: Vec::new(),
            validation_frac: 0.2,
        }
    }
}

/// Everything produced for one fold.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub fold_index: usize,
    pub auc: f64,
    pub lambda: f64,
    pub pairs: usize,
    pub epoch_losses: Vec<f64>,
    pub params: ParamSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub auc: f64,
    pub lambda: f64,
    pub pairs: usize,
    pub first_epoch_loss: f64,
    pub last_epoch_loss: f64,
}

/// Aggregate cross-validation result, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub variant: Variant,
    pub seed: u64,
    pub k: usize,
    pub fold_aucs: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (`k - 1` denominator) across folds.
    pub std: f64,
    pub pooling: String,
    pub spread: String,
    pub folds: Vec<FoldRecord>,
    pub config: CvConfig,
    pub config_fingerprint: String,
}

impl FoldReport {
    pub fn from_outcomes(variant: Variant, seed: u64, cfg: &CvConfig, outcomes: &[FoldOutcome]) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::invalid("no folds"));
        }
        let fold_aucs: Vec<f64> = outcomes.iter().map(|o| o.auc).collect();
        let k = fold_aucs.len() as f64;
        let mean = fold_aucs.iter().sum::<f64>() / k;
        let std = if fold_aucs.len() > 1 {
            (fold_aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        // record the dimensions and seed the folds actually ran with
        let mut cfg = cfg.clone();
        cfg.train.seed = seed;
        cfg.skipgram.seed = seed;
        cfg.skipgram.dim = cfg.train.embed_dim;
        let config_json = serde_json::to_string(&cfg)?;
        Ok(FoldReport {
            variant,
            seed,
            k: outcomes.len(),
            fold_aucs,
            mean,
            std,
            pooling: "micro: one AUC over all test (score, label) pairs of a fold".into(),
            spread: "sample standard deviation across folds".into(),
            folds: outcomes
                .iter()
                .map(|o| FoldRecord {
                    fold: o.fold_index,
                    auc: o.auc,
                    lambda: o.lambda,
                    pairs: o.pairs,
                    first_epoch_loss: o.epoch_losses.first().copied().unwrap_or(f64::NAN),
                    last_epoch_loss: o.epoch_losses.last().copied().unwrap_or(f64::NAN),
                })
                .collect(),
            config: cfg,
            config_fingerprint: format!("{:016x}", seed::fingerprint(config_json.as_bytes())),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn select(sequences: &[Vec<Step>], learners: &[usize]) -> Result<Vec<Vec<Step>>> {
    learners
        .iter()
        .map(|&l| {
            sequences.get(l).cloned().ok_or(Error::IndexOutOfRange {
                what: "learner",
                index: l,
                bound: sequences.len(),
            })
        })
        .collect()
}

/// Skip-gram embeddings from the given question-level sequences, turned
/// into a `dim × 2N` initial embedding matrix. Questions never seen in the
/// corpus get a zero question vector.
pub fn pretrained_init(sequences: &[Vec<Step>], n: usize, cfg: &SkipGramConfig) -> Result<Matrix> {
    let corpus = Corpus::from_steps(sequences.iter().map(Vec::as_slice));
    let mut table = train_skipgram(&corpus, cfg)?.table();
    table.fill_missing_questions(n);
    build_wxv(&table, n, cfg.dim)
}

fn fit(
    train: &[Vec<Step>],
    items: usize,
    cfg: &TrainConfig,
    lap: Option<&Laplacian>,
    init: Option<Matrix>,
) -> Result<(ParamSet, Vec<f64>)> {
    let trained = train_sequences(train, items, cfg, lap, init)?;
    Ok((trained.params, trained.log.iter().map(|e| e.total).collect()))
}

fn score(params: &ParamSet, test: &[Vec<Step>]) -> Result<(f64, usize)> {
    let (scores, labels) = evaluate_sequences(params, test.iter().map(Vec::as_slice))?;
    Ok((auc(&scores, &labels)?, scores.len()))
}

/// Trains and evaluates one variant on one fold.
pub fn run_fold(
    ds: &Dataset,
    cfg: &CvConfig,
    variant: Variant,
    fold: &FoldSplit,
    lap: Option<&Laplacian>,
    seed_value: u64,
) -> Result<FoldOutcome> {
    let fold_seed = seed::derive(seed_value, 1000 + fold.fold_index as u64);
    let (sequences, items) = ds.item_sequences(variant.level());
    let train = select(&sequences, &fold.train)?;
    let test = select(&sequences, &fold.test)?;

    let mut train_cfg = TrainConfig {
        seed: fold_seed,
        init_mode: variant.init_mode(),
        ..cfg.train
    };
    if !variant.regularized() {
        train_cfg.lambda = 0.0;
    }
    let lap = if variant.regularized() {
        Some(lap.ok_or_else(|| Error::invalid(format!("{variant} needs a question graph")))?)
    } else {
        None
    };
    let skipgram = SkipGramConfig {
        dim: cfg.train.embed_dim,
        seed: seed::derive(fold_seed, 7),
        ..cfg.skipgram
    };
    let init_for = |learners: &[Vec<Step>]| -> Result<Option<Matrix>> {
        if variant.pretrained() {
            Ok(Some(pretrained_init(learners, items, &skipgram)?))
        } else {
            Ok(None)
        }
    };

    if variant.regularized() && !cfg.lambda_grid.is_empty() {
        let mut inner: Vec<usize> = (0..train.len()).collect();
        inner.shuffle(&mut seed::rng_for(fold_seed, 11));
        let n_val = ((train.len() as f64 * cfg.validation_frac).round() as usize)
            .clamp(1, train.len().saturating_sub(1).max(1));
        let (val_idx, fit_idx) = inner.split_at(n_val);
        let fit_set: Vec<Vec<Step>> = fit_idx.iter().map(|&i| train[i].clone()).collect();
        let val_set: Vec<Vec<Step>> = val_idx.iter().map(|&i| train[i].clone()).collect();
        let init = init_for(&fit_set)?;
        let mut best = (f64::NEG_INFINITY, cfg.lambda_grid[0]);
        for &lambda in &cfg.lambda_grid {
            let c = TrainConfig { lambda, ..train_cfg };
            let (params, _) = fit(&fit_set, items, &c, lap, init.clone())?;
            let (val_auc, _) = score(&params, &val_set)?;
            log::info!("fold {} lambda {lambda}: validation AUC {val_auc:.4}", fold.fold_index);
            if val_auc > best.0 {
                best = (val_auc, lambda);
            }
        }
        train_cfg.lambda = best.1;
    }

    let (params, epoch_losses) = fit(&train, items, &train_cfg, lap, init_for(&train)?)?;
    let (fold_auc, pairs) = score(&params, &test)?;
    Ok(FoldOutcome {
        fold_index: fold.fold_index,
        auc: fold_auc,
        lambda: train_cfg.lambda,
        pairs,
        epoch_losses,
        params,
    })
}

fn variant_laplacian(ds: &Dataset, variant: Variant, graph: Option<&QuestionGraph>) -> Result<Option<Laplacian>> {
    if variant == Variant::DktSkill && ds.num_skills() == 0 {
        return Err(Error::invalid("dkt-skill needs skill labels"));
    }
    if !variant.regularized() {
        return Ok(None);
    }
    let g = match graph {
        Some(g) => {
            if g.num_nodes() != ds.num_questions() {
                return Err(Error::DimensionMismatch {
                    expected: ds.num_questions(),
                    got: g.num_nodes(),
                });
            }
            g.clone()
        }
        None => {
            if ds.num_skills() == 0 {
                return Err(Error::invalid(format!("{variant} needs skill labels or a graph")));
            }
            build_skill_graph(&ds.question_skills, ds.num_questions())?
        }
    };
    Ok(Some(laplacian(&g)))
}

/// Runs every fold (in parallel) and returns the per-fold outcomes in fold
/// order.
pub fn run_folds(
    ds: &Dataset,
    cfg: &CvConfig,
    variant: Variant,
    seed_value: u64,
    graph: Option<&QuestionGraph>,
) -> Result<Vec<FoldOutcome>> {
    let lap = variant_laplacian(ds, variant, graph)?;
    let folds = split_folds(ds, cfg.k, cfg.train_frac, seed_value)?;
    folds
        .par_iter()
        .map(|f| run_fold(ds, cfg, variant, f, lap.as_ref(), seed_value))
        .collect()
}

pub fn cross_validate(
    ds: &Dataset,
    cfg: &CvConfig,
    variant: Variant,
    seed_value: u64,
    graph: Option<&QuestionGraph>,
) -> Result<FoldReport> {
    let outcomes = run_folds(ds, cfg, variant, seed_value, graph)?;
    FoldReport::from_outcomes(variant, seed_value, cfg, &outcomes)
}
