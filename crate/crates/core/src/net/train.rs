use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::lstm::{sequence_gradient, LossTerms, Step};
use super::params::{Dims, ParamSet};
use crate::data::{chunk_steps, Dataset, FoldSplit, Level};
use crate::embed::random_init;
use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    Random,
    Pretrained,
}

impl InitMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitMode::Random => "random",
            InitMode::Pretrained => "pretrained",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub embed_dim: usize,
    pub hidden: usize,
    pub lambda: f64,
    pub dropout: f64,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub max_len: usize,
    pub seed: u64,
    pub init_mode: InitMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            embed_dim: 128,
            hidden: 128,
            lambda: 0.0,
            dropout: 0.2,
            adam: AdamConfig::default(),
            epochs: 25,
            batch_size: 32,
            max_len: 200,
            seed: 0,
            init_mode: InitMode::Random,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.hidden == 0 {
            return Err(Error::invalid("model dimensions must be positive"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid("lambda must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout must lie in [0, 1)"));
        }
        if self.batch_size == 0 || self.max_len < 2 {
            return Err(Error::invalid("batch size must be positive and max_len >= 2"));
        }
        if self.adam.lr.is_nan() || self.adam.lr <= 0.0 || !(0.0..1.0).contains(&self.adam.beta1) || !(0.0..1.0).contains(&self.adam.beta2) {
            return Err(Error::invalid("invalid Adam constants"));
        }
        Ok(())
    }
}

/// Mean loss components over all training windows of one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub total: f64,
    pub data: f64,
    pub penalty: f64,
    pub optimizer_steps: usize,
}

impl EpochLog {
    /// `epoch train_loss data_term penalty_term`
    pub fn line(&self) -> String {
        format!("{} {} {} {}", self.epoch, self.total, self.data, self.penalty)
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub params: ParamSet,
    pub log: Vec<EpochLog>,
}

/// Trains on item sequences over an item space of size `items`.
///
/// Sequences are cut into windows of at most `max_len` steps (each starting
/// from a zero state); windows shorter than two steps carry no target and are
/// skipped. Each epoch shuffles the windows and takes one Adam step per
/// mini-batch on the batch-mean gradient. Per-window gradients are computed
/// in parallel and summed in batch order, so results do not depend on the
/// thread count.
pub fn train_sequences(
    sequences: &[Vec<Step>],
    items: usize,
    cfg: &TrainConfig,
    lap: Option<&Laplacian>,
    init: Option<Matrix>,
) -> Result<Trained> {
    cfg.validate()?;
    if cfg.lambda > 0.0 && lap.is_none() {
        return Err(Error::invalid("lambda > 0 needs a graph"));
    }
    let dims = Dims {
        k: cfg.embed_dim,
        h: cfg.hidden,
        items,
    };
    let w_xv = match init {
        Some(m) => m,
        None => random_init(cfg.embed_dim, 2 * items, seed::derive(cfg.seed, 1)),
    };
    let mut params = ParamSet::init(dims, w_xv, &mut seed::rng_for(cfg.seed, 2))?;
    let mut rng = seed::rng_for(cfg.seed, 3);

    let windows: Vec<&[Step]> = sequences
        .iter()
        .flat_map(|s| chunk_steps(s, cfg.max_len))
        .filter(|w| w.len() >= 2)
        .collect();
    if windows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for w in &windows {
        if let Some(&(item, _)) = w.iter().find(|(item, _)| *item >= items) {
            return Err(Error::IndexOutOfRange {
                what: "item",
                index: item,
                bound: items,
            });
        }
    }

    let mut adam = AdamState::new(&params);
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..windows.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut sums = (0.0, 0.0, 0.0);
        let mut steps = 0;
        for batch in order.chunks(cfg.batch_size) {
            let jobs: Vec<(usize, u64)> = batch.iter().map(|&w| (w, rng.random())).collect();
            let results: Vec<(ParamSet, LossTerms)> = jobs
                .par_iter()
                .map(|&(w, dropout_seed)| {
                    let mut r = seed::rng(dropout_seed);
                    sequence_gradient(&params, windows[w], cfg.lambda, lap, cfg.dropout, &mut r)
                })
                .collect::<Result<_>>()?;
            let mut grad = params.zeros_like();
            for (g, terms) in &results {
                grad.add_assign(g);
                sums.0 += terms.total();
                sums.1 += terms.data;
                sums.2 += terms.penalty();
            }
            grad.scale(1.0 / results.len() as f64);
            adam_step(&mut params, &grad, &mut adam, &cfg.adam)?;
            steps += 1;
        }
        let n = windows.len() as f64;
        let entry = EpochLog {
            epoch,
            total: sums.0 / n,
            data: sums.1 / n,
            penalty: sums.2 / n,
            optimizer_steps: steps,
        };
        log::debug!("epoch {epoch}: loss {:.5}", entry.total);
        log.push(entry);
    }
    Ok(Trained { params, log })
}

/// Trains on the training learners of `fold` (all learners when `None`).
pub fn train(
    ds: &Dataset,
    fold: Option<&FoldSplit>,
    level: Level,
    cfg: &TrainConfig,
    lap: Option<&Laplacian>,
    init: Option<Matrix>,
) -> Result<Trained> {
    let (sequences, items) = ds.item_sequences(level);
    let selected: Vec<Vec<Step>> = match fold {
        Some(f) => f
            .train
            .iter()
            .map(|&l| {
                sequences.get(l).cloned().ok_or(Error::IndexOutOfRange {
                    what: "learner",
                    index: l,
                    bound: sequences.len(),
                })
            })
            .collect::<Result<_>>()?,
        None => sequences,
    };
    train_sequences(&selected, items, cfg, lap, init)
}
