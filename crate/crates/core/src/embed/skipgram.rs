//! Skip-gram with negative sampling over subword-composed centers.
//!
//! The center representation of a token is the sum of its three subword
//! input vectors; context (output) vectors exist per whole token. Negatives
//! are drawn from the unigram distribution raised to 0.75.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{Corpus, EmbeddingTable, InteractionToken};
use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, sigmoid, Matrix};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to zero over training.
    pub lr: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 128,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SkipGramModel {
    cfg: SkipGramConfig,
    unit_names: Vec<String>,
    /// Whole tokens in ascending order; their index is the token id.
    tokens: Vec<InteractionToken>,
    token_ids: BTreeMap<InteractionToken, usize>,
    /// Subword unit indices of each token id.
    token_units: Vec<[usize; 3]>,
    input: Matrix,
    output: Matrix,
    sentences: Vec<Vec<usize>>,
    sampler: WeightedAliasIndex<f64>,
    rng: ChaCha8Rng,
    epochs_done: usize,
    epoch_losses: Vec<f64>,
}

pub fn train_skipgram(corpus: &Corpus, cfg: &SkipGramConfig) -> Result<SkipGramModel> {
    let mut model = SkipGramModel::new(corpus, cfg)?;
    model.train()?;
    Ok(model)
}

impl SkipGramModel {
    /// Vocabulary and initial vectors; no training yet.
    pub fn new(corpus: &Corpus, cfg: &SkipGramConfig) -> Result<Self> {
        if corpus.num_tokens() == 0 {
            return Err(Error::invalid("skip-gram corpus has no tokens"));
        }
        if cfg.dim < 2 {
            return Err(Error::invalid("embedding dimension must be at least 2"));
        }
        if cfg.window == 0 {
            return Err(Error::invalid("window must be positive"));
        }

        let mut counts: BTreeMap<InteractionToken, u64> = BTreeMap::new();
        for t in corpus.sentences.iter().flatten() {
            *counts.entry(*t).or_insert(0) += 1;
        }
        let tokens: Vec<InteractionToken> = counts.keys().copied().collect();
        let token_ids: BTreeMap<InteractionToken, usize> =
            tokens.iter().enumerate().map(|(i, t)| (*t, i)).collect();

        let mut unit_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut unit_names = Vec::new();
        let token_units = tokens
            .iter()
            .map(|t| {
                t.subwords().map(|unit| {
                    *unit_index.entry(unit.clone()).or_insert_with(|| {
                        unit_names.push(unit);
                        unit_names.len() - 1
                    })
                })
            })
            .collect();

        let mut rng = seed::rng(cfg.seed);
        let bound = 0.5 / cfg.dim as f64;
        let input = Matrix::from_fn(unit_names.len(), cfg.dim, |_, _| {
            rng.random_range(-bound..bound)
        });
        let output = Matrix::zeros(tokens.len(), cfg.dim);
        let weights: Vec<f64> = counts.values().map(|&c| (c as f64).powf(0.75)).collect();
        let sampler = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::invalid(format!("negative sampler: {e}")))?;
        let sentences = corpus
            .sentences
            .iter()
            .map(|s| s.iter().map(|t| token_ids[t]).collect())
            .collect();

        Ok(SkipGramModel {
            cfg: *cfg,
            unit_names,
            tokens,
            token_ids,
            token_units,
            input,
            output,
            sentences,
            sampler,
            rng,
            epochs_done: 0,
            epoch_losses: Vec::new(),
        })
    }

    /// Runs all configured epochs.
    pub fn train(&mut self) -> Result<()> {
        while self.epochs_done < self.cfg.epochs {
            self.train_epoch()?;
        }
        Ok(())
    }

    /// One pass over the corpus; returns the mean loss per (center, context)
    /// pair including its negatives.
    pub fn train_epoch(&mut self) -> Result<f64> {
        if self.epochs_done >= self.cfg.epochs {
            return Err(Error::invalid("all configured epochs already ran"));
        }
        let dim = self.cfg.dim;
        let total_positions = (self.cfg.epochs * self.num_corpus_tokens()) as f64;
        let mut processed = (self.epochs_done * self.num_corpus_tokens()) as f64;
        let mut hidden = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        let mut loss = 0.0;
        let mut pairs = 0usize;

        let sentences = std::mem::take(&mut self.sentences);
        for sentence in &sentences {
            for (pos, &center) in sentence.iter().enumerate() {
                let lr = self.cfg.lr * (1.0 - processed / total_positions).max(1e-4);
                processed += 1.0;
                let reach = self.rng.random_range(1..=self.cfg.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(sentence.len() - 1);
                for (ctx_pos, &context) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    self.center_into(center, &mut hidden);
                    err.iter_mut().for_each(|e| *e = 0.0);
                    loss += self.update_target(&hidden, context, 1.0, lr, &mut err);
                    for _ in 0..self.cfg.negatives {
                        let neg = self.sampler.sample(&mut self.rng);
                        if neg == context {
                            continue;
                        }
                        loss += self.update_target(&hidden, neg, 0.0, lr, &mut err);
                    }
                    for &unit in &self.token_units[center] {
                        axpy(1.0, &err, self.input.row_mut(unit));
                    }
                    pairs += 1;
                }
            }
        }
        self.sentences = sentences;
        self.epochs_done += 1;
        let mean = if pairs == 0 { 0.0 } else { loss / pairs as f64 };
        self.epoch_losses.push(mean);
        Ok(mean)
    }

    fn update_target(&mut self, hidden: &[f64], target: usize, label: f64, lr: f64, err: &mut [f64]) -> f64 {
        let out = self.output.row_mut(target);
        let score = dot(hidden, out);
        let p = sigmoid(score);
        let g = lr * (label - p);
        axpy(g, out, err);
        axpy(g, hidden, out);
        if label > 0.5 {
            -ln_sigmoid(score)
        } else {
            -ln_sigmoid(-score)
        }
    }

    fn center_into(&self, token: usize, out: &mut [f64]) {
        let [a, b, c] = self.token_units[token];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.input.get(a, i) + self.input.get(b, i) + self.input.get(c, i);
        }
    }

    fn num_corpus_tokens(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    fn id(&self, token: &InteractionToken) -> Result<usize> {
        self.token_ids
            .get(token)
            .copied()
            .ok_or_else(|| Error::MissingEmbedding(token.to_string()))
    }

    /// Sum of the three subword vectors of `token`.
    pub fn center_vector(&self, token: &InteractionToken) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.cfg.dim];
        self.center_into(self.id(token)?, &mut v);
        Ok(v)
    }

    /// Model score of `context` appearing near `center`.
    pub fn score(&self, center: &InteractionToken, context: &InteractionToken) -> Result<f64> {
        let h = self.center_vector(center)?;
        Ok(dot(&h, self.output.row(self.id(context)?)))
    }

    /// `-ln σ(score)` for a positive pair.
    pub fn pair_loss(&self, center: &InteractionToken, context: &InteractionToken) -> Result<f64> {
        Ok(-ln_sigmoid(self.score(center, context)?))
    }

    pub fn epoch_losses(&self) -> &[f64] {
        &self.epoch_losses
    }

    pub fn tokens(&self) -> &[InteractionToken] {
        &self.tokens
    }

    pub fn table(&self) -> EmbeddingTable {
        let mut table = EmbeddingTable::new(self.cfg.dim);
        for (i, name) in self.unit_names.iter().enumerate() {
            table
                .insert(name.clone(), self.input.row(i).to_vec())
                .expect("rows have the configured dimension");
        }
        table
    }
}

fn ln_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(sentences: &[&[(usize, u8)]]) -> Corpus {
        Corpus::from_steps(sentences.iter().copied())
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(train_skipgram(&Corpus::default(), &SkipGramConfig::default()).is_err());
        let c = corpus(&[&[], &[]]);
        assert!(train_skipgram(&c, &SkipGramConfig::default()).is_err());
    }

    #[test]
    fn table_holds_every_subword_unit() {
        let c = corpus(&[&[(0, 1), (1, 0), (0, 0)], &[(2, 1)]]);
        let cfg = SkipGramConfig {
            dim: 4,
            epochs: 1,
            ..SkipGramConfig::default()
        };
        let table = train_skipgram(&c, &cfg).unwrap().table();
        for t in c.sentences.iter().flatten() {
            for unit in t.subwords() {
                assert!(table.get(&unit).is_some(), "{unit}");
            }
        }
        assert_eq!(table.len(), 3 + 2 + 4);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let c = corpus(&[&[(0, 1), (1, 0), (2, 1), (0, 0)], &[(2, 1), (1, 1)]]);
        let cfg = SkipGramConfig {
            dim: 8,
            seed: 11,
            ..SkipGramConfig::default()
        };
        let a = train_skipgram(&c, &cfg).unwrap().table().to_text();
        let b = train_skipgram(&c, &cfg).unwrap().table().to_text();
        assert_eq!(a, b);
    }

    #[test]
    fn ln_sigmoid_is_stable() {
        assert!((ln_sigmoid(0.0) + std::f64::consts::LN_2).abs() < 1e-15);
        assert!(ln_sigmoid(-800.0).is_finite());
        assert!(ln_sigmoid(800.0) == 0.0);
    }
}
