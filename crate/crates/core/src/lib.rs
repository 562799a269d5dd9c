//! Question-level deep knowledge tracing.
//!
//! An LSTM reads a learner's `(question, correct)` history and predicts the
//! probability of answering every question correctly at the next step.
//! Training optionally adds a graph-Laplacian smoothness penalty that pulls
//! together predictions for questions sharing a skill, and the input
//! embedding matrix can be initialized from subword skip-gram vectors
//! trained on the interaction sequences themselves.
//!
//! Modules, bottom-up:
//!
//! - [`data`]: CSV ingestion, cleaning, learner-level fold splits, a
//!   synthetic generator and the on-disk dataset dump.
//! - [`graph`]: question-similarity graph, sparse Laplacian, penalty and
//!   its gradient.
//! - [`embed`]: interaction corpus, subword skip-gram, embedding tables.
//! - [`net`]: parameters, forward pass, exact BPTT, Adam, training loop,
//!   checkpoints.
//! - [`eval`]: AUC, cross-validation harness, PCA of the input embeddings.
//! - [`cli`]: the `qdkt` command-line front end.

pub mod cli;
pub mod data;
pub mod embed;
pub mod error;
pub mod eval;
pub mod graph;
pub mod matrix;
pub mod net;
pub mod seed;

pub use error::{Error, Result};
