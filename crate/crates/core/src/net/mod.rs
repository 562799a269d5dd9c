//! The recurrent model: parameters, forward pass, loss with the Laplacian
//! penalty, exact BPTT gradients, Adam and the training loop.
//!
//! The same code serves question-level models (one output per question) and
//! the skill-level baseline (one output per joint skill); only the item
//! space differs.

mod adam;
mod checkpoint;
mod lstm;
mod params;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use lstm::{
    backward, forward, loss, lstm_step, predict_next, sequence_gradient, CellState, ForwardTrace,
    LossTerms, Mode, Step, StepTrace, PROB_CLAMP,
};
pub use params::{Dims, ParamSet, GATES, PARAM_NAMES};
pub use train::{train, train_sequences, EpochLog, InitMode, TrainConfig, Trained};
