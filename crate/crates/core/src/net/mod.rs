//! Recurrent surge/sway regressors trained with scaled conjugate gradient.

pub mod data;
pub mod model;
pub mod rnn;
pub mod scg;
pub mod train;

pub use data::{
    build_input_vector, channel_selection, early_stopping_split, normalize_stats, prepare_inputs, prepare_series,
    windows, Normalization, Series, Split, VelocityAxis, Window, INPUT_CHANNELS, N_INPUTS,
};
pub use model::RnnModel;
pub use rnn::{forward_batch, init_params, loss_and_gradient, masked_loss, Activation, Architecture, SequenceBatch};
pub use scg::{scg_minimize, Control, Objective, ScgIteration, ScgOptions, ScgResult};
pub use train::{build_batch, scg_train, EpochRecord, StopReason, TrainConfig, TrainOutcome};

use crate::error::{Error, Result};

/// `½ Σ (pred − target)²`.
pub fn rnn_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            expected: target.len(),
            actual: pred.len(),
        });
    }
    Ok(0.5 * pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum::<f64>())
}

/// Normalized and physical-unit outputs of one episode from zero context.
pub fn rnn_forward(model: &RnnModel, raw_inputs: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    model.forward(raw_inputs)
}

/// Flattened gradient of the batch loss for `model`'s weights.
pub fn rnn_gradient(model: &RnnModel, batch: &SequenceBatch) -> Result<Vec<f64>> {
    Ok(loss_and_gradient(&model.arch, &model.params, batch)?.1)
}
