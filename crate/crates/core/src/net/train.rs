use serde::{Deserialize, Serialize};

use super::data::{early_stopping_split, normalize_stats, Normalization, Split, VelocityAxis, Window};
use super::model::RnnModel;
use super::rnn::{forward_batch, init_params, loss_and_gradient, masked_loss, Architecture, SequenceBatch};
use super::scg::{scg_minimize, Control, Objective, ScgOptions};
use crate::config::TrainSection;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden: usize,
    pub layers: usize,
    pub taps: usize,
    pub split: [f64; 3],
    pub patience: usize,
    pub max_epochs: usize,
    pub scg_sigma: f64,
    pub scg_lambda: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn from_section(s: &TrainSection, seed: u64) -> Self {
        Self {
            hidden: s.hidden_units,
            layers: s.hidden_layers,
            taps: s.context_taps,
            split: s.split,
            patience: s.patience,
            max_epochs: s.max_epochs,
            scg_sigma: s.scg_sigma,
            scg_lambda: s.scg_lambda,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Normalized mean squared error over the training windows.
    pub train_mse: f64,
    pub val_mse: f64,
    pub accepted: bool,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    EarlyStopping,
    Converged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: RnnModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stop: StopReason,
    pub split: Split,
    /// Normalized MSE of the returned model on each partition.
    pub train_mse: f64,
    pub val_mse: f64,
    pub test_mse: f64,
}

/// Normalized batch of the given windows.
pub fn build_batch(windows: &[&Window], norm: &Normalization) -> Result<SequenceBatch> {
    let inputs: Vec<Vec<Vec<f64>>> = windows
        .iter()
        .map(|w| w.inputs.iter().map(|x| norm.normalize_input(x)).collect())
        .collect();
    let targets: Vec<Vec<f64>> = windows
        .iter()
        .map(|w| {
            w.target
                .iter()
                .zip(&w.mask)
                .map(|(y, m)| if *m { norm.normalize_target(*y) } else { 0.0 })
                .collect()
        })
        .collect();
    let mask: Vec<Vec<bool>> = windows.iter().map(|w| w.mask.clone()).collect();
    SequenceBatch::from_episodes(&inputs, &targets, &mask)
}

struct RnnObjective<'a> {
    arch: Architecture,
    batch: &'a SequenceBatch,
}

impl Objective for RnnObjective<'_> {
    fn dim(&self) -> usize {
        self.arch.n_params()
    }
    fn value(&mut self, w: &[f64]) -> Result<f64> {
        let y = forward_batch(&self.arch, w, self.batch)?.output;
        Ok(masked_loss(&y, self.batch))
    }
    fn value_and_gradient(&mut self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        loss_and_gradient(&self.arch, w, self.batch)
    }
}

fn mse(arch: &Architecture, w: &[f64], batch: &SequenceBatch) -> Result<f64> {
    let y = forward_batch(arch, w, batch)?.output;
    Ok(2.0 * masked_loss(&y, batch) / batch.n_valid().max(1) as f64)
}

/// Splits the windows, normalizes from the training part, and trains with
/// SCG under early stopping. The returned model carries the weights of the
/// best validation epoch.
///
/// Validation is evaluated after every iteration. Rejected SCG steps leave
/// the weights untouched and therefore do not count against patience.
pub fn scg_train(
    windows: &[Window],
    axis: VelocityAxis,
    channel_index: &[usize],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    if cfg.patience == 0 {
        return Err(Error::Config("patience must be at least 1".into()));
    }
    let n_in = channel_index.len();
    if windows.iter().any(|w| w.inputs.iter().any(|x| x.len() != n_in)) {
        return Err(Error::ShapeMismatch(format!("windows must carry {n_in} input channels")));
    }
    let split = early_stopping_split(windows.len(), cfg.split, cfg.seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| &windows[i]).collect::<Vec<_>>();
    let (train_w, val_w, test_w) = (pick(&split.train), pick(&split.val), pick(&split.test));

    let rows: Vec<&[f64]> = train_w
        .iter()
        .flat_map(|w| w.inputs.iter().zip(&w.mask).filter(|(_, m)| **m).map(|(x, _)| x.as_slice()))
        .collect();
    let targets: Vec<f64> = train_w
        .iter()
        .flat_map(|w| w.target.iter().zip(&w.mask).filter(|(_, m)| **m).map(|(y, _)| *y))
        .collect();
    if targets.is_empty() {
        return Err(Error::Config("training partition has no valid labels".into()));
    }
    let norm = normalize_stats(&rows, &targets)?;

    let train_b = build_batch(&train_w, &norm)?;
    let val_b = build_batch(&val_w, &norm)?;
    let test_b = build_batch(&test_w, &norm)?;

    let arch = Architecture {
        n_in,
        hidden: cfg.hidden,
        layers: cfg.layers,
        taps: cfg.taps,
    };
    arch.validate()?;
    let w0 = init_params(&arch, cfg.seed ^ 0x1417_0000_0000_0001);
    let n_train = train_b.n_valid().max(1) as f64;

    let mut best_val = mse(&arch, &w0, &val_b)?;
    let mut best_w = w0.clone();
    let mut best_epoch = 0;
    let mut stall = 0;
    let mut stop = StopReason::MaxEpochs;
    let mut history = Vec::new();

    let opts = ScgOptions {
        sigma: cfg.scg_sigma,
        lambda: cfg.scg_lambda,
        max_iter: cfg.max_epochs,
        grad_tol: 1e-12,
    };
    let mut obj = RnnObjective { arch, batch: &train_b };
    let mut last_val = best_val;
    let res = scg_minimize(&mut obj, w0, &opts, |it, w| {
        if it.accepted {
            last_val = mse(&arch, w, &val_b)?;
            if !last_val.is_finite() {
                return Err(Error::Divergence("validation error became non-finite".into()));
            }
            if last_val < best_val {
                best_val = last_val;
                best_w = w.to_vec();
                best_epoch = it.iter;
                stall = 0;
            } else {
                stall += 1;
            }
        }
        let rec = EpochRecord {
            epoch: it.iter,
            train_mse: 2.0 * it.error / n_train,
            val_mse: last_val,
            accepted: it.accepted,
            lambda: it.lambda,
        };
        on_epoch(&rec);
        history.push(rec);
        if stall >= cfg.patience {
            stop = StopReason::EarlyStopping;
            return Ok(Control::Stop);
        }
        Ok(Control::Continue)
    })?;
    if stop == StopReason::MaxEpochs && res.iterations < cfg.max_epochs {
        stop = StopReason::Converged;
    }

    let model = RnnModel::new(axis, arch, channel_index.to_vec(), best_w, norm)?;
    let train_mse = model.batch_mse(&train_b)?;
    let val_mse = model.batch_mse(&val_b)?;
    let test_mse = model.batch_mse(&test_b)?;
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
        stop,
        split,
        train_mse,
        val_mse,
        test_mse,
    })
}
