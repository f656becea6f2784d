use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::data::{Normalization, VelocityAxis, INPUT_CHANNELS};
use super::rnn::{forward_batch, masked_loss, Activation, Architecture, SequenceBatch};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "glidernav-rnn";
pub const MODEL_VERSION: u32 = 1;

/// A trained velocity regressor for one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnModel {
    pub format: String,
    pub version: u32,
    pub axis: VelocityAxis,
    pub arch: Architecture,
    pub activation: Activation,
    /// Names of the input channels, in network order.
    pub channels: Vec<String>,
    /// Indices of `channels` into the full feature vector.
    pub channel_index: Vec<usize>,
    /// Flat parameters, see [`super::rnn`] for the layout.
    pub params: Vec<f64>,
    pub norm: Normalization,
    pub config_fingerprint: String,
}

impl RnnModel {
    pub fn new(axis: VelocityAxis, arch: Architecture, channel_index: Vec<usize>, params: Vec<f64>, norm: Normalization) -> Result<Self> {
        arch.validate()?;
        if channel_index.len() != arch.n_in || norm.in_mean.len() != arch.n_in || norm.in_std.len() != arch.n_in {
            return Err(Error::ShapeMismatch("channels, normalization and input width disagree".into()));
        }
        if params.len() != arch.n_params() {
            return Err(Error::ShapeMismatch(format!("{} parameters for {} slots", params.len(), arch.n_params())));
        }
        if channel_index.iter().any(|&c| c >= INPUT_CHANNELS.len()) {
            return Err(Error::ShapeMismatch("channel index out of range".into()));
        }
        Ok(Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            axis,
            arch,
            activation: Activation::Tanh,
            channels: channel_index.iter().map(|&c| INPUT_CHANNELS[c].to_string()).collect(),
            channel_index,
            params,
            norm,
            config_fingerprint: String::new(),
        })
    }

    /// Output in normalized and physical units for one episode of raw
    /// (un-normalized) inputs, starting from zero context.
    pub fn forward(&self, raw_inputs: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let z: Vec<Vec<f64>> = raw_inputs.iter().map(|x| self.norm.normalize_input(x)).collect();
        let n = z.len();
        if n == 0 {
            return Ok((Vec::new(), Vec::new()));
        }
        let batch = SequenceBatch::from_episodes(&[z], &[vec![0.0; n]], &[vec![false; n]])?;
        let y = forward_batch(&self.arch, &self.params, &batch)?.output;
        let phys = y.iter().map(|v| self.norm.denormalize_target(*v)).collect();
        Ok((y.to_vec(), phys))
    }

    /// Physical-unit predictions over an arbitrarily long series.
    ///
    /// The series is covered by windows of `window` steps overlapping by
    /// half; each window starts from zero context as in training and only
    /// its second half is kept (all of it for the first window), so every
    /// prediction has seen at least half a window of history.
    pub fn predict_series(&self, raw_inputs: &[Vec<f64>], window: usize) -> Result<Vec<f64>> {
        let n = raw_inputs.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let window = window.max(2);
        let warm = window / 2;
        let stride = window - warm;
        let z: Vec<Vec<f64>> = raw_inputs.iter().map(|x| self.norm.normalize_input(x)).collect();
        let mut starts = vec![0usize];
        while starts.last().unwrap() + window < n {
            starts.push(starts.last().unwrap() + stride);
        }
        let zero = vec![0.0; self.arch.n_in];
        let episodes: Vec<Vec<Vec<f64>>> = starts
            .iter()
            .map(|&s| (s..s + window).map(|t| z.get(t).unwrap_or(&zero).clone()).collect())
            .collect();
        let e = episodes.len();
        let batch = SequenceBatch::from_episodes(&episodes, &vec![vec![0.0; window]; e], &vec![vec![false; window]; e])?;
        let y = batch.unbatch(&forward_batch(&self.arch, &self.params, &batch)?.output);
        let mut out = vec![0.0; n];
        for (w, &s) in starts.iter().enumerate() {
            let from = if w == 0 { 0 } else { warm };
            for k in from..window {
                if s + k < n {
                    out[s + k] = self.norm.denormalize_target(y[w][k]);
                }
            }
        }
        Ok(out)
    }

    /// Masked mean squared error in normalized units over a batch whose
    /// inputs and targets are already normalized.
    pub fn batch_mse(&self, batch: &SequenceBatch) -> Result<f64> {
        let y: Array1<f64> = forward_batch(&self.arch, &self.params, batch)?.output;
        Ok(2.0 * masked_loss(&y, batch) / batch.n_valid().max(1) as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: RnnModel = serde_json::from_str(text).map_err(|e| Error::SchemaMismatch(format!("model file: {e}")))?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::SchemaMismatch(format!("unsupported model format {} v{}", m.format, m.version)));
        }
        let checked = RnnModel::new(m.axis, m.arch, m.channel_index.clone(), m.params.clone(), m.norm.clone())
            .map_err(|e| Error::SchemaMismatch(e.to_string()))?;
        if checked.channels != m.channels {
            return Err(Error::SchemaMismatch("channel names do not match their indices".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::pipeline::io::write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::rnn::init_params;

    fn model() -> RnnModel {
        let arch = Architecture {
            n_in: 15,
            hidden: 4,
            layers: 2,
            taps: 5,
        };
        let mut norm = Normalization::identity(15);
        norm.out_mean = 0.3;
        norm.out_std = 0.1 + 1.0 / 3.0;
        RnnModel::new(VelocityAxis::Surge, arch, (0..15).collect(), init_params(&arch, 1), norm).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = model();
        let back = RnnModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn schema_errors() {
        let mut m = model();
        m.version = 99;
        assert!(matches!(RnnModel::from_json(&m.to_json().unwrap()), Err(Error::SchemaMismatch(_))));
        let mut m = model();
        m.params.pop();
        assert!(matches!(RnnModel::from_json(&m.to_json().unwrap()), Err(Error::SchemaMismatch(_))));
        assert!(matches!(RnnModel::from_json("{"), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn windowed_prediction_matches_direct_run_on_first_window() {
        let m = model();
        let xs: Vec<Vec<f64>> = (0..37).map(|t| (0..15).map(|c| ((t * 7 + c) as f64).sin()).collect()).collect();
        let long = m.predict_series(&xs, 10).unwrap();
        let (_, direct) = m.forward(&xs[..10]).unwrap();
        assert_eq!(&long[..10], &direct[..]);
        // window starting at 5 supplies steps 10..15
        let (_, second) = m.forward(&xs[5..15]).unwrap();
        assert_eq!(&long[10..15], &second[5..]);
        assert_eq!(long.len(), 37);
    }

    #[test]
    fn zero_model_predicts_target_mean() {
        let mut m = model();
        m.params.iter_mut().for_each(|p| *p = 0.0);
        let xs = vec![vec![1.0; 15]; 8];
        let y = m.predict_series(&xs, 4).unwrap();
        assert!(y.iter().all(|v| *v == m.norm.out_mean));
    }
}
