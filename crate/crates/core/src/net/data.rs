//! Feature extraction, label preconditioning, windowing, splitting and
//! normalization.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::PreprocessConfig;
use crate::error::{Error, Result};
use crate::sensors::{gaussian_smooth, interpolate_flagged, lowpass_filter, remove_outliers, SensorRecord};

pub const N_INPUTS: usize = 15;

/// Network input channels in their fixed order.
pub const INPUT_CHANNELS: [&str; N_INPUTS] = [
    "sin_yaw",
    "cos_yaw",
    "roll_rad",
    "pitch_rad",
    "p_rad_s",
    "q_rad_s",
    "r_rad_s",
    "ax_m_s2",
    "ay_m_s2",
    "az_m_s2",
    "depth_m",
    "heave_w_r_m_s",
    "vbs_m3",
    "mm_x_m",
    "mm_roll_rad",
];

/// Channels kept by the reduced sway input set.
const LATERAL_CHANNELS: [usize; 11] = [0, 1, 2, 3, 4, 5, 6, 8, 10, 11, 14];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityAxis {
    Surge,
    Sway,
}

impl VelocityAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Surge => "surge",
            Self::Sway => "sway",
        }
    }

    pub fn label(&self, rec: &SensorRecord) -> f64 {
        match self {
            Self::Surge => rec.label_u_r,
            Self::Sway => rec.label_v_r,
        }
    }
}

impl std::str::FromStr for VelocityAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "surge" => Ok(Self::Surge),
            "sway" => Ok(Self::Sway),
            other => Err(Error::Config(format!("unknown axis {other:?} (surge|sway)"))),
        }
    }
}

/// Indices into [`INPUT_CHANNELS`] used by a network.
pub fn channel_selection(axis: VelocityAxis, sway_channels: &str) -> Result<Vec<usize>> {
    match (axis, sway_channels) {
        (VelocityAxis::Sway, "lateral") => Ok(LATERAL_CHANNELS.to_vec()),
        (_, "full") | (VelocityAxis::Surge, "lateral") => Ok((0..N_INPUTS).collect()),
        (_, other) => Err(Error::Config(format!("unknown channel set {other:?}"))),
    }
}

/// Raw (un-normalized) feature vector of one record.
pub fn build_input_vector(rec: &SensorRecord) -> [f64; N_INPUTS] {
    let (s, c) = rec.euler.psi.sin_cos();
    [
        s,
        c,
        rec.euler.phi,
        rec.euler.theta,
        rec.omega_meas[0],
        rec.omega_meas[1],
        rec.omega_meas[2],
        rec.accel_meas[0],
        rec.accel_meas[1],
        rec.accel_meas[2],
        rec.depth,
        rec.depth_rate_heave,
        rec.ctrl.vbs,
        rec.ctrl.mm_x,
        rec.ctrl.mm_roll,
    ]
}

/// One continuous recording, preconditioned, with rows `[t][channel]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub inputs: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub valid: Vec<bool>,
}

fn filter_channel(x: &[f64], sigma: f64, cutoff_hz: f64, rate_hz: f64) -> Result<Vec<f64>> {
    let low = if cutoff_hz > 0.0 {
        lowpass_filter(x, cutoff_hz, rate_hz)?
    } else {
        x.to_vec()
    };
    gaussian_smooth(&low, sigma)
}

/// Inputs only, filtered the same way as for training.
pub fn prepare_inputs(records: &[SensorRecord], channels: &[usize], pre: &PreprocessConfig, rate_hz: f64) -> Result<Vec<Vec<f64>>> {
    let raw: Vec<[f64; N_INPUTS]> = records.iter().map(build_input_vector).collect();
    let cols = channels
        .iter()
        .map(|&c| {
            let col: Vec<f64> = raw.iter().map(|r| r[c]).collect();
            filter_channel(&col, pre.input_smooth_sigma, pre.lowpass_cutoff_hz, rate_hz)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..records.len()).map(|t| cols.iter().map(|c| c[t]).collect()).collect())
}

/// Features and the preconditioned label of one axis. Gaps without bottom
/// lock are bridged before filtering and stay masked afterwards.
pub fn prepare_series(
    records: &[SensorRecord],
    axis: VelocityAxis,
    channels: &[usize],
    pre: &PreprocessConfig,
    rate_hz: f64,
) -> Result<Series> {
    let inputs = prepare_inputs(records, channels, pre, rate_hz)?;
    let valid: Vec<bool> = records.iter().map(|r| r.label_valid).collect();
    let raw: Vec<f64> = records.iter().map(|r| axis.label(r)).collect();
    let target = if valid.iter().any(|v| *v) {
        let invalid: Vec<bool> = valid.iter().map(|v| !v).collect();
        let bridged = interpolate_flagged(&raw, &invalid);
        let (clean, _) = remove_outliers(&bridged, pre.outlier_z, pre.outlier_window)?;
        gaussian_smooth(&clean, pre.label_smooth_sigma)?
    } else {
        raw
    };
    Ok(Series { inputs, target, valid })
}

/// A fixed-length training episode; padding rows are masked.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub inputs: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Cuts a series into consecutive windows of `len`; the tail is zero padded
/// and masked.
pub fn windows(series: &Series, len: usize) -> Vec<Window> {
    let n = series.target.len();
    let n_in = series.inputs.first().map(Vec::len).unwrap_or(0);
    (0..n.div_ceil(len))
        .map(|w| {
            let mut win = Window {
                inputs: Vec::with_capacity(len),
                target: Vec::with_capacity(len),
                mask: Vec::with_capacity(len),
            };
            for t in w * len..(w + 1) * len {
                if t < n {
                    win.inputs.push(series.inputs[t].clone());
                    win.target.push(series.target[t]);
                    win.mask.push(series.valid[t]);
                } else {
                    win.inputs.push(vec![0.0; n_in]);
                    win.target.push(0.0);
                    win.mask.push(false);
                }
            }
            win
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Random partition of `n` windows by `ratios` (train, val, test).
pub fn early_stopping_split(n: usize, ratios: [f64; 3], seed: u64) -> Result<Split> {
    if (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 || ratios.iter().any(|r| *r < 0.0) {
        return Err(Error::Config("split ratios must be non-negative and sum to 1".into()));
    }
    let n_train = (ratios[0] * n as f64).round() as usize;
    let n_val = ((ratios[1] * n as f64).round() as usize).min(n.saturating_sub(n_train));
    let n_test = n - n_train - n_val;
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::Config(format!(
            "{n} windows give an empty partition ({n_train}/{n_val}/{n_test})"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = idx[..n_train].to_vec();
    let mut val = idx[n_train..n_train + n_val].to_vec();
    let mut test = idx[n_train + n_val..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, val, test })
}

pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub in_mean: Vec<f64>,
    pub in_std: Vec<f64>,
    pub out_mean: f64,
    pub out_std: f64,
}

fn mean_std<'a>(xs: impl Iterator<Item = &'a f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count().max(1) as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt().max(STD_FLOOR))
}

/// Per-channel statistics over `inputs` rows and the valid `targets`.
pub fn normalize_stats(inputs: &[&[f64]], targets: &[f64]) -> Result<Normalization> {
    let n_in = inputs.first().map(|r| r.len()).ok_or_else(|| Error::Config("empty training partition".into()))?;
    let mut in_mean = Vec::with_capacity(n_in);
    let mut in_std = Vec::with_capacity(n_in);
    for c in 0..n_in {
        let col: Vec<f64> = inputs.iter().map(|r| r[c]).collect();
        let (m, s) = mean_std(col.iter());
        in_mean.push(m);
        in_std.push(s);
    }
    let (out_mean, out_std) = if targets.is_empty() { (0.0, 1.0) } else { mean_std(targets.iter()) };
    Ok(Normalization {
        in_mean,
        in_std,
        out_mean,
        out_std,
    })
}

impl Normalization {
    pub fn identity(n_in: usize) -> Self {
        Self {
            in_mean: vec![0.0; n_in],
            in_std: vec![1.0; n_in],
            out_mean: 0.0,
            out_std: 1.0,
        }
    }

    pub fn normalize_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.in_mean.iter().zip(&self.in_std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn denormalize_input(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.in_mean.iter().zip(&self.in_std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    pub fn normalize_target(&self, y: f64) -> f64 {
        (y - self.out_mean) / self.out_std
    }

    pub fn denormalize_target(&self, z: f64) -> f64 {
        z * self.out_std + self.out_mean
    }
}
