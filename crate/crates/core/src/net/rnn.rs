//! Elman-style network: `layers` tanh hidden layers of `hidden` units, each
//! feeding its own activations back at delays `1..=taps` through distinct
//! matrices, and a linear scalar output.
//!
//! Flat parameter order, per hidden layer `k`:
//! `w_in[k]` (hidden × fan_in, row-major), `w_ctx[k][d]` for `d = 1..=taps`
//! (hidden × hidden, row-major), `b[k]` (hidden); then `w_out` (hidden) and
//! `b_out`.
//!
//! Sequences are processed in lockstep batches of `E` equal-length episodes.
//! Matrices holding a batch are time-major: column `t * E + e` is step `t` of
//! episode `e`, so the block of step `t` is contiguous and shifting by `d`
//! steps is a column offset of `d * E`.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub n_in: usize,
    pub hidden: usize,
    pub layers: usize,
    pub taps: usize,
}

impl Architecture {
    fn fan_in(&self, layer: usize) -> usize {
        if layer == 0 {
            self.n_in
        } else {
            self.hidden
        }
    }

    fn layer_len(&self, layer: usize) -> usize {
        let h = self.hidden;
        h * self.fan_in(layer) + self.taps * h * h + h
    }

    pub fn n_params(&self) -> usize {
        (0..self.layers).map(|k| self.layer_len(k)).sum::<usize>() + self.hidden + 1
    }

    fn layer_offset(&self, layer: usize) -> usize {
        (0..layer).map(|k| self.layer_len(k)).sum()
    }

    fn output_offset(&self) -> usize {
        self.layer_offset(self.layers)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_in == 0 || self.hidden == 0 || self.layers == 0 {
            return Err(Error::ShapeMismatch(format!("degenerate architecture {self:?}")));
        }
        Ok(())
    }
}

/// Views of one hidden layer's parameters.
struct LayerView<'a> {
    w_in: ArrayView2<'a, f64>,
    w_ctx: Vec<ArrayView2<'a, f64>>,
    bias: ArrayView1<'a, f64>,
}

fn layer_view<'a>(arch: &Architecture, params: &'a [f64], k: usize) -> LayerView<'a> {
    let h = arch.hidden;
    let fan = arch.fan_in(k);
    let mut off = arch.layer_offset(k);
    let w_in = ArrayView2::from_shape((h, fan), &params[off..off + h * fan]).expect("layer shape");
    off += h * fan;
    let w_ctx = (0..arch.taps)
        .map(|d| {
            let o = off + d * h * h;
            ArrayView2::from_shape((h, h), &params[o..o + h * h]).expect("context shape")
        })
        .collect();
    off += arch.taps * h * h;
    let bias = ArrayView1::from(&params[off..off + h]);
    LayerView { w_in, w_ctx, bias }
}

/// A lockstep batch of `episodes` sequences of `len` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBatch {
    /// `n_in × (len · episodes)`, time-major columns.
    pub inputs: Array2<f64>,
    /// `len · episodes`, same column order.
    pub targets: Array1<f64>,
    /// 1 where the target counts toward the loss, else 0.
    pub mask: Array1<f64>,
    pub len: usize,
    pub episodes: usize,
}

impl SequenceBatch {
    /// Builds a batch from per-episode row-major sequences (`[t][channel]`).
    /// Every episode must have the same length.
    pub fn from_episodes(inputs: &[Vec<Vec<f64>>], targets: &[Vec<f64>], mask: &[Vec<bool>]) -> Result<Self> {
        let e = inputs.len();
        if e == 0 || targets.len() != e || mask.len() != e {
            return Err(Error::ShapeMismatch("batch needs matching, non-empty episode lists".into()));
        }
        let len = inputs[0].len();
        let n_in = inputs[0].first().map(Vec::len).unwrap_or(0);
        if len == 0 {
            return Err(Error::ShapeMismatch("empty episode".into()));
        }
        let mut x = Array2::zeros((n_in, len * e));
        let mut y = Array1::zeros(len * e);
        let mut m = Array1::zeros(len * e);
        for ep in 0..e {
            if inputs[ep].len() != len || targets[ep].len() != len || mask[ep].len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    actual: inputs[ep].len(),
                });
            }
            for t in 0..len {
                let col = t * e + ep;
                if inputs[ep][t].len() != n_in {
                    return Err(Error::ShapeMismatch(format!("expected {n_in} input channels")));
                }
                for (c, v) in inputs[ep][t].iter().enumerate() {
                    x[[c, col]] = *v;
                }
                y[col] = targets[ep][t];
                m[col] = if mask[ep][t] { 1.0 } else { 0.0 };
            }
        }
        Ok(Self {
            inputs: x,
            targets: y,
            mask: m,
            len,
            episodes: e,
        })
    }

    pub fn n_in(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn n_valid(&self) -> usize {
        self.mask.iter().filter(|m| **m > 0.0).count()
    }

    /// Output column order back to `[episode][t]`.
    pub fn unbatch(&self, y: &Array1<f64>) -> Vec<Vec<f64>> {
        (0..self.episodes)
            .map(|ep| (0..self.len).map(|t| y[t * self.episodes + ep]).collect())
            .collect()
    }
}

/// Hidden activations of every layer for a batch.
pub struct ForwardTrace {
    pub hidden: Vec<Array2<f64>>,
    pub output: Array1<f64>,
}

/// Runs the network from zero context over every episode of the batch.
pub fn forward_batch(arch: &Architecture, params: &[f64], batch: &SequenceBatch) -> Result<ForwardTrace> {
    if params.len() != arch.n_params() {
        return Err(Error::ShapeMismatch(format!(
            "parameter vector has {} entries, architecture needs {}",
            params.len(),
            arch.n_params()
        )));
    }
    if batch.n_in() != arch.n_in {
        return Err(Error::ShapeMismatch(format!(
            "model expects {} inputs, batch has {}",
            arch.n_in,
            batch.n_in()
        )));
    }
    let e = batch.episodes;
    let mut hidden: Vec<Array2<f64>> = Vec::with_capacity(arch.layers);
    for k in 0..arch.layers {
        let lv = layer_view(arch, params, k);
        let x = if k == 0 { batch.inputs.view() } else { hidden[k - 1].view() };
        let mut h: Array2<f64> = lv.w_in.dot(&x);
        h += &lv.bias.view().insert_axis(Axis(1));
        for t in 0..batch.len {
            let (done, mut rest) = h.view_mut().split_at(Axis(1), t * e);
            let mut cur = rest.slice_mut(s![.., ..e]);
            for d in 1..=arch.taps.min(t) {
                let prev = done.slice(s![.., (t - d) * e..(t - d + 1) * e]);
                ndarray::linalg::general_mat_mul(1.0, &lv.w_ctx[d - 1], &prev, 1.0, &mut cur);
            }
            cur.mapv_inplace(f64::tanh);
        }
        hidden.push(h);
    }
    let off = arch.output_offset();
    let w_out = ArrayView1::from(&params[off..off + arch.hidden]);
    let b_out = params[off + arch.hidden];
    let output = w_out.dot(&hidden[arch.layers - 1]) + b_out;
    Ok(ForwardTrace { hidden, output })
}

/// `½ Σ mask (y − target)²`.
pub fn masked_loss(output: &Array1<f64>, batch: &SequenceBatch) -> f64 {
    output
        .iter()
        .zip(batch.targets.iter())
        .zip(batch.mask.iter())
        .map(|((y, t), m)| m * (y - t) * (y - t))
        .sum::<f64>()
        * 0.5
}

/// Loss and its exact gradient by backpropagation through time.
pub fn loss_and_gradient(arch: &Architecture, params: &[f64], batch: &SequenceBatch) -> Result<(f64, Vec<f64>)> {
    let trace = forward_batch(arch, params, batch)?;
    let loss = masked_loss(&trace.output, batch);
    let e = batch.episodes;
    let l = batch.len;
    let h = arch.hidden;
    let mut grad = vec![0.0; params.len()];

    let dy: Array1<f64> = (&trace.output - &batch.targets) * &batch.mask;
    let off = arch.output_offset();
    let w_out = ArrayView1::from(&params[off..off + h]);
    let top = &trace.hidden[arch.layers - 1];
    let g_wout = top.dot(&dy);
    grad[off..off + h].copy_from_slice(g_wout.as_slice().expect("contiguous"));
    grad[off + h] = dy.sum();

    // gradient w.r.t. the current layer's activations
    let mut g_h: Array2<f64> = w_out.insert_axis(Axis(1)).dot(&dy.view().insert_axis(Axis(0)));
    for k in (0..arch.layers).rev() {
        let lv = layer_view(arch, params, k);
        let hk = &trace.hidden[k];
        // g_h becomes the pre-activation gradient block by block, newest first
        for t in (0..l).rev() {
            let (mut earlier, mut rest) = g_h.view_mut().split_at(Axis(1), t * e);
            let mut cur = rest.slice_mut(s![.., ..e]);
            let act = hk.slice(s![.., t * e..(t + 1) * e]);
            cur.zip_mut_with(&act, |g, a| *g *= 1.0 - a * a);
            for d in 1..=arch.taps.min(t) {
                let mut target = earlier.slice_mut(s![.., (t - d) * e..(t - d + 1) * e]);
                ndarray::linalg::general_mat_mul(1.0, &lv.w_ctx[d - 1].t(), &cur, 1.0, &mut target);
            }
        }
        let g_pre = g_h;
        let x = if k == 0 { batch.inputs.view() } else { trace.hidden[k - 1].view() };
        let fan = arch.fan_in(k);
        let mut o = arch.layer_offset(k);
        let g_win = g_pre.dot(&x.t());
        grad[o..o + h * fan].copy_from_slice(g_win.as_standard_layout().as_slice().expect("contiguous"));
        o += h * fan;
        for d in 1..=arch.taps {
            if d < l {
                let a = g_pre.slice(s![.., d * e..]);
                let b = hk.slice(s![.., ..(l - d) * e]);
                let g = a.dot(&b.t());
                grad[o..o + h * h].copy_from_slice(g.as_standard_layout().as_slice().expect("contiguous"));
            }
            o += h * h;
        }
        let g_b = g_pre.sum_axis(Axis(1));
        grad[o..o + h].copy_from_slice(g_b.as_slice().expect("contiguous"));
        g_h = if k > 0 { lv.w_in.t().dot(&g_pre) } else { Array2::zeros((0, 0)) };
    }
    Ok((loss, grad))
}

/// Nguyen-Widrow initialization of the feed-forward weights: each unit's
/// input row gets a random direction with norm `0.7 h^(1/fan_in)` and the
/// biases are spread evenly over the same range, so units start in
/// different parts of the tanh curve. First-layer rows are halved because
/// z-scored inputs span roughly ±2. Context weights start small
/// (±0.5/√(taps·h)) and the output layer is uniform ±1/√h.
pub fn init_params(arch: &Architecture, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = arch.hidden;
    let mut p = Vec::with_capacity(arch.n_params());
    for k in 0..arch.layers {
        let fan = arch.fan_in(k);
        let beta = 0.7 * (h as f64).powf(1.0 / fan as f64);
        let input_scale = if k == 0 { 0.5 } else { 1.0 };
        let mut signs = Vec::with_capacity(h);
        for _ in 0..h {
            let row: Vec<f64> = (0..fan).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            signs.push(if row[0] < 0.0 { -1.0 } else { 1.0 });
            p.extend(row.iter().map(|x| x / norm * beta * input_scale));
        }
        let ctx = 0.5 / ((arch.taps * h) as f64).sqrt();
        for _ in 0..arch.taps * h * h {
            p.push(rng.gen_range(-ctx..ctx));
        }
        for (i, sg) in signs.iter().enumerate() {
            let spread = if h > 1 { 2.0 * i as f64 / (h - 1) as f64 - 1.0 } else { 0.0 };
            p.push(beta * spread * sg);
        }
    }
    let bound = 1.0 / (h as f64).sqrt();
    for _ in 0..=h {
        p.push(rng.gen_range(-bound..bound));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toy_batch(n_in: usize, len: usize, episodes: usize, seed: u64) -> SequenceBatch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<Vec<Vec<f64>>> = (0..episodes)
            .map(|_| (0..len).map(|_| (0..n_in).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
            .collect();
        let targets: Vec<Vec<f64>> = (0..episodes)
            .map(|_| (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mask: Vec<Vec<bool>> = (0..episodes)
            .map(|_| (0..len).map(|_| rng.gen_range(0.0..1.0) > 0.1).collect())
            .collect();
        SequenceBatch::from_episodes(&inputs, &targets, &mask).unwrap()
    }

    #[test]
    fn parameter_count() {
        let a = Architecture {
            n_in: 15,
            hidden: 50,
            layers: 3,
            taps: 5,
        };
        let expected = (50 * 15 + 5 * 2500 + 50) + 2 * (50 * 50 + 5 * 2500 + 50) + 51;
        assert_eq!(a.n_params(), expected);
        assert_eq!(init_params(&a, 0).len(), expected);
    }

    #[test]
    fn zero_weights_give_zero_output() {
        let a = Architecture {
            n_in: 4,
            hidden: 6,
            layers: 2,
            taps: 5,
        };
        let b = toy_batch(4, 12, 3, 1);
        let out = forward_batch(&a, &vec![0.0; a.n_params()], &b).unwrap().output;
        assert!(out.iter().all(|v| *v == 0.0));
    }

    /// One input, one tanh unit, one output, two taps, by hand.
    #[test]
    fn hand_computed_toy() {
        let a = Architecture {
            n_in: 1,
            hidden: 1,
            layers: 1,
            taps: 2,
        };
        // w_in, w_ctx1, w_ctx2, b, w_out, b_out
        let p = [0.7, -0.4, 0.25, 0.1, 1.5, -0.2];
        let xs = [0.5, -1.0, 2.0];
        let b = SequenceBatch::from_episodes(&[xs.iter().map(|x| vec![*x]).collect()], &[vec![0.0; 3]], &[vec![true; 3]])
            .unwrap();
        let out = forward_batch(&a, &p, &b).unwrap().output;
        let h1 = (0.7 * 0.5 + 0.1_f64).tanh();
        let h2 = (0.7 * -1.0 - 0.4 * h1 + 0.1_f64).tanh();
        let h3 = (0.7 * 2.0 - 0.4 * h2 + 0.25 * h1 + 0.1_f64).tanh();
        for (y, h) in out.iter().zip([h1, h2, h3]) {
            assert_abs_diff_eq!(*y, 1.5 * h - 0.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn batched_equals_single_episodes() {
        let a = Architecture {
            n_in: 3,
            hidden: 5,
            layers: 2,
            taps: 5,
        };
        let p = init_params(&a, 9);
        let b = toy_batch(3, 15, 4, 2);
        let all = b.unbatch(&forward_batch(&a, &p, &b).unwrap().output);
        for ep in 0..4 {
            let xs: Vec<Vec<f64>> = (0..15).map(|t| b.inputs.column(t * 4 + ep).to_vec()).collect();
            let single = SequenceBatch::from_episodes(&[xs], &[vec![0.0; 15]], &[vec![true; 15]]).unwrap();
            let y = forward_batch(&a, &p, &single).unwrap().output;
            for t in 0..15 {
                assert_eq!(y[t], all[ep][t]);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let a = Architecture {
            n_in: 3,
            hidden: 2,
            layers: 1,
            taps: 5,
        };
        let b = toy_batch(4, 5, 1, 0);
        assert!(matches!(
            forward_batch(&a, &init_params(&a, 0), &b),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(forward_batch(&a, &[0.0; 3], &toy_batch(3, 5, 1, 0)), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn output_bias_gradient_is_residual_sum() {
        let a = Architecture {
            n_in: 3,
            hidden: 4,
            layers: 2,
            taps: 5,
        };
        let p = init_params(&a, 3);
        let b = toy_batch(3, 10, 2, 4);
        let (_, g) = loss_and_gradient(&a, &p, &b).unwrap();
        let y = forward_batch(&a, &p, &b).unwrap().output;
        let oracle: f64 = (0..y.len()).map(|i| b.mask[i] * (y[i] - b.targets[i])).sum();
        assert_abs_diff_eq!(g[a.n_params() - 1], oracle, epsilon = 1e-12);
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let a = Architecture {
            n_in: 3,
            hidden: 4,
            layers: 2,
            taps: 5,
        };
        let p = init_params(&a, 5);
        let mut b = toy_batch(3, 10, 2, 6);
        b.targets = forward_batch(&a, &p, &b).unwrap().output;
        let (loss, g) = loss_and_gradient(&a, &p, &b).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.iter().all(|v| *v == 0.0));
    }
}
