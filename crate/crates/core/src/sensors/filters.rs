//! Zero-phase Gaussian smoothing, a first-order low-pass and a rolling
//! median outlier filter for preconditioning series.

use crate::error::{Error, Result};

/// Half-sample symmetric reflection of an arbitrary index into `0..n`.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Normalized Gaussian kernel truncated at ±4σ.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Convolution with [`gaussian_kernel`], reflect-padded. `sigma == 0`
/// returns the input unchanged.
pub fn gaussian_smooth(series: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Config(format!("smoothing sigma {sigma} must be finite and >= 0")));
    }
    if sigma == 0.0 || series.is_empty() {
        return Ok(series.to_vec());
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let n = series.len();
    Ok((0..n as isize)
        .map(|i| {
            k.iter()
                .enumerate()
                .map(|(j, w)| w * series[reflect(i + j as isize - r, n)])
                .sum()
        })
        .collect())
}

/// First-order IIR low-pass `y[k] = y[k−1] + a (x[k] − y[k−1])` with
/// `a = dt / (RC + dt)`, `RC = 1 / (2π f_c)`, started at `y[0] = x[0]`.
pub fn lowpass_filter(series: &[f64], cutoff_hz: f64, rate_hz: f64) -> Result<Vec<f64>> {
    if !(cutoff_hz > 0.0 && rate_hz > 0.0 && cutoff_hz < rate_hz / 2.0) {
        return Err(Error::Config(format!(
            "low-pass cutoff {cutoff_hz} Hz must lie in (0, {}) Hz",
            rate_hz / 2.0
        )));
    }
    let dt = 1.0 / rate_hz;
    let rc = 1.0 / (2.0 * std::f64::consts::PI * cutoff_hz);
    let a = dt / (rc + dt);
    let mut out = Vec::with_capacity(series.len());
    let mut y = match series.first() {
        Some(v) => *v,
        None => return Ok(out),
    };
    for x in series {
        y += a * (x - y);
        out.push(y);
    }
    Ok(out)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Flags samples further than `z_threshold` robust standard deviations from
/// a centred rolling median and replaces them by linear interpolation.
///
/// The robust std is `1.4826 · MAD` of the residuals, floored at 1% of the
/// series' own robust spread so a noiseless series does not flag the small
/// median bias at its extrema.
pub fn remove_outliers(series: &[f64], z_threshold: f64, window: usize) -> Result<(Vec<f64>, Vec<bool>)> {
    if !(z_threshold > 0.0) || window == 0 {
        return Err(Error::Config("outlier threshold and window must be positive".into()));
    }
    let n = series.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let half = (window / 2) as isize;
    // point reflection about the end samples keeps a local trend unbiased
    let at = |k: isize| -> f64 {
        if k < 0 {
            2.0 * series[0] - series[(-k).min(n as isize - 1) as usize]
        } else if k >= n as isize {
            let last = n as isize - 1;
            2.0 * series[last as usize] - series[(2 * last - k).max(0) as usize]
        } else {
            series[k as usize]
        }
    };
    let mut buf = Vec::with_capacity(window);
    let resid: Vec<f64> = (0..n as isize)
        .map(|i| {
            buf.clear();
            buf.extend((i - half..=i + half).map(at));
            series[i as usize] - median(&mut buf)
        })
        .collect();
    let mad = |v: &[f64]| {
        let mut t = v.to_vec();
        let m = median(&mut t);
        let mut d: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
        1.4826 * median(&mut d)
    };
    let scale = mad(&resid).max(0.01 * mad(series)).max(f64::MIN_POSITIVE);
    let flags: Vec<bool> = resid.iter().map(|r| r.abs() > z_threshold * scale).collect();
    Ok((interpolate_flagged(series, &flags), flags))
}

/// Linear interpolation across flagged samples; flagged runs at the ends
/// take the nearest kept value. All-flagged input is returned unchanged.
pub fn interpolate_flagged(series: &[f64], flags: &[bool]) -> Vec<f64> {
    let kept: Vec<usize> = (0..series.len()).filter(|&i| !flags[i]).collect();
    if kept.is_empty() {
        return series.to_vec();
    }
    let mut out = series.to_vec();
    let mut next = 0;
    for i in 0..series.len() {
        if !flags[i] {
            continue;
        }
        while next < kept.len() && kept[next] < i {
            next += 1;
        }
        out[i] = match (next.checked_sub(1).map(|p| kept[p]), kept.get(next)) {
            (Some(a), Some(&b)) => {
                let w = (i - a) as f64 / (b - a) as f64;
                series[a] + w * (series[b] - series[a])
            }
            (Some(a), None) => series[a],
            (None, Some(&b)) => series[b],
            (None, None) => unreachable!(),
        };
    }
    out
}
