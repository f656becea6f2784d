//! Dead-reckoning replay of a dataset with predicted or true velocities.

use std::path::Path;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::dataset::{parse_table, render_table, Dataset};
use super::io::write_atomic;
use crate::config::PreprocessConfig;
use crate::dynamics::{OceanCurrent, RunLog};
use crate::error::{Error, Result};
use crate::frames::{rot_body_to_ned, EulerAngles, NedPosition};
use crate::net::{prepare_inputs, RnnModel, VelocityAxis};
use crate::sensors::SensorRecord;

pub const TRAJECTORY_MAGIC: &str = "# glidernav-trajectory v1";

pub const TRAJECTORY_COLUMNS: [&str; 13] = [
    "time_s",
    "est_n_m",
    "est_e_m",
    "est_d_m",
    "truth_n_m",
    "truth_e_m",
    "truth_d_m",
    "u_r_m_s",
    "v_r_m_s",
    "w_r_m_s",
    "label_u_r_m_s",
    "label_v_r_m_s",
    "label_valid",
];

/// Where the body heave velocity comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaveSource {
    /// The recorded heave channel, `cθ cφ ż`.
    Projected,
    /// Heave that makes the NED down-rate equal the depth rate given the
    /// surge and sway in use: `w = (ż + sθ u − cθ sφ v) / (cθ cφ)`.
    Kinematic,
}

impl FromStr for HeaveSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projected" => Ok(Self::Projected),
            "kinematic" => Ok(Self::Kinematic),
            _ => Err(Error::Config(format!("unknown heave source {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOptions {
    /// Integration step; a whole multiple of the sample interval. `None`
    /// uses the sample interval.
    pub dt: Option<f64>,
    pub heave: HeaveSource,
    pub integrator: Integrator,
    /// Window length used for prediction (the training window).
    pub window: usize,
    pub preprocess: PreprocessConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub est: NedPosition,
    pub truth: NedPosition,
    /// Body velocity used for the step, `[u, v, w]`.
    pub vel: [f64; 3],
    pub label: [f64; 2],
    pub label_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        render_table(
            TRAJECTORY_MAGIC,
            &TRAJECTORY_COLUMNS,
            self.rows.iter().map(|r| {
                vec![
                    r.t,
                    r.est.north,
                    r.est.east,
                    r.est.down,
                    r.truth.north,
                    r.truth.east,
                    r.truth.down,
                    r.vel[0],
                    r.vel[1],
                    r.vel[2],
                    r.label[0],
                    r.label[1],
                    if r.label_valid { 1.0 } else { 0.0 },
                ]
            }),
        )
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_csv_bytes()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let rows = parse_table(text, TRAJECTORY_MAGIC, &TRAJECTORY_COLUMNS, path)?;
        Ok(Self {
            rows: rows
                .iter()
                .map(|v| TrajectoryRow {
                    t: v[0],
                    est: NedPosition::new(v[1], v[2], v[3]),
                    truth: NedPosition::new(v[4], v[5], v[6]),
                    vel: [v[7], v[8], v[9]],
                    label: [v[10], v[11]],
                    label_valid: v[12] != 0.0,
                })
                .collect(),
        })
    }
}

/// Position update rule between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// `χ_k = χ_{k-1} + v_k Δt`, the sample at the end of the step.
    #[default]
    Euler,
    /// Average of the two end samples.
    Trapezoid,
}

impl FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Self::Euler),
            "trapezoid" => Ok(Self::Trapezoid),
            _ => Err(Error::Config(format!("unknown integrator {s:?}"))),
        }
    }
}

/// Integrates NED velocities sampled every `dt`, from `start`.
pub fn integrate_ned(start: NedPosition, ned_vel: &[Vector3<f64>], dt: f64, rule: Integrator) -> Vec<NedPosition> {
    let mut out = Vec::with_capacity(ned_vel.len());
    let mut p = start.as_vector();
    for (k, v) in ned_vel.iter().enumerate() {
        if k > 0 {
            let inc = match rule {
                Integrator::Euler => v * dt,
                Integrator::Trapezoid => (ned_vel[k - 1] + v) * (0.5 * dt),
            };
            for i in 0..3 {
                // zero increments keep the position bit-identical
                if inc[i] != 0.0 {
                    p[i] += inc[i];
                }
            }
        }
        out.push(NedPosition::new(p.x, p.y, p.z));
    }
    out
}

fn step_stride(interval: f64, dt: Option<f64>) -> Result<usize> {
    let Some(dt) = dt else { return Ok(1) };
    let k = (dt / interval).round();
    if !(dt > 0.0) || k < 1.0 || (k * interval - dt).abs() > 1e-9 * dt.max(1.0) {
        return Err(Error::Config(format!("replay step {dt} s must be a whole multiple of the sample interval {interval} s")));
    }
    Ok(k as usize)
}

/// Body heave for each record.
pub fn heave_series(records: &[SensorRecord], uv: &[[f64; 2]], source: HeaveSource, interval: f64) -> Vec<f64> {
    match source {
        HeaveSource::Projected => records.iter().map(|r| r.depth_rate_heave).collect(),
        HeaveSource::Kinematic => (0..records.len())
            .map(|k| {
                let z_dot = if records.len() < 2 {
                    0.0
                } else if k == 0 {
                    (records[1].depth - records[0].depth) / interval
                } else {
                    (records[k].depth - records[k - 1].depth) / interval
                };
                let e = &records[k].euler;
                let (sp, cp) = e.phi.sin_cos();
                let (st, ct) = e.theta.sin_cos();
                (z_dot + st * uv[k][0] - ct * sp * uv[k][1]) / (ct * cp)
            })
            .collect(),
    }
}

/// Dead reckoning over `records` with the given body surge/sway, measured
/// attitude, and heave from `heave`.
pub fn dead_reckon(records: &[SensorRecord], uv: &[[f64; 2]], opts: &ReplayOptions, interval: f64) -> Result<Trajectory> {
    if uv.len() != records.len() {
        return Err(Error::LengthMismatch {
            expected: records.len(),
            actual: uv.len(),
        });
    }
    if records.is_empty() {
        return Ok(Trajectory::default());
    }
    let stride = step_stride(interval, opts.dt)?;
    let w = heave_series(records, uv, opts.heave, interval);
    let idx: Vec<usize> = (0..records.len()).step_by(stride).collect();
    let ned = idx
        .iter()
        .map(|&k| Ok(rot_body_to_ned(&records[k].euler)? * Vector3::new(uv[k][0], uv[k][1], w[k])))
        .collect::<Result<Vec<_>>>()?;
    let est = integrate_ned(records[0].truth_pos, &ned, interval * stride as f64, opts.integrator);
    Ok(Trajectory {
        rows: idx
            .iter()
            .zip(est)
            .map(|(&k, est)| TrajectoryRow {
                t: records[k].t,
                est,
                truth: records[k].truth_pos,
                vel: [uv[k][0], uv[k][1], w[k]],
                label: [records[k].label_u_r, records[k].label_v_r],
                label_valid: records[k].label_valid,
            })
            .collect(),
    })
}

/// Surge and sway predicted by the two networks over the whole dataset.
pub fn predict_velocities(ds: &Dataset, surge: &RnnModel, sway: &RnnModel, opts: &ReplayOptions) -> Result<Vec<[f64; 2]>> {
    if surge.axis != VelocityAxis::Surge || sway.axis != VelocityAxis::Sway {
        return Err(Error::SchemaMismatch("expected a surge model and a sway model".into()));
    }
    let rate = ds.meta.run.sample_rate_hz;
    let predict = |m: &RnnModel| -> Result<Vec<f64>> {
        let x = prepare_inputs(&ds.records, &m.channel_index, &opts.preprocess, rate)?;
        m.predict_series(&x, opts.window)
    };
    let u = predict(surge)?;
    let v = predict(sway)?;
    Ok(u.into_iter().zip(v).map(|(a, b)| [a, b]).collect())
}

/// Replay with network predictions, measured attitude and pressure.
pub fn prediction_replay(ds: &Dataset, surge: &RnnModel, sway: &RnnModel, opts: &ReplayOptions) -> Result<Trajectory> {
    let uv = predict_velocities(ds, surge, sway, opts)?;
    dead_reckon(&ds.records, &uv, opts, ds.interval_s())
}

/// Replay fed with the simulator's true attitude and body velocity. With
/// `over_ground` the body-frame current is added, so only integration
/// error remains; without it the result drifts with the current exactly as
/// relative-velocity dead reckoning does.
pub fn truth_replay(log: &RunLog, over_ground: bool, rule: Integrator) -> Result<Trajectory> {
    if log.truth.is_empty() {
        return Ok(Trajectory::default());
    }
    let dt = 1.0 / log.meta.sample_rate_hz;
    let mut vel = Vec::with_capacity(log.truth.len());
    let mut ned = Vec::with_capacity(log.truth.len());
    for (s, rec) in log.truth.iter().zip(&log.records) {
        let att: EulerAngles = s.state.attitude();
        let mut v = Vector3::new(s.state.nu_r[0], s.state.nu_r[1], s.state.nu_r[2]);
        if over_ground {
            v += OceanCurrent::from_components(rec.current[0], rec.current[1]).body_at(&att);
        }
        vel.push(v);
        ned.push(rot_body_to_ned(&att)? * v);
    }
    let est = integrate_ned(log.truth[0].state.position(), &ned, dt, rule);
    Ok(Trajectory {
        rows: log
            .truth
            .iter()
            .zip(&log.records)
            .zip(est)
            .zip(vel)
            .map(|(((s, rec), est), v)| TrajectoryRow {
                t: s.t,
                est,
                truth: s.state.position(),
                vel: [v.x, v.y, v.z],
                label: [rec.label_u_r, rec.label_v_r],
                label_valid: rec.label_valid,
            })
            .collect(),
    })
}
