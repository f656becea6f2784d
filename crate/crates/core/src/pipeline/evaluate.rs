//! Positioning-error reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::{parse_table, render_table};
use super::io::write_atomic;
use super::replay::Trajectory;
use crate::error::{Error, Result};
use crate::frames::{positioning_error, NedPosition, PositionError};

pub const REPORT_MAGIC: &str = "# glidernav-report v1";
pub const REPORT_COLUMNS: [&str; 4] = ["time_s", "n_error_m", "e_error_m", "horizontal_error_m"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub steps: usize,
    pub final_n_error_m: f64,
    pub final_e_error_m: f64,
    pub final_horizontal_error_m: f64,
    pub rms_n_error_m: f64,
    pub rms_e_error_m: f64,
    pub max_horizontal_error_m: f64,
    /// Horizontal path length of the truth track.
    pub distance_traveled_m: f64,
    /// Surge/sway mean squared error (m²/s²) of the velocities used against
    /// the DVL labels, over labelled steps.
    pub velocity_mse: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label: String,
    pub summary: ReportSummary,
    #[serde(skip)]
    pub t: Vec<f64>,
    #[serde(skip)]
    pub errors: Vec<PositionError>,
}

impl EvalReport {
    pub fn summary_path(csv_path: &Path) -> PathBuf {
        let mut s = csv_path.as_os_str().to_owned();
        s.push(".summary.json");
        PathBuf::from(s)
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        render_table(
            REPORT_MAGIC,
            &REPORT_COLUMNS,
            self.t
                .iter()
                .zip(&self.errors)
                .map(|(t, e)| vec![*t, e.n_error, e.e_error, e.horizontal()]),
        )
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes the per-step CSV at `path` and the summary next to it.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_csv_bytes()?)?;
        write_atomic(&Self::summary_path(path), self.summary_json()?.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let rows = parse_table(&text, REPORT_MAGIC, &REPORT_COLUMNS, path)?;
        let sp = Self::summary_path(path);
        let stext = std::fs::read_to_string(&sp).map_err(|e| Error::io(&sp, e))?;
        let mut rep: EvalReport =
            serde_json::from_str(&stext).map_err(|e| Error::SchemaMismatch(format!("{}: {e}", sp.display())))?;
        rep.t = rows.iter().map(|r| r[0]).collect();
        rep.errors = rows
            .iter()
            .map(|r| PositionError {
                n_error: r[1],
                e_error: r[2],
            })
            .collect();
        Ok(rep)
    }
}

fn rms(x: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = x.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Per-step errors of `est` against `truth` plus summary statistics.
pub fn evaluate(label: &str, traj: &Trajectory, truth: Option<&[NedPosition]>) -> Result<EvalReport> {
    if let Some(tr) = truth {
        if tr.len() != traj.rows.len() {
            return Err(Error::LengthMismatch {
                expected: traj.rows.len(),
                actual: tr.len(),
            });
        }
    }
    let truth_at = |k: usize| truth.map(|t| t[k]).unwrap_or(traj.rows[k].truth);
    let errors: Vec<PositionError> = (0..traj.rows.len())
        .map(|k| positioning_error(&traj.rows[k].est, &truth_at(k)))
        .collect();
    if errors.iter().any(|e| !(e.n_error.is_finite() && e.e_error.is_finite())) {
        return Err(Error::Divergence("non-finite positioning error".into()));
    }
    let distance = (1..traj.rows.len())
        .map(|k| truth_at(k).horizontal_distance(&truth_at(k - 1)))
        .sum();
    let labelled: Vec<_> = traj.rows.iter().filter(|r| r.label_valid).collect();
    let mse = |i: usize| {
        if labelled.is_empty() {
            0.0
        } else {
            labelled.iter().map(|r| (r.vel[i] - r.label[i]).powi(2)).sum::<f64>() / labelled.len() as f64
        }
    };
    let last = errors.last().copied().unwrap_or(PositionError {
        n_error: 0.0,
        e_error: 0.0,
    });
    Ok(EvalReport {
        label: label.to_string(),
        summary: ReportSummary {
            steps: errors.len(),
            final_n_error_m: last.n_error,
            final_e_error_m: last.e_error,
            final_horizontal_error_m: last.horizontal(),
            rms_n_error_m: rms(errors.iter().map(|e| e.n_error)),
            rms_e_error_m: rms(errors.iter().map(|e| e.e_error)),
            max_horizontal_error_m: errors.iter().map(PositionError::horizontal).fold(0.0, f64::max),
            distance_traveled_m: distance,
            velocity_mse: [mse(0), mse(1)],
        },
        t: traj.rows.iter().map(|r| r.t).collect(),
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::replay::TrajectoryRow;

    fn traj(offset: f64) -> Trajectory {
        Trajectory {
            rows: (0..5)
                .map(|k| {
                    let truth = NedPosition::new(k as f64 * 3.0, k as f64 * 4.0, 1.0);
                    TrajectoryRow {
                        t: k as f64,
                        est: NedPosition::new(truth.north + offset * k as f64, truth.east - offset, 1.0),
                        truth,
                        vel: [1.0, 0.0, 0.0],
                        label: [1.0, 0.5],
                        label_valid: k != 2,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn identical_tracks_give_zero_error() {
        let r = evaluate("x", &traj(0.0), None).unwrap();
        assert!(r.errors.iter().all(|e| e.n_error == 0.0 && e.e_error == 0.0));
        assert_eq!(r.summary.steps, 5);
        assert_eq!(r.summary.distance_traveled_m, 20.0);
        assert_eq!(r.summary.velocity_mse, [0.0, 0.25]);
    }

    #[test]
    fn errors_and_length_check() {
        let r = evaluate("x", &traj(2.0), None).unwrap();
        assert_eq!(r.summary.final_n_error_m, 8.0);
        assert_eq!(r.summary.final_e_error_m, 2.0);
        assert_eq!(r.t.len(), 5);
        let short = vec![NedPosition::new(0.0, 0.0, 0.0); 3];
        assert!(matches!(evaluate("x", &traj(0.0), Some(&short)), Err(Error::LengthMismatch { .. })));
    }
}
