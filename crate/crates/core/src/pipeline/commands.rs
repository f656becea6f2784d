//! The five pipeline commands. The binary is a thin argument parser over
//! these; the examples call them directly.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::dataset::{read_dataset, render_table, write_dataset, Dataset};
use super::evaluate::{evaluate, EvalReport, REPORT_MAGIC};
use super::io::write_atomic;
use super::plot::{error_svg, track3d_svg, track_svg};
use super::replay::{prediction_replay, HeaveSource, Integrator, ReplayOptions, Trajectory, TRAJECTORY_MAGIC};
use crate::config::Config;
use crate::dynamics::{scenario_generate, OceanCurrent, ScenarioKind, ScenarioSpec};
use crate::error::{Error, Result};
use crate::net::{channel_selection, prepare_series, scg_train, windows, EpochRecord, RnnModel, TrainConfig, TrainOutcome, VelocityAxis, Window};

pub const HISTORY_MAGIC: &str = "# glidernav-history v1";
pub const HISTORY_COLUMNS: [&str; 5] = ["epoch", "train_mse", "val_mse", "accepted", "lambda"];

/// A current preset name from the config, or explicit `north,east`
/// components in m/s.
pub fn parse_current(arg: &str, cfg: &Config) -> Result<OceanCurrent> {
    let c = &cfg.currents;
    let comps = match arg {
        "none" => [0.0, 0.0],
        "low" => c.low,
        "medium" => c.medium,
        "strong" => c.strong,
        other => {
            let parts: Vec<&str> = other.split(',').collect();
            let parsed: Vec<f64> = parts.iter().filter_map(|p| p.trim().parse().ok()).collect();
            if parts.len() != 2 || parsed.len() != 2 || parsed.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("current {other:?} is neither a preset (none|low|medium|strong) nor u,v")));
            }
            [parsed[0], parsed[1]]
        }
    };
    Ok(OceanCurrent::from_components(comps[0], comps[1]))
}

/// Runs a scenario and writes the dataset CSV and its sidecar.
pub fn cmd_simulate(
    cfg: &Config,
    kind: ScenarioKind,
    duration_s: f64,
    current: OceanCurrent,
    seed: u64,
    noise: bool,
    out: &Path,
) -> Result<Dataset> {
    let log = scenario_generate(
        &ScenarioSpec {
            kind,
            duration_s,
            current,
            seed,
            noise,
        },
        cfg,
    )?;
    let ds = Dataset::from_run(&log);
    write_dataset(out, &ds)?;
    log::info!("wrote {} rows to {}", ds.records.len(), out.display());
    Ok(ds)
}

/// Training windows of one dataset for `axis`.
pub fn dataset_windows(ds: &Dataset, axis: VelocityAxis, cfg: &Config) -> Result<Vec<Window>> {
    let channels = channel_selection(axis, &cfg.train.sway_channels)?;
    let series = prepare_series(&ds.records, axis, &channels, &cfg.preprocess, ds.meta.run.sample_rate_hz)?;
    Ok(windows(&series, cfg.train.window_len))
}

pub fn history_csv_bytes(history: &[EpochRecord]) -> Result<Vec<u8>> {
    render_table(
        HISTORY_MAGIC,
        &HISTORY_COLUMNS,
        history
            .iter()
            .map(|h| vec![h.epoch as f64, h.train_mse, h.val_mse, if h.accepted { 1.0 } else { 0.0 }, h.lambda]),
    )
}

pub fn history_path(model_path: &Path) -> PathBuf {
    let mut s = model_path.as_os_str().to_owned();
    s.push(".history.csv");
    PathBuf::from(s)
}

/// Trains one axis on the concatenated datasets; writes the model and its
/// per-epoch history next to it.
pub fn cmd_train(cfg: &Config, datasets: &[PathBuf], axis: VelocityAxis, seed: u64, out: &Path) -> Result<TrainOutcome> {
    if datasets.is_empty() {
        return Err(Error::Config("no training datasets given".into()));
    }
    let mut all = Vec::new();
    let mut rate = None;
    for p in datasets {
        let ds = read_dataset(p)?;
        let r = ds.meta.run.sample_rate_hz;
        if rate.is_some_and(|q: f64| q != r) {
            return Err(Error::SchemaMismatch(format!("{}: sample rate differs from the other datasets", p.display())));
        }
        rate = Some(r);
        all.extend(dataset_windows(&ds, axis, cfg)?);
    }
    let channels = channel_selection(axis, &cfg.train.sway_channels)?;
    let tc = TrainConfig::from_section(&cfg.train, seed);
    log::info!("training {} on {} windows", axis.as_str(), all.len());
    let mut outcome = scg_train(&all, axis, &channels, &tc, |e| {
        if e.epoch % 25 == 0 {
            log::info!("{} epoch {}: train {:.3e} val {:.3e}", axis.as_str(), e.epoch, e.train_mse, e.val_mse);
        }
    })?;
    outcome.model.config_fingerprint = cfg.fingerprint();
    outcome.model.save(out)?;
    write_atomic(&history_path(out), &history_csv_bytes(&outcome.history)?)?;
    log::info!(
        "{}: best epoch {}, stop {:?}, test mse {:.3e}",
        axis.as_str(),
        outcome.best_epoch,
        outcome.stop,
        outcome.test_mse
    );
    Ok(outcome)
}

pub fn replay_options(cfg: &Config, dt: Option<f64>, heave: HeaveSource, integrator: Integrator) -> ReplayOptions {
    ReplayOptions {
        dt,
        heave,
        integrator,
        window: cfg.train.window_len,
        preprocess: cfg.preprocess.clone(),
    }
}

/// Dead-reckons a dataset with the two models and writes the trajectory.
pub fn cmd_replay(
    cfg: &Config,
    dataset: &Path,
    surge: &Path,
    sway: &Path,
    opts: &ReplayOptions,
    out: &Path,
) -> Result<Trajectory> {
    let ds = read_dataset(dataset)?;
    let (ms, mw) = (RnnModel::load(surge)?, RnnModel::load(sway)?);
    let fp = cfg.fingerprint();
    for m in [&ms, &mw] {
        if !m.config_fingerprint.is_empty() && m.config_fingerprint != fp {
            log::warn!("{} model was trained under a different configuration", m.axis.as_str());
        }
    }
    let traj = prediction_replay(&ds, &ms, &mw, opts)?;
    traj.write(out)?;
    Ok(traj)
}

/// Positioning-error report of a trajectory. With `truth` the reference
/// positions come from that dataset instead of the trajectory's own truth
/// columns.
pub fn cmd_evaluate(trajectory: &Path, truth: Option<&Path>, label: &str, out: &Path) -> Result<EvalReport> {
    let traj = Trajectory::read(trajectory)?;
    let truth_pos = match truth {
        Some(p) => {
            let ds = read_dataset(p)?;
            Some(ds.records.iter().map(|r| r.truth_pos).collect::<Vec<_>>())
        }
        None => None,
    };
    let rep = evaluate(label, &traj, truth_pos.as_deref())?;
    rep.write(out)?;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotOutput {
    pub files: Vec<PathBuf>,
}

fn first_line(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().next().unwrap_or("").trim_end().to_string())
}

/// Renders trajectories (track views) and reports (one combined error
/// plot) into the directory `out`.
pub fn cmd_plot(inputs: &[PathBuf], out: &Path) -> Result<PlotOutput> {
    if inputs.is_empty() {
        return Err(Error::Config("no inputs to plot".into()));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut files = Vec::new();
    let mut reports = Vec::new();
    for p in inputs {
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into());
        match first_line(p)?.as_str() {
            TRAJECTORY_MAGIC => {
                let traj = Trajectory::read(p)?;
                for (suffix, svg) in [
                    ("track", track_svg(&traj, &format!("{stem}: north/east track"))?),
                    ("track3d", track3d_svg(&traj, &format!("{stem}: 3D track"))?),
                ] {
                    let f = out.join(format!("{stem}_{suffix}.svg"));
                    write_atomic(&f, svg.as_bytes())?;
                    files.push(f);
                }
            }
            REPORT_MAGIC => reports.push(EvalReport::read(p)?),
            other => {
                return Err(Error::SchemaMismatch(format!(
                    "{}: not a trajectory or report (first line {other:?})",
                    p.display()
                )))
            }
        }
    }
    if !reports.is_empty() {
        let f = out.join("errors.svg");
        write_atomic(&f, error_svg(&reports, "Positioning error")?.as_bytes())?;
        files.push(f);
    }
    Ok(PlotOutput { files })
}
