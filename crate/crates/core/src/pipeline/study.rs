//! The full glider study: one long training run, surge and sway networks,
//! then replay of a fixed test layout under each current preset.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::commands::{cmd_evaluate, cmd_plot, cmd_replay, cmd_simulate, cmd_train, parse_current, replay_options};
use super::evaluate::{evaluate, EvalReport, ReportSummary};
use super::io::write_atomic;
use super::replay::{truth_replay, HeaveSource, Integrator, Trajectory};
use crate::config::Config;
use crate::dynamics::{scenario_generate, ScenarioKind, ScenarioSpec};
use crate::error::{Error, Result};
use crate::net::{StopReason, VelocityAxis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    pub train_duration_s: f64,
    pub test_duration_s: f64,
    pub train_current: String,
    /// Presets replayed on the test layout, weakest first.
    pub presets: Vec<String>,
    pub seed: u64,
    pub heave: HeaveSource,
    pub integrator: Integrator,
    /// Emit SVG plots.
    pub plots: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            train_duration_s: 36_000.0,
            test_duration_s: 9_720.0,
            train_current: "low".into(),
            presets: vec!["low".into(), "medium".into(), "strong".into()],
            seed: 7,
            heave: HeaveSource::Kinematic,
            integrator: Integrator::Euler,
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisResult {
    pub axis: VelocityAxis,
    pub epochs: usize,
    pub best_epoch: usize,
    pub stop: StopReason,
    pub train_mse: f64,
    pub val_mse: f64,
    pub test_mse: f64,
    /// Whether the recorded training error never rose.
    pub history_non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetResult {
    pub preset: String,
    pub current: [f64; 2],
    pub prediction: ReportSummary,
    /// Truth-velocity replay of the same run (the integration floor).
    pub floor: ReportSummary,
    /// Steps where the prediction error fell below the floor.
    pub below_floor_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub options: StudyOptions,
    pub train_rows: usize,
    pub test_rows: usize,
    pub axes: Vec<AxisResult>,
    pub presets: Vec<PresetResult>,
    /// Truth-velocity replay of a noise-free test run.
    pub noise_free_floor: ReportSummary,
    pub config_fingerprint: String,
}

impl StudySummary {
    pub fn preset(&self, name: &str) -> Option<&PresetResult> {
        self.presets.iter().find(|p| p.preset == name)
    }

    pub fn axis(&self, axis: VelocityAxis) -> Option<&AxisResult> {
        self.axes.iter().find(|a| a.axis == axis)
    }
}

/// Files written by [`run_study`], relative to its output directory.
pub struct StudyLayout {
    pub root: PathBuf,
}

impl StudyLayout {
    pub fn train_dataset(&self) -> PathBuf {
        self.root.join("train.csv")
    }
    pub fn model(&self, axis: VelocityAxis) -> PathBuf {
        self.root.join(format!("{}.model.json", axis.as_str()))
    }
    pub fn test_dataset(&self, preset: &str) -> PathBuf {
        self.root.join(format!("test_{preset}.csv"))
    }
    pub fn trajectory(&self, preset: &str) -> PathBuf {
        self.root.join(format!("replay_{preset}.csv"))
    }
    pub fn report(&self, preset: &str) -> PathBuf {
        self.root.join(format!("report_{preset}.csv"))
    }
    pub fn floor_trajectory(&self) -> PathBuf {
        self.root.join("floor_noise_free.csv")
    }
    pub fn summary(&self) -> PathBuf {
        self.root.join("study.json")
    }
    pub fn plots(&self) -> PathBuf {
        self.root.join("plots")
    }
}

fn non_increasing(xs: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = xs.collect();
    v.windows(2).all(|w| w[1] <= w[0])
}

fn spec(kind: ScenarioKind, duration_s: f64, preset: &str, seed: u64, noise: bool, cfg: &Config) -> Result<ScenarioSpec> {
    Ok(ScenarioSpec {
        kind,
        duration_s,
        current: parse_current(preset, cfg)?,
        seed,
        noise,
    })
}

/// Runs every stage and writes all artifacts under `out`.
pub fn run_study(cfg: &Config, opts: &StudyOptions, out: &Path) -> Result<StudySummary> {
    if opts.presets.is_empty() {
        return Err(Error::Config("study needs at least one current preset".into()));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let lay = StudyLayout { root: out.to_path_buf() };
    let seed = opts.seed;

    log::info!("simulating {} s of training data", opts.train_duration_s);
    let train = cmd_simulate(
        cfg,
        ScenarioKind::Mixed,
        opts.train_duration_s,
        parse_current(&opts.train_current, cfg)?,
        seed,
        true,
        &lay.train_dataset(),
    )?;

    // test runs share one seed so only the current differs
    let test_seed = seed.wrapping_add(1);
    let tests = std::thread::scope(|s| {
        let handles: Vec<_> = opts
            .presets
            .iter()
            .map(|p| {
                let lay = &lay;
                s.spawn(move || -> Result<usize> {
                    let ds = cmd_simulate(
                        cfg,
                        ScenarioKind::MixedTest,
                        opts.test_duration_s,
                        parse_current(p, cfg)?,
                        test_seed,
                        true,
                        &lay.test_dataset(p),
                    )?;
                    Ok(ds.records.len())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect::<Result<Vec<_>>>()
    })?;

    let axes = std::thread::scope(|s| {
        let handles: Vec<_> = [VelocityAxis::Surge, VelocityAxis::Sway]
            .into_iter()
            .map(|axis| {
                let lay = &lay;
                s.spawn(move || -> Result<AxisResult> {
                    let o = cmd_train(cfg, &[lay.train_dataset()], axis, seed, &lay.model(axis))?;
                    Ok(AxisResult {
                        axis,
                        epochs: o.history.len(),
                        best_epoch: o.best_epoch,
                        stop: o.stop,
                        train_mse: o.train_mse,
                        val_mse: o.val_mse,
                        test_mse: o.test_mse,
                        history_non_increasing: non_increasing(o.history.iter().map(|h| h.train_mse)),
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect::<Result<Vec<_>>>()
    })?;

    let ropts = replay_options(cfg, None, opts.heave, opts.integrator);
    let presets = std::thread::scope(|s| {
        let handles: Vec<_> = opts
            .presets
            .iter()
            .map(|p| {
                let (lay, ropts) = (&lay, &ropts);
                s.spawn(move || -> Result<PresetResult> {
                    let traj = cmd_replay(
                        cfg,
                        &lay.test_dataset(p),
                        &lay.model(VelocityAxis::Surge),
                        &lay.model(VelocityAxis::Sway),
                        ropts,
                        &lay.trajectory(p),
                    )?;
                    let rep = cmd_evaluate(&lay.trajectory(p), None, p, &lay.report(p))?;
                    // the truth floor needs the in-memory truth, so rerun the
                    // deterministic simulation
                    let log = scenario_generate(&spec(ScenarioKind::MixedTest, opts.test_duration_s, p, test_seed, true, cfg)?, cfg)?;
                    let floor_traj = truth_replay(&log, true, opts.integrator)?;
                    let floor = evaluate(&format!("{p} truth velocity"), &floor_traj, None)?;
                    let below = below_floor(&traj, &rep, &floor)?;
                    Ok(PresetResult {
                        preset: p.clone(),
                        current: log.meta.current,
                        prediction: rep.summary,
                        floor: floor.summary,
                        below_floor_steps: below,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("replay thread panicked")).collect::<Result<Vec<_>>>()
    })?;

    let clean = scenario_generate(
        &spec(ScenarioKind::MixedTest, opts.test_duration_s, &opts.presets[0], test_seed, false, cfg)?,
        cfg,
    )?;
    let floor_traj = truth_replay(&clean, true, opts.integrator)?;
    floor_traj.write(&lay.floor_trajectory())?;
    let noise_free_floor = evaluate("noise-free truth velocity", &floor_traj, None)?.summary;

    if opts.plots {
        let mut inputs: Vec<PathBuf> = opts.presets.iter().map(|p| lay.trajectory(p)).collect();
        inputs.extend(opts.presets.iter().map(|p| lay.report(p)));
        cmd_plot(&inputs, &lay.plots())?;
    }

    let summary = StudySummary {
        options: opts.clone(),
        train_rows: train.records.len(),
        test_rows: tests[0],
        axes,
        presets,
        noise_free_floor,
        config_fingerprint: cfg.fingerprint(),
    };
    write_atomic(&lay.summary(), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}

fn below_floor(traj: &Trajectory, rep: &EvalReport, floor: &EvalReport) -> Result<usize> {
    if floor.errors.len() != rep.errors.len() || traj.rows.len() != rep.errors.len() {
        return Err(Error::LengthMismatch {
            expected: rep.errors.len(),
            actual: floor.errors.len(),
        });
    }
    Ok(rep
        .errors
        .iter()
        .zip(&floor.errors)
        .filter(|(p, f)| p.horizontal() < f.horizontal())
        .count())
}
