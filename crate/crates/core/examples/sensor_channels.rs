//! Sensor models: pressure depth and heave, DVL labels with bottom lock,
//! and the label preconditioning chain.
//!
//! cargo run --release --example sensor_channels

use glidernav::dynamics::{scenario_generate, OceanCurrent, ScenarioKind, ScenarioSpec};
use glidernav::frames::EulerAngles;
use glidernav::sensors::{depth_and_heave, gaussian_smooth, pressure_from_depth, remove_outliers};
use glidernav::Config;

fn main() -> glidernav::Result<()> {
    let cfg = Config::default();
    let (rho, g) = (cfg.environment.water_density, cfg.environment.gravity);
    let att = EulerAngles::new(0.0, -0.44, 0.5);
    let (z, w) = depth_and_heave(pressure_from_depth(40.5, rho, g), rho, g, &att, Some(40.0), 0.5);
    println!("depth {z:.3} m, projected heave {w:.4} m/s");

    let log = scenario_generate(
        &ScenarioSpec {
            kind: ScenarioKind::WingsLevelSawtooth,
            duration_s: 1_800.0,
            current: OceanCurrent::from_components(-0.05, -0.002),
            seed: 3,
            noise: true,
        },
        &cfg,
    )?;
    let valid = log.records.iter().filter(|r| r.label_valid).count();
    println!("{} of {} samples have DVL bottom lock", valid, log.records.len());

    let raw: Vec<f64> = log.records.iter().map(|r| r.label_u_r).collect();
    let (clean, flagged) = remove_outliers(&raw, cfg.preprocess.outlier_z, cfg.preprocess.outlier_window)?;
    let smooth = gaussian_smooth(&clean, cfg.preprocess.label_smooth_sigma)?;
    let truth: Vec<f64> = log.truth.iter().map(|s| s.state.nu_r[0]).collect();
    let rms = |x: &[f64]| {
        let s: f64 = x.iter().zip(&truth).zip(&log.records).filter(|(_, r)| r.label_valid).map(|((a, b), _)| (a - b).powi(2)).sum();
        (s / valid.max(1) as f64).sqrt()
    };
    println!(
        "surge label rms error vs truth: raw {:.4} m/s, smoothed {:.4} m/s ({} outliers replaced)",
        rms(&raw),
        rms(&smooth),
        flagged.iter().filter(|f| **f).count()
    );
    Ok(())
}
