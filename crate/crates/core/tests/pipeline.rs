use std::path::{Path, PathBuf};
use std::process::Command;

use glidernav::dynamics::{scenario_generate, OceanCurrent, ScenarioKind, ScenarioSpec};
use glidernav::frames::NedPosition;
use glidernav::net::{init_params, Architecture, Normalization, RnnModel, VelocityAxis, N_INPUTS};
use glidernav::pipeline::commands::{cmd_evaluate, cmd_plot, cmd_replay, cmd_simulate, parse_current, replay_options};
use glidernav::pipeline::dataset::{read_dataset, write_dataset, Dataset};
use glidernav::pipeline::evaluate::evaluate;
use glidernav::pipeline::replay::{truth_replay, HeaveSource, Integrator, Trajectory};
use glidernav::{Config, Error};

fn cfg() -> Config {
    Config::default()
}

fn zero_model(axis: VelocityAxis) -> RnnModel {
    let arch = Architecture {
        n_in: N_INPUTS,
        hidden: 3,
        layers: 1,
        taps: 5,
    };
    RnnModel::new(axis, arch, (0..N_INPUTS).collect(), vec![0.0; arch.n_params()], Normalization::identity(N_INPUTS)).unwrap()
}

fn random_model(axis: VelocityAxis, seed: u64) -> RnnModel {
    let arch = Architecture {
        n_in: N_INPUTS,
        hidden: 4,
        layers: 2,
        taps: 5,
    };
    let mut norm = Normalization::identity(N_INPUTS);
    norm.out_mean = 0.8;
    norm.out_std = 0.1;
    RnnModel::new(axis, arch, (0..N_INPUTS).collect(), init_params(&arch, seed), norm).unwrap()
}

#[test]
fn ten_hour_simulation_has_expected_rows_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("train.csv");
    let c = cfg();
    let ds = cmd_simulate(&c, ScenarioKind::Mixed, 36_000.0, parse_current("low", &c).unwrap(), 1, true, &out).unwrap();
    assert_eq!(ds.records.len(), 72_000);
    let back = read_dataset(&out).unwrap();
    assert_eq!(back.records.len(), 72_000);
    let [n, e] = back.meta.run.current;
    assert!((n + 0.05).abs() < 1e-15 && (e + 0.002).abs() < 1e-15, "{n} {e}");
    assert_eq!(back.meta.run.scenario, ScenarioKind::Mixed);
}

#[test]
fn simulation_bytes_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg();
    let cur = parse_current("-0.1,0.05", &c).unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        cmd_simulate(&c, ScenarioKind::MixedTest, 900.0, cur, 4, true, &p).unwrap();
        (std::fs::read(&p).unwrap(), std::fs::read(glidernav::pipeline::dataset::meta_path(&p)).unwrap())
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn dataset_round_trip_is_value_identical() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg();
    let log = scenario_generate(
        &ScenarioSpec {
            kind: ScenarioKind::Spiral,
            duration_s: 300.0,
            current: OceanCurrent::from_components(-0.05, -0.002),
            seed: 2,
            noise: true,
        },
        &c,
    )
    .unwrap();
    let ds = Dataset::from_run(&log);
    let p = dir.path().join("d.csv");
    write_dataset(&p, &ds).unwrap();
    assert_eq!(read_dataset(&p).unwrap(), ds);
}

#[test]
fn zero_velocity_model_holds_position_at_constant_depth() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg();
    let log = scenario_generate(
        &ScenarioSpec {
            kind: ScenarioKind::MixedTest,
            duration_s: 600.0,
            current: OceanCurrent::none(),
            seed: 2,
            noise: true,
        },
        &c,
    )
    .unwrap();
    let mut ds = Dataset::from_run(&log);
    for r in &mut ds.records {
        r.depth = 30.0;
    }
    let dp = dir.path().join("d.csv");
    write_dataset(&dp, &ds).unwrap();
    let (sp, wp) = (dir.path().join("s.json"), dir.path().join("w.json"));
    zero_model(VelocityAxis::Surge).save(&sp).unwrap();
    zero_model(VelocityAxis::Sway).save(&wp).unwrap();
    let opts = replay_options(&c, None, HeaveSource::Kinematic, Integrator::Euler);
    let tr = cmd_replay(&c, &dp, &sp, &wp, &opts, &dir.path().join("t.csv")).unwrap();
    let start = ds.records[0].truth_pos;
    assert_eq!(tr.rows.len(), ds.records.len());
    assert!(tr.rows.iter().all(|r| r.est == start));
}

#[test]
fn replay_is_deterministic_and_checks_axes() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg();
    let dp = dir.path().join("d.csv");
    cmd_simulate(&c, ScenarioKind::WingsLevelSawtooth, 600.0, OceanCurrent::none(), 9, true, &dp).unwrap();
    let (sp, wp) = (dir.path().join("s.json"), dir.path().join("w.json"));
    random_model(VelocityAxis::Surge, 1).save(&sp).unwrap();
    random_model(VelocityAxis::Sway, 2).save(&wp).unwrap();
    let opts = replay_options(&c, None, HeaveSource::Kinematic, Integrator::Euler);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    cmd_replay(&c, &dp, &sp, &wp, &opts, &a).unwrap();
    cmd_replay(&c, &dp, &sp, &wp, &opts, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // swapped models are a schema error
    assert!(matches!(cmd_replay(&c, &dp, &wp, &sp, &opts, &a), Err(Error::SchemaMismatch(_))));
}

#[test]
fn truth_velocity_replay_reaches_the_integration_floor() {
    let c = cfg();
    let log = scenario_generate(
        &ScenarioSpec {
            kind: ScenarioKind::MixedTest,
            duration_s: 9_720.0,
            current: parse_current("low", &c).unwrap(),
            seed: 8,
            noise: false,
        },
        &c,
    )
    .unwrap();
    for rule in [Integrator::Euler, Integrator::Trapezoid] {
        let tr = truth_replay(&log, true, rule).unwrap();
        let rep = evaluate("floor", &tr, None).unwrap();
        assert!(rep.summary.final_horizontal_error_m < 0.1, "{rule:?}: {:?}", rep.summary);
        assert_eq!(rep.errors.len(), tr.rows.len());
    }
    // without the current the relative velocity drifts with the water
    let rel = evaluate("rel", &truth_replay(&log, false, Integrator::Euler).unwrap(), None).unwrap();
    let drift = 0.05f64.hypot(0.002) * (log.records.last().unwrap().t - log.records[0].t);
    assert!((rel.summary.final_horizontal_error_m - drift).abs() < 0.01 * drift, "{} vs {drift}", rel.summary.final_horizontal_error_m);
}

fn write_traj(dir: &Path, name: &str, offset: f64) -> PathBuf {
    let rows = (0..40)
        .map(|k| {
            let truth = NedPosition::new(k as f64, 0.5 * k as f64, 10.0);
            glidernav::pipeline::replay::TrajectoryRow {
                t: k as f64 * 0.5,
                est: NedPosition::new(truth.north + offset * k as f64, truth.east - 2.0 * offset * k as f64, 10.0),
                truth,
                vel: [1.0, 0.0, 0.0],
                label: [1.0, 0.0],
                label_valid: true,
            }
        })
        .collect();
    let p = dir.join(name);
    Trajectory { rows }.write(&p).unwrap();
    p
}

#[test]
fn evaluate_and_plot_three_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (i, label) in ["low", "medium", "strong"].iter().enumerate() {
        let tp = write_traj(dir.path(), &format!("traj_{label}.csv"), i as f64);
        let rp = dir.path().join(format!("report_{label}.csv"));
        let rep = cmd_evaluate(&tp, None, label, &rp).unwrap();
        assert_eq!(rep.errors.len(), 40);
        if i == 0 {
            assert!(rep.errors.iter().all(|e| e.n_error == 0.0 && e.e_error == 0.0));
        }
        reports.push(rp);
    }
    let out = dir.path().join("plots");
    let files = cmd_plot(&reports, &out).unwrap().files;
    assert_eq!(files.len(), 1);
    let svg = std::fs::read_to_string(&files[0]).unwrap();
    for l in ["low", "medium", "strong"] {
        assert_eq!(svg.matches(&format!(r#"data-label="{l}""#)).count(), 2);
    }
    let again = cmd_plot(&reports, &dir.path().join("plots2")).unwrap().files;
    assert_eq!(svg, std::fs::read_to_string(&again[0]).unwrap());

    let tp = dir.path().join("traj_low.csv");
    let track = cmd_plot(&[tp], &out).unwrap().files;
    assert_eq!(track.len(), 2);
    assert!(std::fs::read_to_string(&track[0]).unwrap().contains("north (m)"));
}

#[test]
fn evaluate_against_a_shorter_truth_is_a_length_error() {
    let dir = tempfile::tempdir().unwrap();
    let tp = write_traj(dir.path(), "t.csv", 1.0);
    let c = cfg();
    let dp = dir.path().join("d.csv");
    cmd_simulate(&c, ScenarioKind::WingsLevelSawtooth, 10.0, OceanCurrent::none(), 1, true, &dp).unwrap();
    let e = cmd_evaluate(&tp, Some(&dp), "x", &dir.path().join("r.csv")).unwrap_err();
    assert!(matches!(e, Error::LengthMismatch { .. }));
    assert_eq!(e.exit_code(), 3);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_glidernav")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.csv");
    let ds = d.to_str().unwrap();
    let ok = cli(&["simulate", "--scenario", "spiral", "--duration-s", "60", "--current", "-0.1,0.02", "--seed", "3", "--out", ds]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(read_dataset(&d).unwrap().records.len(), 120);

    let bad_current = cli(&["simulate", "--scenario", "spiral", "--duration-s", "60", "--current", "gale", "--out", ds]);
    assert_eq!(bad_current.status.code(), Some(2));

    let cfgp = dir.path().join("bad.toml");
    std::fs::write(&cfgp, "[train]\nhidden_units = \"many\"\n").unwrap();
    let bad_cfg = cli(&["simulate", "--config", cfgp.to_str().unwrap(), "--scenario", "spiral", "--duration-s", "60", "--out", ds]);
    assert_eq!(bad_cfg.status.code(), Some(2));

    // a dataset is not a trajectory
    let schema = cli(&["evaluate", "--trajectory", ds, "--out", dir.path().join("r.csv").to_str().unwrap()]);
    assert_eq!(schema.status.code(), Some(3));

    let usage = cli(&["train", "--axis", "heave", "--out", "m.json", ds]);
    assert_eq!(usage.status.code(), Some(2));
}
