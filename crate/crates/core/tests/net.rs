mod common;

use glidernav::dynamics::{OceanCurrent, ScenarioKind};
use glidernav::net::{Architecture, RnnModel, VelocityAxis};
use glidernav::pipeline::commands::{cmd_simulate, cmd_train, history_path};
use glidernav::Config;

fn small_config() -> Config {
    let mut cfg = Config::default();
    cfg.train.hidden_units = 4;
    cfg.train.hidden_layers = 1;
    cfg.train.window_len = 20;
    cfg.train.max_epochs = 5;
    cfg.simulation.warmup_s = 60.0;
    cfg
}

#[test]
fn bptt_gradient_matches_finite_differences() {
    for layers in [1, 3] {
        let arch = Architecture {
            n_in: 15,
            hidden: 3,
            layers,
            taps: 5,
        };
        let worst = common::gradient_check_worst(&arch, 20, 11 + layers as u64);
        assert!(worst < 1e-6, "{layers} layers: {worst}");
    }
}

#[test]
fn scg_finds_quadratic_minimizer() {
    for seed in 0..5 {
        let (err, iters, monotone) = common::scg_quadratic(seed);
        assert!(err < 1e-8 && iters <= 50 && monotone, "seed {seed}: {err} after {iters}");
    }
}

#[test]
fn doubled_dataset_doubles_episodes_and_history_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let ds = dir.path().join("a.csv");
    cmd_simulate(&cfg, ScenarioKind::WingsLevelSawtooth, 200.0, OceanCurrent::from_components(-0.05, -0.002), 3, true, &ds).unwrap();
    let one = cmd_train(&cfg, &[ds.clone()], VelocityAxis::Surge, 1, &dir.path().join("one.json")).unwrap();
    let two_path = dir.path().join("two.json");
    let two = cmd_train(&cfg, &[ds.clone(), ds], VelocityAxis::Surge, 1, &two_path).unwrap();
    let count = |s: &glidernav::net::data::Split| s.train.len() + s.val.len() + s.test.len();
    assert_eq!(count(&two.split), 2 * count(&one.split));
    assert!(two.history.windows(2).all(|w| w[1].train_mse <= w[0].train_mse));

    let model = RnnModel::load(&two_path).unwrap();
    assert_eq!(model, two.model);
    assert_eq!(model.config_fingerprint, cfg.fingerprint());
    let hist = std::fs::read_to_string(history_path(&two_path)).unwrap();
    assert!(hist.starts_with("# glidernav-history v1\nepoch,train_mse,val_mse,accepted,lambda\n"));
    assert_eq!(hist.lines().count(), 2 + two.history.len());
}
