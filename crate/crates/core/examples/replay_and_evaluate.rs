//! Replays a test run three ways: truth velocity over ground (the
//! integration floor), truth relative velocity (drifts with the current),
//! and small trained networks.
//!
//! cargo run --release --example replay_and_evaluate

use glidernav::dynamics::{scenario_generate, ScenarioKind, ScenarioSpec};
use glidernav::net::VelocityAxis;
use glidernav::pipeline::commands::{cmd_evaluate, cmd_replay, cmd_simulate, cmd_train, parse_current, replay_options};
use glidernav::pipeline::evaluate::evaluate;
use glidernav::pipeline::replay::{truth_replay, HeaveSource, Integrator};
use glidernav::Config;

fn main() -> glidernav::Result<()> {
    let mut cfg = Config::default();
    cfg.train.hidden_units = 12;
    cfg.train.max_epochs = 150;
    let current = parse_current("low", &cfg)?;

    let log = scenario_generate(
        &ScenarioSpec {
            kind: ScenarioKind::MixedTest,
            duration_s: 3_600.0,
            current,
            seed: 2,
            noise: true,
        },
        &cfg,
    )?;
    for (label, over_ground) in [("over ground", true), ("relative", false)] {
        let r = evaluate(label, &truth_replay(&log, over_ground, Integrator::Euler)?, None)?;
        println!("truth velocity {label:<11}: final N {:>8.2} m  E {:>8.2} m", r.summary.final_n_error_m, r.summary.final_e_error_m);
    }

    let dir = std::env::temp_dir().join("glidernav_replay_example");
    std::fs::create_dir_all(&dir).map_err(|e| glidernav::Error::io(&dir, e))?;
    let train = dir.join("train.csv");
    let test = dir.join("test.csv");
    cmd_simulate(&cfg, ScenarioKind::Mixed, 7_200.0, current, 1, true, &train)?;
    cmd_simulate(&cfg, ScenarioKind::MixedTest, 3_600.0, current, 2, true, &test)?;
    for axis in [VelocityAxis::Surge, VelocityAxis::Sway] {
        cmd_train(&cfg, &[train.clone()], axis, 1, &dir.join(format!("{}.json", axis.as_str())))?;
    }
    let opts = replay_options(&cfg, None, HeaveSource::Kinematic, Integrator::Euler);
    cmd_replay(&cfg, &test, &dir.join("surge.json"), &dir.join("sway.json"), &opts, &dir.join("replay.csv"))?;
    let r = cmd_evaluate(&dir.join("replay.csv"), None, "networks", &dir.join("report.csv"))?;
    println!(
        "network replay: final N {:.1} m  E {:.1} m over {:.0} m travelled; velocity mse surge {:.2e} sway {:.2e}",
        r.summary.final_n_error_m, r.summary.final_e_error_m, r.summary.distance_traveled_m, r.summary.velocity_mse[0], r.summary.velocity_mse[1]
    );
    Ok(())
}
