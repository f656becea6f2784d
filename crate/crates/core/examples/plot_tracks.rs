//! Renders track and error plots from a short truth replay under each
//! current preset.
//!
//! cargo run --release --example plot_tracks -- [out_dir]

use glidernav::dynamics::{scenario_generate, ScenarioKind, ScenarioSpec};
use glidernav::pipeline::commands::{cmd_plot, parse_current};
use glidernav::pipeline::evaluate::evaluate;
use glidernav::pipeline::replay::{truth_replay, Integrator};
use glidernav::Config;

fn main() -> glidernav::Result<()> {
    let cfg = Config::default();
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/plots".into()));
    std::fs::create_dir_all(&out).map_err(|e| glidernav::Error::io(&out, e))?;
    let mut inputs = Vec::new();
    for preset in ["low", "medium", "strong"] {
        let log = scenario_generate(
            &ScenarioSpec {
                kind: ScenarioKind::MixedTest,
                duration_s: 2_400.0,
                current: parse_current(preset, &cfg)?,
                seed: 4,
                noise: false,
            },
            &cfg,
        )?;
        // relative-velocity replay: the error is the current drift
        let tr = truth_replay(&log, false, Integrator::Euler)?;
        let tp = out.join(format!("drift_{preset}.csv"));
        tr.write(&tp)?;
        let rp = out.join(format!("drift_{preset}_report.csv"));
        evaluate(preset, &tr, None)?.write(&rp)?;
        inputs.extend([tp, rp]);
    }
    for f in cmd_plot(&inputs, &out)?.files {
        println!("{}", f.display());
    }
    Ok(())
}
