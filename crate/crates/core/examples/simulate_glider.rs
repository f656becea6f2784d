//! Closed-loop glider runs: sawtooth, spiral and the mixed test layout.
//!
//! cargo run --release --example simulate_glider

use glidernav::dynamics::{scenario_generate, OceanCurrent, ScenarioKind, ScenarioSpec};
use glidernav::Config;

fn main() -> glidernav::Result<()> {
    let cfg = Config::default();
    for kind in [ScenarioKind::WingsLevelSawtooth, ScenarioKind::Spiral, ScenarioKind::MixedTest] {
        let log = scenario_generate(
            &ScenarioSpec {
                kind,
                duration_s: 3_600.0,
                current: OceanCurrent::from_components(-0.05, -0.002),
                seed: 1,
                noise: false,
            },
            &cfg,
        )?;
        let depth = log.truth.iter().map(|s| s.state.eta[2]);
        let (dmin, dmax) = depth.fold((f64::MAX, f64::MIN), |(a, b), d| (a.min(d), b.max(d)));
        let speed = log.truth.iter().map(|s| s.state.nu_r[0]).sum::<f64>() / log.truth.len() as f64;
        let last = log.truth.last().unwrap().state.position();
        println!(
            "{:<22} {} samples, depth {:.1}..{:.1} m, mean surge {:.3} m/s, ends at N {:.0} m E {:.0} m",
            kind.as_str(),
            log.records.len(),
            dmin,
            dmax,
            speed,
            last.north,
            last.east
        );
    }
    Ok(())
}
