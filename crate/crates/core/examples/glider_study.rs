//! Full study: 10 h training run, surge/sway networks, and replay of the
//! 2.7 h test layout under the low, medium and strong current presets.
//!
//! cargo run --release --example glider_study -- [out_dir]

use glidernav::net::VelocityAxis;
use glidernav::pipeline::study::{run_study, StudyOptions};
use glidernav::Config;

fn main() -> glidernav::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/glider_study".into());
    let t0 = std::time::Instant::now();
    let s = run_study(&Config::default(), &StudyOptions::default(), out.as_ref())?;
    for axis in [VelocityAxis::Surge, VelocityAxis::Sway] {
        let a = s.axis(axis).unwrap();
        println!(
            "{:<5} epochs {:>4} (best {:>4}, {:?})  mse train {:.2e} val {:.2e} test {:.2e}",
            axis.as_str(),
            a.epochs,
            a.best_epoch,
            a.stop,
            a.train_mse,
            a.val_mse,
            a.test_mse
        );
    }
    println!("preset   final N (m)  final E (m)  distance (m)  ratio   floor (m)");
    for p in &s.presets {
        let r = &p.prediction;
        println!(
            "{:<8} {:>11.1} {:>12.1} {:>13.1} {:>6.3} {:>10.4}",
            p.preset,
            r.final_n_error_m,
            r.final_e_error_m,
            r.distance_traveled_m,
            r.final_horizontal_error_m / r.distance_traveled_m,
            p.floor.final_horizontal_error_m
        );
    }
    println!("noise-free floor {:.4} m; {:.0} s total", s.noise_free_floor.final_horizontal_error_m, t0.elapsed().as_secs_f64());
    Ok(())
}
