//! Trains a small surge network on a three-hour mixed run and reports the
//! per-epoch history. The full-size network is trained by `glider_study`.
//!
//! cargo run --release --example train_velocity_net

use glidernav::dynamics::ScenarioKind;
use glidernav::net::VelocityAxis;
use glidernav::pipeline::commands::{cmd_simulate, cmd_train, parse_current};
use glidernav::Config;

fn main() -> glidernav::Result<()> {
    let mut cfg = Config::default();
    cfg.train.hidden_units = 12;
    cfg.train.max_epochs = 150;
    cfg.train.patience = 20;
    let dir = std::env::temp_dir().join("glidernav_train_example");
    std::fs::create_dir_all(&dir).map_err(|e| glidernav::Error::io(&dir, e))?;
    let ds = dir.join("mixed.csv");
    cmd_simulate(&cfg, ScenarioKind::Mixed, 10_800.0, parse_current("low", &cfg)?, 5, true, &ds)?;
    let o = cmd_train(&cfg, &[ds], VelocityAxis::Surge, 5, &dir.join("surge.model.json"))?;
    for h in o.history.iter().filter(|h| h.epoch % 10 == 0) {
        println!("epoch {:>4}  train {:.3e}  val {:.3e}", h.epoch, h.train_mse, h.val_mse);
    }
    println!(
        "stopped ({:?}) at epoch {}, best {}; normalized test MSE {:.3e}",
        o.stop,
        o.history.len(),
        o.best_epoch,
        o.test_mse
    );
    println!("model written to {}", dir.join("surge.model.json").display());
    Ok(())
}
