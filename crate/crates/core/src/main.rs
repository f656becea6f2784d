use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use glidernav::dynamics::ScenarioKind;
use glidernav::net::VelocityAxis;
use glidernav::pipeline::commands::{cmd_evaluate, cmd_plot, cmd_replay, cmd_simulate, cmd_train, parse_current, replay_options};
use glidernav::pipeline::replay::{HeaveSource, Integrator};
use glidernav::{Config, Error, Result};

#[derive(Parser)]
#[command(name = "glidernav", version, about = "Glider simulation, velocity networks and dead-reckoning replay")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file overriding the built-in configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write a dataset
    Simulate {
        #[command(flatten)]
        common: Common,
        /// wings_level_sawtooth | spiral | mixed | mixed_test
        #[arg(long)]
        scenario: ScenarioKind,
        #[arg(long)]
        duration_s: f64,
        /// none | low | medium | strong | <north>,<east>
        #[arg(long, default_value = "low", allow_hyphen_values = true)]
        current: String,
        /// Disable sensor noise
        #[arg(long)]
        no_noise: bool,
    },
    /// Train a surge or sway network
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: VelocityAxis,
        /// Dataset CSV files, concatenated as episodes
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
    },
    /// Dead-reckon a dataset with trained networks
    Replay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        surge: PathBuf,
        #[arg(long)]
        sway: PathBuf,
        /// Step in seconds; defaults to the sample interval
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value = "kinematic")]
        heave: HeaveSource,
        #[arg(long, default_value = "euler")]
        integrator: Integrator,
    },
    /// Positioning-error report of a trajectory
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trajectory: PathBuf,
        /// Dataset to take the reference positions from
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value = "run")]
        label: String,
    },
    /// Render trajectories and reports as SVG into a directory
    Plot {
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn load(c: &Common) -> Result<Config> {
    Config::load_or_default(c.config.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Simulate {
            common,
            scenario,
            duration_s,
            current,
            no_noise,
        } => {
            let cfg = load(&common)?;
            let cur = parse_current(&current, &cfg)?;
            cmd_simulate(&cfg, scenario, duration_s, cur, common.seed, !no_noise, &common.out)?;
        }
        Command::Train { common, axis, datasets } => {
            let cfg = load(&common)?;
            let o = cmd_train(&cfg, &datasets, axis, common.seed, &common.out)?;
            println!("test mse {:.4e} after {} epochs", o.test_mse, o.history.len());
        }
        Command::Replay {
            common,
            dataset,
            surge,
            sway,
            dt,
            heave,
            integrator,
        } => {
            let cfg = load(&common)?;
            cmd_replay(&cfg, &dataset, &surge, &sway, &replay_options(&cfg, dt, heave, integrator), &common.out)?;
        }
        Command::Evaluate {
            common,
            trajectory,
            truth,
            label,
        } => {
            load(&common)?;
            let r = cmd_evaluate(&trajectory, truth.as_deref(), &label, &common.out)?;
            println!("{}", r.summary_json()?);
        }
        Command::Plot { common, inputs } => {
            load(&common)?;
            for f in cmd_plot(&inputs, &common.out)?.files {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
