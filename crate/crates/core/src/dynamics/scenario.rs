//! Closed-loop scenario runs producing a [`RunLog`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::control::{Autopilot, Setpoints, SteeringMode};
use super::integrate::rk4_step_prepared;
use super::model::{body_acceleration, ControlInput, GliderParams, GliderState, OceanCurrent, PreparedModel};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::frames::{wrap_angle, NedPosition};
use crate::sensors::{ImuTruth, SensorOptions, SensorRecord, SensorSuite, SensorTruth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    WingsLevelSawtooth,
    Spiral,
    /// Randomized wings-level and spiral segments with varying setpoints
    /// and current (training data).
    Mixed,
    /// Fixed wings-level / spiral / wings-level / spiral / wings-level layout.
    MixedTest,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [Self::WingsLevelSawtooth, Self::Spiral, Self::Mixed, Self::MixedTest];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::WingsLevelSawtooth => "wings_level_sawtooth",
            Self::Spiral => "spiral",
            Self::Mixed => "mixed",
            Self::MixedTest => "mixed_test",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub duration_s: f64,
    pub current: OceanCurrent,
    pub seed: u64,
    /// Sensor noise on or off. The truth trajectory does not depend on it.
    pub noise: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start_s: f64,
    pub setpoints: Setpoints,
    /// Inertial current, north/east.
    pub current: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub scenario: ScenarioKind,
    pub duration_s: f64,
    pub seed: u64,
    pub noise: bool,
    pub current: [f64; 2],
    pub sample_rate_hz: f64,
    pub dynamics_rate_hz: f64,
    pub warmup_s: f64,
    pub segments: Vec<Segment>,
    pub config_fingerprint: String,
}

/// Truth at each logged sample, kept in memory alongside the records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub state: GliderState,
    pub ctrl: ControlInput,
    pub accel: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub meta: RunMeta,
    pub records: Vec<SensorRecord>,
    pub truth: Vec<TruthSample>,
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[1] > r[0] {
        rng.gen_range(r[0]..r[1])
    } else {
        r[0]
    }
}

/// Segment layout for a scenario. Only `mixed` consumes randomness.
pub fn plan_segments(kind: ScenarioKind, duration_s: f64, current: &OceanCurrent, cfg: &Config, seed: u64) -> Vec<Segment> {
    let sc = &cfg.scenario;
    let base = Setpoints {
        steering: SteeringMode::WingsLevel {
            heading: wrap_angle(sc.heading_deg.to_radians()),
        },
        pitch: sc.pitch_deg.to_radians(),
        vbs: sc.vbs_m3,
        depth_min: sc.depth_min_m,
        depth_max: sc.depth_max_m,
    };
    let cur = [current.north(), current.east()];
    let fixed = |start_s: f64, steering: SteeringMode| Segment {
        start_s,
        setpoints: Setpoints { steering, ..base },
        current: cur,
    };
    match kind {
        ScenarioKind::WingsLevelSawtooth => vec![fixed(0.0, base.steering)],
        ScenarioKind::Spiral => vec![fixed(0.0, SteeringMode::Spiral { roll: sc.spiral_roll_rad })],
        ScenarioKind::MixedTest => {
            let r = sc.spiral_roll_rad;
            [
                (0.0, base.steering),
                (0.25, SteeringMode::Spiral { roll: r }),
                (0.45, base.steering),
                (0.65, SteeringMode::Spiral { roll: -r }),
                (0.85, base.steering),
            ]
            .into_iter()
            .map(|(f, s)| fixed(f * duration_s, s))
            .collect()
        }
        ScenarioKind::Mixed => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_0000_0000_00AA);
            let mut out = Vec::new();
            let mut t = 0.0;
            while t < duration_s {
                let steering = if rng.gen::<bool>() {
                    SteeringMode::WingsLevel {
                        heading: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                    }
                } else {
                    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    SteeringMode::Spiral {
                        roll: sign * uniform(&mut rng, sc.spiral_roll_range_rad),
                    }
                };
                let pitch = uniform(&mut rng, sc.pitch_range_deg).to_radians();
                let vbs = uniform(&mut rng, sc.vbs_range_m3);
                let depth_min = uniform(&mut rng, sc.depth_min_range_m);
                let depth_max = uniform(&mut rng, sc.depth_max_range_m).max(depth_min + 10.0);
                let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                let scale = uniform(&mut rng, sc.current_scale_range);
                let c = OceanCurrent {
                    speed: current.speed * scale,
                    direction: wrap_angle(current.direction + angle),
                };
                out.push(Segment {
                    start_s: t,
                    setpoints: Setpoints {
                        steering,
                        pitch,
                        vbs,
                        depth_min,
                        depth_max,
                    },
                    current: [c.north(), c.east()],
                });
                t += uniform(&mut rng, [sc.segment_min_s, sc.segment_max_s]);
            }
            out
        }
    }
}

/// Simulates the scenario and samples every sensor at the configured rate.
pub fn scenario_generate(spec: &ScenarioSpec, cfg: &Config) -> Result<RunLog> {
    if !(spec.duration_s > 0.0) || !spec.duration_s.is_finite() {
        return Err(Error::Config(format!("duration {} s must be positive", spec.duration_s)));
    }
    let params = GliderParams::from_config(cfg)?;
    let sim = &cfg.simulation;
    let ratio = (sim.dynamics_rate_hz / sim.sample_rate_hz).round() as usize;
    let dt = 1.0 / sim.dynamics_rate_hz;
    let n_samples = ((spec.duration_s * sim.sample_rate_hz).round() as usize).max(1);
    let segments = plan_segments(spec.kind, spec.duration_s, &spec.current, cfg, spec.seed);
    let first = segments[0];

    let mut pilot = Autopilot::new(&params, cfg.pitch_pid, cfg.heading_pid, first.setpoints);
    let heading0 = match first.setpoints.steering {
        SteeringMode::WingsLevel { heading } => heading,
        SteeringMode::Spiral { .. } => wrap_angle(cfg.scenario.heading_deg.to_radians()),
    };
    let mut state = GliderState {
        eta: [0.0, 0.0, first.setpoints.depth_min + 1.0, 0.0, 0.0, heading0],
        nu_r: [0.3, 0.0, 0.0, 0.0, 0.0, 0.0],
    };

    let seafloor = cfg.environment.seafloor_depth_m;
    let ping_rate = cfg.dvl.ping_rate_hz;

    // settle into the first segment's glide before logging
    let warmup_steps = (sim.warmup_s * sim.dynamics_rate_hz).round() as usize;
    let cur0 = OceanCurrent::from_components(first.current[0], first.current[1]);
    for _ in 0..warmup_steps {
        let ctrl = pilot.update(&state, dt);
        let model = PreparedModel::new(&params, &ctrl)?;
        state = rk4_step_prepared(&state, &model, &cur0, dt)?;
    }
    state.eta[0] = 0.0;
    state.eta[1] = 0.0;

    let mut sensors = SensorSuite::new(cfg, spec.seed, SensorOptions { noise: spec.noise });
    let mut records = Vec::with_capacity(n_samples);
    let mut truth = Vec::with_capacity(n_samples);
    let mut seg_idx = 0;
    let mut current = cur0;
    let mut last_ping: Option<u64> = None;
    let mut ping_velocity = [state.nu_r[0], state.nu_r[1]];

    for j in 0..n_samples * ratio {
        let t = j as f64 * dt;
        while seg_idx + 1 < segments.len() && t >= segments[seg_idx + 1].start_s {
            seg_idx += 1;
            pilot.setpoints = segments[seg_idx].setpoints;
            let c = segments[seg_idx].current;
            current = OceanCurrent::from_components(c[0], c[1]);
        }
        let ping = (t * ping_rate + 1e-9).floor() as u64;
        if last_ping != Some(ping) {
            last_ping = Some(ping);
            ping_velocity = [state.nu_r[0], state.nu_r[1]];
        }
        let ctrl = pilot.update(&state, dt);
        let model = PreparedModel::new(&params, &ctrl)?;
        if j % ratio == 0 {
            let deriv = model.derivative(&state.to_vector(), &current)?;
            let acc = body_acceleration(&state, &deriv, &current);
            let imu = ImuTruth {
                omega: state.omega(),
                accel: acc,
                attitude: state.attitude(),
            };
            let cur = [current.north(), current.east()];
            let position = NedPosition::new(state.eta[0], state.eta[1], state.eta[2]);
            records.push(sensors.sample(&SensorTruth {
                t,
                imu,
                position,
                ctrl,
                current: cur,
                ping_velocity,
                altitude: seafloor - state.eta[2],
            }));
            truth.push(TruthSample {
                t,
                state,
                ctrl,
                accel: [acc.x, acc.y, acc.z],
            });
        }
        state = rk4_step_prepared(&state, &model, &current, dt)?;
    }

    Ok(RunLog {
        meta: RunMeta {
            scenario: spec.kind,
            duration_s: spec.duration_s,
            seed: spec.seed,
            noise: spec.noise,
            current: [spec.current.north(), spec.current.east()],
            sample_rate_hz: sim.sample_rate_hz,
            dynamics_rate_hz: sim.dynamics_rate_hz,
            warmup_s: sim.warmup_s,
            segments,
            config_fingerprint: cfg.fingerprint(),
        },
        records,
        truth,
    })
}
