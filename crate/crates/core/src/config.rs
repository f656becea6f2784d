//! Sectioned `key = value` configuration.
//!
//! The reference parameter set ships in `config/default.toml` and is embedded
//! in the library. A user file is merged over it key by key, so a file that
//! only sets `[pitch_pid] kp = 0.1` is a valid configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub environment: EnvironmentConfig,
    pub vehicle: VehicleConfig,
    pub moving_mass: MovingMassConfig,
    pub hydro: HydroConfig,
    pub actuators: ActuatorConfig,
    pub pitch_pid: PidGains,
    pub heading_pid: PidGains,
    pub simulation: SimulationConfig,
    pub scenario: ScenarioConfig,
    pub imu: ImuConfig,
    pub pressure: PressureConfig,
    pub dvl: DvlConfig,
    pub currents: CurrentPresets,
    pub preprocess: PreprocessConfig,
    pub train: TrainSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub water_density: f64,
    pub gravity: f64,
    pub seafloor_depth_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleConfig {
    pub mass_kg: f64,
    pub length_m: f64,
    pub inertia_kg_m2: [[f64; 3]; 3],
    pub cg_m: [f64; 3],
    pub cb_m: [f64; 3],
    pub buoyancy_offset_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovingMassConfig {
    pub mass_kg: f64,
    pub radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroConfig {
    pub added_mass_diag: [f64; 6],
    pub linear_damping_diag: [f64; 6],
    pub quadratic_damping: [f64; 6],
    pub surfaces: Vec<SurfaceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub name: String,
    pub area_m2: f64,
    pub lift_slope: f64,
    pub parasitic_drag: f64,
    pub induced_drag: f64,
    pub position_m: [f64; 3],
    pub normal: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorConfig {
    pub vbs_max_m3: f64,
    pub vbs_rate_m3_s: f64,
    pub mm_x_max_m: f64,
    pub mm_x_rate_m_s: f64,
    pub mm_roll_max_rad: f64,
    pub mm_roll_rate_rad_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Integrate only while |error| is inside this band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_zone: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub dynamics_rate_hz: f64,
    pub sample_rate_hz: f64,
    pub warmup_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub depth_min_m: f64,
    pub depth_max_m: f64,
    pub pitch_deg: f64,
    pub vbs_m3: f64,
    pub heading_deg: f64,
    pub spiral_roll_rad: f64,
    pub segment_min_s: f64,
    pub segment_max_s: f64,
    pub pitch_range_deg: [f64; 2],
    pub vbs_range_m3: [f64; 2],
    pub spiral_roll_range_rad: [f64; 2],
    pub depth_min_range_m: [f64; 2],
    pub depth_max_range_m: [f64; 2],
    pub current_scale_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImuConfig {
    pub gyro_bias_rad_s: [f64; 3],
    pub accel_bias_m_s2: [f64; 3],
    pub gyro_bias_instability_deg_h: f64,
    pub accel_bias_instability_mg: f64,
    pub bias_correlation_s: f64,
    pub gyro_noise_density_rad_s_rthz: f64,
    pub accel_noise_density_m_s2_rthz: f64,
    pub roll_pitch_rms_deg: f64,
    pub heading_rms_deg: f64,
    pub attitude_correlation_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureConfig {
    pub noise_std_pa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DvlConfig {
    pub max_altitude_m: f64,
    pub min_altitude_m: f64,
    pub accuracy: f64,
    pub floor_m_s: f64,
    pub ping_rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentPresets {
    pub low: [f64; 2],
    pub medium: [f64; 2],
    pub strong: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessConfig {
    pub outlier_z: f64,
    pub outlier_window: usize,
    pub label_smooth_sigma: f64,
    pub input_smooth_sigma: f64,
    pub lowpass_cutoff_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub hidden_layers: usize,
    pub hidden_units: usize,
    pub context_taps: usize,
    pub window_len: usize,
    pub split: [f64; 3],
    pub patience: usize,
    pub max_epochs: usize,
    pub scg_sigma: f64,
    pub scg_lambda: f64,
    pub sway_channels: String,
}

impl Default for Config {
    fn default() -> Self {
        Config::from_toml_str("").expect("embedded default configuration parses")
    }
}

impl Config {
    /// Parses `text` merged over the embedded defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut base: toml::Value = DEFAULT_CONFIG
            .parse()
            .map_err(|e| Error::Config(format!("default config: {e}")))?;
        let user: toml::Value = text
            .parse()
            .map_err(|e| Error::Config(format!("config parse: {e}")))?;
        merge(&mut base, user);
        let cfg: Config = base
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let env = &self.environment;
        if !(env.water_density > 0.0 && env.gravity > 0.0) {
            return bad("water_density and gravity must be positive");
        }
        if !(self.vehicle.mass_kg > 0.0) {
            return bad("vehicle mass must be positive");
        }
        if !(self.moving_mass.mass_kg >= 0.0 && self.moving_mass.mass_kg < self.vehicle.mass_kg) {
            return bad("moving mass must be within [0, vehicle mass)");
        }
        let sim = &self.simulation;
        if !(sim.dynamics_rate_hz > 0.0 && sim.sample_rate_hz > 0.0) {
            return bad("simulation rates must be positive");
        }
        let ratio = sim.dynamics_rate_hz / sim.sample_rate_hz;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return bad("dynamics rate must be an integer multiple of the sample rate");
        }
        if sim.dynamics_rate_hz < 1.0 {
            return bad("dynamics step must not exceed 1 s");
        }
        let sc = &self.scenario;
        if !(sc.depth_min_m < sc.depth_max_m) {
            return bad("scenario depth_min_m must be below depth_max_m");
        }
        if !(sc.segment_min_s > 0.0 && sc.segment_min_s <= sc.segment_max_s) {
            return bad("scenario segment bounds invalid");
        }
        let dvl = &self.dvl;
        if !(dvl.min_altitude_m < dvl.max_altitude_m) || dvl.accuracy < 0.0 || dvl.floor_m_s < 0.0 {
            return bad("dvl limits invalid");
        }
        if !(dvl.ping_rate_hz > 0.0) {
            return bad("dvl ping rate must be positive");
        }
        let imu = &self.imu;
        let noise = [
            imu.gyro_bias_instability_deg_h,
            imu.accel_bias_instability_mg,
            imu.gyro_noise_density_rad_s_rthz,
            imu.accel_noise_density_m_s2_rthz,
            imu.roll_pitch_rms_deg,
            imu.heading_rms_deg,
            self.pressure.noise_std_pa,
        ];
        if noise.iter().any(|v| !(*v >= 0.0)) {
            return bad("sensor noise parameters must be non-negative");
        }
        if !(imu.bias_correlation_s > 0.0 && imu.attitude_correlation_s > 0.0) {
            return bad("correlation times must be positive");
        }
        let pre = &self.preprocess;
        if pre.outlier_window == 0 || pre.outlier_z < 0.0 || pre.label_smooth_sigma < 0.0 || pre.input_smooth_sigma < 0.0 {
            return bad("preprocess parameters invalid");
        }
        if pre.lowpass_cutoff_hz < 0.0 || (pre.lowpass_cutoff_hz > 0.0 && pre.lowpass_cutoff_hz >= sim.sample_rate_hz / 2.0) {
            return bad("lowpass cutoff must be 0 (off) or below the Nyquist rate");
        }
        let tr = &self.train;
        if tr.hidden_layers == 0 || tr.hidden_units == 0 || tr.window_len < 2 {
            return bad("train architecture invalid");
        }
        if (tr.split.iter().sum::<f64>() - 1.0).abs() > 1e-9 || tr.split.iter().any(|r| *r < 0.0) {
            return bad("train split ratios must be non-negative and sum to 1");
        }
        if tr.patience == 0 {
            return bad("patience must be at least 1");
        }
        if !matches!(tr.sway_channels.as_str(), "full" | "lateral") {
            return bad("sway_channels must be \"full\" or \"lateral\"");
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Value, user: toml::Value) {
    match (base, user) {
        (toml::Value::Table(b), toml::Value::Table(u)) => {
            for (k, v) in u {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
