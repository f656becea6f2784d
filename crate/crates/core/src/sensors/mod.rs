//! Simulated IMU, pressure and DVL channels and the filters used to
//! precondition them.

pub mod dvl;
pub mod filters;
pub mod imu;
pub mod pressure;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::dynamics::ControlInput;
use crate::frames::{EulerAngles, NedPosition};

pub use dvl::{dvl_label, DvlLabel, DvlParams};
pub use filters::{gaussian_kernel, gaussian_smooth, interpolate_flagged, lowpass_filter, remove_outliers};
pub use imu::{imu_sample, ImuMeasurement, ImuModel, ImuParams, ImuTruth};
pub use pressure::{depth_and_heave, pressure_from_depth};

/// One dataset row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorRecord {
    pub t: f64,
    pub euler: EulerAngles,
    pub omega_meas: [f64; 3],
    pub accel_meas: [f64; 3],
    pub depth: f64,
    pub depth_rate_heave: f64,
    pub ctrl: ControlInput,
    pub label_u_r: f64,
    pub label_v_r: f64,
    pub label_valid: bool,
    pub truth_pos: NedPosition,
    /// Inertial current, north/east.
    pub current: [f64; 2],
}

/// Truth needed to synthesize one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorTruth {
    pub t: f64,
    pub imu: ImuTruth,
    pub position: NedPosition,
    pub ctrl: ControlInput,
    pub current: [f64; 2],
    /// Relative surge/sway at the latest DVL ping.
    pub ping_velocity: [f64; 2],
    pub altitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorOptions {
    pub noise: bool,
}

/// All sensors of one run. Each stream has its own seeded generator so
/// switching one sensor off leaves the others' draws unchanged.
#[derive(Debug, Clone)]
pub struct SensorSuite {
    imu: ImuModel,
    dvl: DvlParams,
    pressure_noise: f64,
    pressure_rng: ChaCha8Rng,
    dvl_rng: ChaCha8Rng,
    rho: f64,
    g: f64,
    dt: f64,
    prev_depth: Option<f64>,
}

impl SensorSuite {
    pub fn new(cfg: &Config, seed: u64, opts: SensorOptions) -> Self {
        let mut imu = ImuParams::from_config(&cfg.imu);
        let mut dvl = DvlParams::from_config(&cfg.dvl);
        let mut pressure_noise = cfg.pressure.noise_std_pa;
        if !opts.noise {
            imu = imu.noise_free();
            dvl = dvl.noise_free();
            pressure_noise = 0.0;
        }
        Self {
            imu: ImuModel::new(imu, seed ^ 0x1111_0000_0000_0001),
            dvl,
            pressure_noise,
            pressure_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x2222_0000_0000_0002),
            dvl_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x3333_0000_0000_0003),
            rho: cfg.environment.water_density,
            g: cfg.environment.gravity,
            dt: 1.0 / cfg.simulation.sample_rate_hz,
            prev_depth: None,
        }
    }

    pub fn sample(&mut self, truth: &SensorTruth) -> SensorRecord {
        let m = self.imu.sample(&truth.imu, self.dt);
        let n: f64 = StandardNormal.sample(&mut self.pressure_rng);
        let dp = pressure_from_depth(truth.position.down, self.rho, self.g) + self.pressure_noise * n;
        let (depth, w_r) = depth_and_heave(dp, self.rho, self.g, &m.attitude, self.prev_depth, self.dt);
        self.prev_depth = Some(depth);
        let label = dvl_label(
            truth.ping_velocity[0],
            truth.ping_velocity[1],
            truth.altitude,
            &self.dvl,
            &mut self.dvl_rng,
        );
        SensorRecord {
            t: truth.t,
            euler: m.attitude,
            omega_meas: vec3(m.omega),
            accel_meas: vec3(m.accel),
            depth,
            depth_rate_heave: w_r,
            ctrl: truth.ctrl,
            label_u_r: label.u_r,
            label_v_r: label.v_r,
            label_valid: label.valid,
            truth_pos: truth.position,
            current: truth.current,
        }
    }
}

fn vec3(v: Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}
