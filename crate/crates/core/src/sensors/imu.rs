use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::ImuConfig;
use crate::frames::EulerAngles;

const STANDARD_GRAVITY: f64 = 9.80665;

#[derive(Debug, Clone, PartialEq)]
pub struct ImuParams {
    pub gyro_bias: Vector3<f64>,
    pub accel_bias: Vector3<f64>,
    /// Stationary std of the gyro bias drift, rad/s.
    pub gyro_bias_instability: f64,
    /// Stationary std of the accelerometer bias drift, m/s².
    pub accel_bias_instability: f64,
    pub bias_correlation_s: f64,
    pub gyro_noise_density: f64,
    pub accel_noise_density: f64,
    pub roll_pitch_rms: f64,
    pub heading_rms: f64,
    pub attitude_correlation_s: f64,
}

impl ImuParams {
    pub fn from_config(c: &ImuConfig) -> Self {
        Self {
            gyro_bias: Vector3::from(c.gyro_bias_rad_s),
            accel_bias: Vector3::from(c.accel_bias_m_s2),
            gyro_bias_instability: c.gyro_bias_instability_deg_h.to_radians() / 3600.0,
            accel_bias_instability: c.accel_bias_instability_mg * 1e-3 * STANDARD_GRAVITY,
            bias_correlation_s: c.bias_correlation_s,
            gyro_noise_density: c.gyro_noise_density_rad_s_rthz,
            accel_noise_density: c.accel_noise_density_m_s2_rthz,
            roll_pitch_rms: c.roll_pitch_rms_deg.to_radians(),
            heading_rms: c.heading_rms_deg.to_radians(),
            attitude_correlation_s: c.attitude_correlation_s,
        }
    }

    /// Every stochastic term switched off; fixed biases are kept.
    pub fn noise_free(mut self) -> Self {
        self.gyro_bias_instability = 0.0;
        self.accel_bias_instability = 0.0;
        self.gyro_noise_density = 0.0;
        self.accel_noise_density = 0.0;
        self.roll_pitch_rms = 0.0;
        self.heading_rms = 0.0;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuTruth {
    pub omega: Vector3<f64>,
    pub accel: Vector3<f64>,
    pub attitude: EulerAngles,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuMeasurement {
    pub omega: Vector3<f64>,
    pub accel: Vector3<f64>,
    pub attitude: EulerAngles,
}

/// First-order Gauss–Markov process with stationary std `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GaussMarkov {
    value: f64,
    sigma: f64,
    tau: f64,
}

impl GaussMarkov {
    fn new(sigma: f64, tau: f64, rng: &mut ChaCha8Rng) -> Self {
        let n: f64 = StandardNormal.sample(rng);
        Self {
            value: sigma * n,
            sigma,
            tau,
        }
    }

    fn advance(&mut self, dt: f64, rng: &mut ChaCha8Rng) -> f64 {
        let phi = (-dt / self.tau).exp();
        let n: f64 = StandardNormal.sample(rng);
        self.value = phi * self.value + self.sigma * (1.0 - phi * phi).sqrt() * n;
        self.value
    }
}

/// Stateful IMU: fixed bias, Gauss–Markov bias drift and attitude error,
/// white noise. Deterministic for a given seed and call sequence.
#[derive(Debug, Clone)]
pub struct ImuModel {
    params: ImuParams,
    rng: ChaCha8Rng,
    gyro_drift: [GaussMarkov; 3],
    accel_drift: [GaussMarkov; 3],
    att_err: [GaussMarkov; 3],
}

impl ImuModel {
    pub fn new(params: ImuParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = &params;
        let gm = |s: f64, t: f64, rng: &mut ChaCha8Rng| GaussMarkov::new(s, t, rng);
        let gyro_drift = [0; 3].map(|_| gm(p.gyro_bias_instability, p.bias_correlation_s, &mut rng));
        let accel_drift = [0; 3].map(|_| gm(p.accel_bias_instability, p.bias_correlation_s, &mut rng));
        let att_err = [
            gm(p.roll_pitch_rms, p.attitude_correlation_s, &mut rng),
            gm(p.roll_pitch_rms, p.attitude_correlation_s, &mut rng),
            gm(p.heading_rms, p.attitude_correlation_s, &mut rng),
        ];
        Self {
            params,
            rng,
            gyro_drift,
            accel_drift,
            att_err,
        }
    }

    pub fn params(&self) -> &ImuParams {
        &self.params
    }

    /// One sample; `dt` is the sampling interval.
    pub fn sample(&mut self, truth: &ImuTruth, dt: f64) -> ImuMeasurement {
        let p = &self.params;
        // white noise std of a density sampled at 1/dt
        let bw = (0.5 / dt).sqrt();
        let mut omega = truth.omega + p.gyro_bias;
        let mut accel = truth.accel + p.accel_bias;
        for i in 0..3 {
            omega[i] += self.gyro_drift[i].advance(dt, &mut self.rng);
            let n: f64 = StandardNormal.sample(&mut self.rng);
            omega[i] += p.gyro_noise_density * bw * n;
        }
        for i in 0..3 {
            accel[i] += self.accel_drift[i].advance(dt, &mut self.rng);
            let n: f64 = StandardNormal.sample(&mut self.rng);
            accel[i] += p.accel_noise_density * bw * n;
        }
        let e: [f64; 3] = std::array::from_fn(|i| self.att_err[i].advance(dt, &mut self.rng));
        let a = truth.attitude;
        ImuMeasurement {
            omega,
            accel,
            attitude: EulerAngles::new(a.phi + e[0], a.theta + e[1], a.psi + e[2]),
        }
    }
}

/// Single-shot convenience wrapper around [`ImuModel`].
pub fn imu_sample(truth: &ImuTruth, params: &ImuParams, seed: u64, dt: f64) -> ImuMeasurement {
    ImuModel::new(params.clone(), seed).sample(truth, dt)
}
