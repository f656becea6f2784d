use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::DvlConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvlParams {
    pub max_altitude: f64,
    pub min_altitude: f64,
    /// Scale-factor error std, as a fraction of the true velocity.
    pub accuracy: f64,
    /// Additive error std, m/s.
    pub floor: f64,
    pub ping_rate: f64,
}

impl DvlParams {
    pub fn from_config(c: &DvlConfig) -> Self {
        Self {
            max_altitude: c.max_altitude_m,
            min_altitude: c.min_altitude_m,
            accuracy: c.accuracy,
            floor: c.floor_m_s,
            ping_rate: c.ping_rate_hz,
        }
    }

    pub fn noise_free(self) -> Self {
        Self {
            accuracy: 0.0,
            floor: 0.0,
            ..self
        }
    }

    pub fn bottom_lock(&self, altitude: f64) -> bool {
        altitude >= self.min_altitude && altitude <= self.max_altitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvlLabel {
    pub u_r: f64,
    pub v_r: f64,
    pub valid: bool,
}

/// Noisy surge/sway measurement. Random draws are consumed whether or not
/// bottom lock holds so the stream does not depend on altitude. Without
/// lock the velocities are reported as zero.
pub fn dvl_label<R: Rng>(u_r: f64, v_r: f64, altitude: f64, params: &DvlParams, rng: &mut R) -> DvlLabel {
    let mut draw = |x: f64| {
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        x * (1.0 + params.accuracy * n1) + params.floor * n2
    };
    let u = draw(u_r);
    let v = draw(v_r);
    if params.bottom_lock(altitude) {
        DvlLabel { u_r: u, v_r: v, valid: true }
    } else {
        DvlLabel {
            u_r: 0.0,
            v_r: 0.0,
            valid: false,
        }
    }
}
