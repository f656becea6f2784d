//! Decoupled pitch and heading loops driving the moving mass, plus the
//! buoyancy schedule that produces the dive/climb sawtooth.

use serde::{Deserialize, Serialize};

use super::model::{ActuatorLimits, ControlInput, GliderParams, GliderState};
use crate::config::PidGains;
use crate::frames::angle_diff;

#[derive(Debug, Clone, PartialEq)]
pub struct PidController {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub i_zone: f64,
    pub out_min: f64,
    pub out_max: f64,
    pub integral: f64,
    pub prev_error: Option<f64>,
}

impl PidController {
    pub fn new(gains: PidGains, out_min: f64, out_max: f64) -> Self {
        assert!(out_min <= out_max, "output bounds reversed");
        Self {
            kp: gains.kp,
            ki: gains.ki,
            kd: gains.kd,
            i_zone: gains.i_zone.unwrap_or(f64::INFINITY),
            out_min,
            out_max,
            integral: 0.0,
            prev_error: None,
        }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = None;
    }

    /// `setpoint − measurement`, saturated.
    pub fn step(&mut self, setpoint: f64, measurement: f64, dt: f64) -> f64 {
        self.update(setpoint - measurement, None, dt)
    }

    /// Same as [`step`](Self::step) with the error taken on the shortest arc.
    pub fn step_angle(&mut self, setpoint: f64, measurement: f64, dt: f64) -> f64 {
        let e = angle_diff(setpoint, measurement);
        let de = self.prev_error.map(|p| angle_diff(e, p));
        self.update(e, de, dt)
    }

    fn update(&mut self, e: f64, de: Option<f64>, dt: f64) -> f64 {
        assert!(dt > 0.0, "pid step needs dt > 0");
        let de = de.or_else(|| self.prev_error.map(|p| e - p)).unwrap_or(0.0);
        self.prev_error = Some(e);
        let deriv = de / dt;
        let candidate = self.integral + e * dt;
        let raw = self.kp * e + self.ki * candidate + self.kd * deriv;
        // conditional integration: freeze the integrator while it would
        // push further into saturation, or while the error is large
        let winding_up = (raw > self.out_max && e > 0.0) || (raw < self.out_min && e < 0.0);
        if !winding_up && e.abs() <= self.i_zone {
            self.integral = candidate;
        }
        let out = self.kp * e + self.ki * self.integral + self.kd * deriv;
        out.clamp(self.out_min, self.out_max)
    }
}

/// Saturating, rate-limited actuator positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Actuators {
    pub position: ControlInput,
    pub limits: ActuatorLimits,
}

impl Actuators {
    pub fn new(limits: ActuatorLimits) -> Self {
        Self {
            position: ControlInput::default(),
            limits,
        }
    }

    pub fn saturate(&self, cmd: &ControlInput) -> ControlInput {
        let l = &self.limits;
        ControlInput {
            vbs: cmd.vbs.clamp(-l.vbs_max, l.vbs_max),
            mm_x: cmd.mm_x.clamp(-l.mm_x_max, l.mm_x_max),
            mm_roll: cmd.mm_roll.clamp(-l.mm_roll_max, l.mm_roll_max),
        }
    }

    pub fn apply(&mut self, cmd: &ControlInput, dt: f64) -> ControlInput {
        let target = self.saturate(cmd);
        let l = &self.limits;
        let slew = |from: f64, to: f64, rate: f64| from + (to - from).clamp(-rate * dt, rate * dt);
        self.position = ControlInput {
            vbs: slew(self.position.vbs, target.vbs, l.vbs_rate),
            mm_x: slew(self.position.mm_x, target.mm_x, l.mm_x_rate),
            mm_roll: slew(self.position.mm_roll, target.mm_roll, l.mm_roll_rate),
        };
        self.position
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SteeringMode {
    /// Hold a heading with the roll loop.
    WingsLevel { heading: f64 },
    /// Hold a fixed moving-mass roll. Positive turns to starboard; the roll
    /// is mirrored on climbs so the turn direction is kept.
    Spiral { roll: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlidePhase {
    Dive,
    Climb,
}

/// Setpoints in force during one scenario segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoints {
    pub steering: SteeringMode,
    /// Pitch magnitude, rad (negative pitch while diving).
    pub pitch: f64,
    /// Buoyancy magnitude, m³ (negative VBS while diving).
    pub vbs: f64,
    pub depth_min: f64,
    pub depth_max: f64,
}

#[derive(Debug, Clone)]
pub struct Autopilot {
    pub pitch_pid: PidController,
    pub heading_pid: PidController,
    pub actuators: Actuators,
    pub phase: GlidePhase,
    pub setpoints: Setpoints,
    trim_params: GliderParams,
}

impl Autopilot {
    pub fn new(params: &GliderParams, pitch: PidGains, heading: PidGains, setpoints: Setpoints) -> Self {
        let l = params.limits;
        Self {
            pitch_pid: PidController::new(pitch, -l.mm_x_max, l.mm_x_max),
            heading_pid: PidController::new(heading, -l.mm_roll_max, l.mm_roll_max),
            actuators: Actuators::new(l),
            phase: GlidePhase::Dive,
            setpoints,
            trim_params: params.clone(),
        }
    }

    pub fn pitch_reference(&self) -> f64 {
        match self.phase {
            GlidePhase::Dive => -self.setpoints.pitch,
            GlidePhase::Climb => self.setpoints.pitch,
        }
    }

    /// Runs both loops for one dynamics step and returns the actuator
    /// positions to hold across it.
    pub fn update(&mut self, state: &GliderState, dt: f64) -> ControlInput {
        let sp = self.setpoints;
        let depth = state.eta[2];
        let next = match self.phase {
            GlidePhase::Dive if depth >= sp.depth_max => GlidePhase::Climb,
            GlidePhase::Climb if depth <= sp.depth_min => GlidePhase::Dive,
            p => p,
        };
        if next != self.phase {
            // the hydrodynamic pitch bias flips with the glide direction
            self.phase = next;
            self.pitch_pid.reset();
        }
        let theta_ref = self.pitch_reference();
        let (vbs, turn_sign) = match self.phase {
            GlidePhase::Dive => (-sp.vbs, 1.0),
            // rolling the same way turns the vehicle the other way on a climb
            GlidePhase::Climb => (sp.vbs, -1.0),
        };
        let att = state.attitude();
        let mm_x = self.trim_params.static_trim_mm_x(theta_ref) - self.pitch_pid.step(theta_ref, att.theta, dt);
        let mm_roll = match sp.steering {
            SteeringMode::WingsLevel { heading } => turn_sign * self.heading_pid.step_angle(heading, att.psi, dt),
            SteeringMode::Spiral { roll } => {
                self.heading_pid.reset();
                turn_sign * roll
            }
        };
        self.actuators.apply(&ControlInput { vbs, mm_x, mm_roll }, dt)
    }
}
