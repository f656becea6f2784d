//! Six degree-of-freedom glider truth simulator.

pub mod control;
pub mod integrate;
pub mod model;
pub mod scenario;

pub use control::{Actuators, Autopilot, GlidePhase, PidController, Setpoints, SteeringMode};
pub use integrate::{rk4, rk4_step, rk4_step_prepared};
pub use model::{
    body_acceleration, coriolis_added, coriolis_rb, current_body, current_body_derivative, damping_force,
    dynamics_derivative, mechanical_energy, restoring_force, ActuatorLimits, ControlInput, Environment, GliderParams,
    GliderState, HydroParams, LiftingSurface, MovingMass, OceanCurrent, PreparedModel, RigidBodyParams, StateVector,
};
pub use scenario::{plan_segments, scenario_generate, RunLog, RunMeta, ScenarioKind, ScenarioSpec, Segment, TruthSample};
