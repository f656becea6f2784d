use nalgebra::SVector;

use super::model::{ControlInput, GliderParams, GliderState, OceanCurrent, PreparedModel};
use crate::error::{Error, Result};
use crate::frames::wrap_angle;

/// One classical Runge–Kutta step of an autonomous system.
pub fn rk4<const N: usize, F>(x: &SVector<f64, N>, dt: f64, mut f: F) -> Result<SVector<f64, N>>
where
    F: FnMut(&SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let k1 = f(x)?;
    let k2 = f(&(x + k1 * (0.5 * dt)))?;
    let k3 = f(&(x + k2 * (0.5 * dt)))?;
    let k4 = f(&(x + k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Advances the glider by `dt` with the controls held constant. Roll and
/// yaw are wrapped afterwards.
pub fn rk4_step(
    state: &GliderState,
    ctrl: &ControlInput,
    current: &OceanCurrent,
    dt: f64,
    params: &GliderParams,
) -> Result<GliderState> {
    let model = PreparedModel::new(params, ctrl)?;
    rk4_step_prepared(state, &model, current, dt)
}

pub fn rk4_step_prepared(
    state: &GliderState,
    model: &PreparedModel<'_>,
    current: &OceanCurrent,
    dt: f64,
) -> Result<GliderState> {
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(Error::Config(format!("integration step {dt} s outside (0, 1]")));
    }
    let x = rk4(&state.to_vector(), dt, |x| model.derivative(x, current))?;
    let mut next = GliderState::from_vector(&x);
    next.eta[3] = wrap_angle(next.eta[3]);
    next.eta[5] = wrap_angle(next.eta[5]);
    if !next.is_finite() {
        return Err(Error::Divergence("non-finite vehicle state".into()));
    }
    Ok(next)
}
