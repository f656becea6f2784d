use crate::frames::EulerAngles;

/// Gauge pressure at depth `z`.
pub fn pressure_from_depth(z: f64, rho: f64, g: f64) -> f64 {
    rho * g * z
}

/// Depth from gauge pressure, its backward-difference rate, and the body
/// heave obtained by projecting `[0, 0, ż]` onto the body z axis. The
/// first sample of a series (no `prev_depth`) reports zero rate.
pub fn depth_and_heave(
    delta_p: f64,
    rho: f64,
    g: f64,
    att: &EulerAngles,
    prev_depth: Option<f64>,
    dt: f64,
) -> (f64, f64) {
    let z = delta_p / (rho * g);
    let z_dot = match prev_depth {
        Some(prev) if dt > 0.0 => (z - prev) / dt,
        _ => 0.0,
    };
    let w_r = att.theta.cos() * att.phi.cos() * z_dot;
    (z, w_r)
}
