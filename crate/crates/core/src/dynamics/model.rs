//! Six degree-of-freedom glider model written in relative velocities:
//!
//! ```text
//! η̇   = J(η) ν,             ν = ν_r + [ν_c; 0]
//! M ν̇_r = τ_damp(ν_r) + τ_restore(η) − (C_rb(ω) + C_A(ν_r)) ν_r
//! ```
//!
//! `C_rb` uses the velocity-independent parametrization (angular rates only),
//! which makes the rigid-body terms identical whether they are evaluated with
//! absolute or relative velocities when `ν̇_c = −S(ω) ν_c`. The maneuvering
//! equation therefore never sees the current; only the position kinematics
//! are advected by it.

use nalgebra::{Matrix3, Matrix6, SVector, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::frames::{euler_rate_matrix, rot_body_to_ned, skew, EulerAngles, NedPosition};

pub type StateVector = SVector<f64, 12>;

/// Largest admissible 1-norm condition number of the total mass matrix.
pub const MAX_MASS_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    pub water_density: f64,
    pub gravity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidBodyParams {
    pub mass: f64,
    /// Inertia about the body origin.
    pub inertia: Matrix3<f64>,
    pub r_cg: Vector3<f64>,
    pub r_cb: Vector3<f64>,
    pub weight: f64,
    /// Buoyancy with the VBS at neutral.
    pub buoyancy: f64,
}

impl RigidBodyParams {
    pub fn mass_matrix(&self) -> Matrix6<f64> {
        let m = self.mass;
        let s = skew(&self.r_cg);
        let mut out = Matrix6::zeros();
        out.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Matrix3::identity() * m));
        out.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-m * s));
        out.fixed_view_mut::<3, 3>(3, 0).copy_from(&(m * s));
        out.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.inertia);
        out
    }
}

/// A thin lifting surface (wing or fin) with normal `normal` located at
/// `position` in body coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftingSurface {
    pub name: String,
    pub area: f64,
    pub lift_slope: f64,
    pub parasitic_drag: f64,
    pub induced_drag: f64,
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
}

impl LiftingSurface {
    /// Force on the surface for a local flow-relative velocity `v` of the
    /// surface. Lift stays perpendicular to `v`.
    pub fn force(&self, v: &Vector3<f64>, rho: f64) -> Vector3<f64> {
        let speed = v.norm();
        if speed < 1e-12 {
            return Vector3::zeros();
        }
        let dir = v / speed;
        let sin_a = self.normal.dot(&dir);
        let q = 0.5 * rho * speed * speed;
        let cl = self.lift_slope * sin_a * (1.0 - sin_a * sin_a).max(0.0).sqrt();
        let lift = -(q * self.area * self.lift_slope * sin_a) * (self.normal - sin_a * dir);
        let drag = -(q * self.area * (self.parasitic_drag + self.induced_drag * cl * cl)) * dir;
        lift + drag
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydroParams {
    pub added_mass: Matrix6<f64>,
    pub linear_damping: Matrix6<f64>,
    /// Applied as `D_quad[i] |ν_r[i]| ν_r[i]`.
    pub quadratic_damping: Vector6<f64>,
    pub surfaces: Vec<LiftingSurface>,
    pub water_density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    /// Displaced-volume change, m³. Positive adds buoyancy.
    pub vbs: f64,
    /// Longitudinal moving-mass offset, m. Positive is forward.
    pub mm_x: f64,
    /// Moving-mass rotation about the hull axis, rad. Positive moves the
    /// pack to starboard.
    pub mm_roll: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorLimits {
    pub vbs_max: f64,
    pub vbs_rate: f64,
    pub mm_x_max: f64,
    pub mm_x_rate: f64,
    pub mm_roll_max: f64,
    pub mm_roll_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingMass {
    pub mass: f64,
    pub radius: f64,
}

impl MovingMass {
    fn position(&self, mm_x: f64, mm_roll: f64) -> Vector3<f64> {
        Vector3::new(mm_x, self.radius * mm_roll.sin(), self.radius * mm_roll.cos())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GliderParams {
    /// Rigid-body parameters with all actuators at neutral.
    pub rigid: RigidBodyParams,
    pub moving_mass: MovingMass,
    pub hydro: HydroParams,
    pub env: Environment,
    pub limits: ActuatorLimits,
}

impl GliderParams {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let v = &cfg.vehicle;
        let env = Environment {
            water_density: cfg.environment.water_density,
            gravity: cfg.environment.gravity,
        };
        let inertia = Matrix3::from_fn(|i, j| v.inertia_kg_m2[i][j]);
        if (inertia - inertia.transpose()).abs().max() > 1e-12 || inertia.cholesky().is_none() {
            return Err(Error::Config("inertia must be symmetric positive definite".into()));
        }
        let r_cg = Vector3::from(v.cg_m);
        let r_cb = Vector3::from(v.cb_m);
        if r_cg.norm() >= 1.0 || r_cb.norm() >= 1.0 {
            return Err(Error::Config("centre of gravity/buoyancy offsets must be below 1 m".into()));
        }
        let weight = v.mass_kg * env.gravity;
        let rigid = RigidBodyParams {
            mass: v.mass_kg,
            inertia,
            r_cg,
            r_cb,
            weight,
            buoyancy: weight + v.buoyancy_offset_n,
        };
        let h = &cfg.hydro;
        let surfaces = h
            .surfaces
            .iter()
            .map(|s| {
                let n = Vector3::from(s.normal);
                if n.norm() < 1e-12 {
                    return Err(Error::Config(format!("surface {} has a zero normal", s.name)));
                }
                Ok(LiftingSurface {
                    name: s.name.clone(),
                    area: s.area_m2,
                    lift_slope: s.lift_slope,
                    parasitic_drag: s.parasitic_drag,
                    induced_drag: s.induced_drag,
                    position: Vector3::from(s.position_m),
                    normal: n.normalize(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if h.added_mass_diag.iter().any(|a| *a < 0.0)
            || h.linear_damping_diag.iter().any(|a| *a < 0.0)
            || h.quadratic_damping.iter().any(|a| *a < 0.0)
            || surfaces.iter().any(|s| s.area < 0.0 || s.parasitic_drag < 0.0 || s.induced_drag < 0.0)
        {
            return Err(Error::Config("added mass and damping coefficients must be non-negative".into()));
        }
        let hydro = HydroParams {
            added_mass: Matrix6::from_diagonal(&Vector6::from(h.added_mass_diag)),
            linear_damping: Matrix6::from_diagonal(&Vector6::from(h.linear_damping_diag)),
            quadratic_damping: Vector6::from(h.quadratic_damping),
            surfaces,
            water_density: env.water_density,
        };
        let a = &cfg.actuators;
        Ok(Self {
            rigid,
            moving_mass: MovingMass {
                mass: cfg.moving_mass.mass_kg,
                radius: cfg.moving_mass.radius_m,
            },
            hydro,
            env,
            limits: ActuatorLimits {
                vbs_max: a.vbs_max_m3,
                vbs_rate: a.vbs_rate_m3_s,
                mm_x_max: a.mm_x_max_m,
                mm_x_rate: a.mm_x_rate_m_s,
                mm_roll_max: a.mm_roll_max_rad,
                mm_roll_rate: a.mm_roll_rate_rad_s,
            },
        })
    }

    /// Rigid-body parameters with the centre of gravity shifted by the
    /// moving mass (quasi-static: the inertia is left unchanged).
    pub fn rigid_body_for(&self, ctrl: &ControlInput) -> RigidBodyParams {
        let mm = &self.moving_mass;
        let shift = (mm.position(ctrl.mm_x, ctrl.mm_roll) - mm.position(0.0, 0.0)) * (mm.mass / self.rigid.mass);
        RigidBodyParams {
            r_cg: self.rigid.r_cg + shift,
            ..self.rigid.clone()
        }
    }

    /// Longitudinal moving-mass position that balances the static pitch
    /// moment at pitch `theta` (wings level).
    pub fn static_trim_mm_x(&self, theta: f64) -> f64 {
        let rb = &self.rigid;
        let w = rb.weight;
        let b = rb.buoyancy;
        let x_g = (rb.r_cb.x * b - (rb.r_cg.z * w - rb.r_cb.z * b) * theta.tan()) / w;
        (x_g - rb.r_cg.x) * rb.mass / self.moving_mass.mass.max(1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GliderState {
    /// `[x, y, z, φ, θ, ψ]`, NED position and Euler angles.
    pub eta: [f64; 6],
    /// `[u_r, v_r, w_r, p, q, r]`, relative body velocities.
    pub nu_r: [f64; 6],
}

impl GliderState {
    pub fn from_vector(x: &StateVector) -> Self {
        let mut eta = [0.0; 6];
        let mut nu_r = [0.0; 6];
        eta.copy_from_slice(&x.as_slice()[..6]);
        nu_r.copy_from_slice(&x.as_slice()[6..]);
        Self { eta, nu_r }
    }

    pub fn to_vector(&self) -> StateVector {
        let mut x = StateVector::zeros();
        x.as_mut_slice()[..6].copy_from_slice(&self.eta);
        x.as_mut_slice()[6..].copy_from_slice(&self.nu_r);
        x
    }

    pub fn attitude(&self) -> EulerAngles {
        EulerAngles {
            phi: self.eta[3],
            theta: self.eta[4],
            psi: self.eta[5],
        }
    }

    pub fn position(&self) -> NedPosition {
        NedPosition::new(self.eta[0], self.eta[1], self.eta[2])
    }

    pub fn nu_r(&self) -> Vector6<f64> {
        Vector6::from(self.nu_r)
    }

    pub fn omega(&self) -> Vector3<f64> {
        Vector3::new(self.nu_r[3], self.nu_r[4], self.nu_r[5])
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().chain(self.nu_r.iter()).all(|v| v.is_finite())
    }
}

/// Irrotational horizontal current: speed `speed` flowing toward the
/// direction `direction` (rad from north, positive toward east).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OceanCurrent {
    pub speed: f64,
    pub direction: f64,
}

impl OceanCurrent {
    pub fn new(speed: f64, direction: f64) -> Result<Self> {
        if !(speed >= 0.0) || !direction.is_finite() {
            return Err(Error::Config(format!("invalid current speed {speed} / direction {direction}")));
        }
        Ok(Self { speed, direction })
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// From inertial north/east components.
    pub fn from_components(north: f64, east: f64) -> Self {
        Self {
            speed: north.hypot(east),
            direction: east.atan2(north),
        }
    }

    pub fn north(&self) -> f64 {
        self.speed * self.direction.cos()
    }

    pub fn east(&self) -> f64 {
        self.speed * self.direction.sin()
    }

    pub fn ned(&self) -> Vector3<f64> {
        Vector3::new(self.north(), self.east(), 0.0)
    }

    /// Body-frame components for heading `psi` with the vehicle level.
    pub fn body(&self, psi: f64) -> Vector3<f64> {
        current_body(self.speed, self.direction, psi)
    }

    /// Body-frame components for an arbitrary attitude, `R(Θ)ᵀ v_c`. Equal
    /// to [`OceanCurrent::body`] when roll and pitch vanish.
    pub fn body_at(&self, att: &EulerAngles) -> Vector3<f64> {
        crate::frames::rotation_unchecked(att).transpose() * self.ned()
    }
}

/// `[V_c cos(β_c − ψ), V_c sin(β_c − ψ), 0]`.
pub fn current_body(speed: f64, direction: f64, psi: f64) -> Vector3<f64> {
    let rel = direction - psi;
    Vector3::new(speed * rel.cos(), speed * rel.sin(), 0.0)
}

/// Rate of change of a fixed inertial current seen from a rotating body.
pub fn current_body_derivative(omega: &Vector3<f64>, nu_c_b: &Vector3<f64>) -> Vector3<f64> {
    -skew(omega) * nu_c_b
}

/// Velocity-independent rigid-body Coriolis/centripetal matrix.
pub fn coriolis_rb(params: &RigidBodyParams, omega: &Vector3<f64>) -> Matrix6<f64> {
    let m = params.mass;
    let sw = skew(omega);
    let sr = skew(&params.r_cg);
    let mut c = Matrix6::zeros();
    c.fixed_view_mut::<3, 3>(0, 0).copy_from(&(m * sw));
    c.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-m * sw * sr));
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&(m * sr * sw));
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-skew(&(params.inertia * omega))));
    c
}

/// Added-mass Coriolis matrix built from the partitions of `M_A`.
pub fn coriolis_added(added_mass: &Matrix6<f64>, nu_r: &Vector6<f64>) -> Matrix6<f64> {
    let a11 = added_mass.fixed_view::<3, 3>(0, 0);
    let a12 = added_mass.fixed_view::<3, 3>(0, 3);
    let a21 = added_mass.fixed_view::<3, 3>(3, 0);
    let a22 = added_mass.fixed_view::<3, 3>(3, 3);
    let v1 = nu_r.fixed_rows::<3>(0);
    let v2 = nu_r.fixed_rows::<3>(3);
    let s1 = skew(&(a11 * v1 + a12 * v2));
    let s2 = skew(&(a21 * v1 + a22 * v2));
    let mut c = Matrix6::zeros();
    c.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-s1));
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-s1));
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-s2));
    c
}

/// Hydrodynamic force and moment acting on the vehicle: hull damping plus
/// the lifting surfaces. Never does positive work on the vehicle.
pub fn damping_force(hydro: &HydroParams, nu_r: &Vector6<f64>) -> Vector6<f64> {
    let quad = hydro.quadratic_damping.component_mul(&nu_r.abs()).component_mul(nu_r);
    let mut tau = -(hydro.linear_damping * nu_r) - quad;
    let v = Vector3::new(nu_r[0], nu_r[1], nu_r[2]);
    let w = Vector3::new(nu_r[3], nu_r[4], nu_r[5]);
    for s in &hydro.surfaces {
        let local = v + w.cross(&s.position);
        let f = s.force(&local, hydro.water_density);
        let m = s.position.cross(&f);
        for i in 0..3 {
            tau[i] += f[i];
            tau[i + 3] += m[i];
        }
    }
    tau
}

/// Gravity and buoyancy force/moment acting on the vehicle, with the VBS
/// displacing `vbs` extra cubic metres. This is `−g(η)` in the usual
/// left-hand-side notation.
pub fn restoring_force(att: &EulerAngles, params: &RigidBodyParams, vbs: f64, env: &Environment) -> Vector6<f64> {
    let rt = crate::frames::rotation_unchecked(att).transpose();
    let buoyancy = params.buoyancy + env.water_density * env.gravity * vbs;
    let f_g = rt * Vector3::new(0.0, 0.0, params.weight);
    let f_b = rt * Vector3::new(0.0, 0.0, -buoyancy);
    let f = f_g + f_b;
    let m = params.r_cg.cross(&f_g) + params.r_cb.cross(&f_b);
    Vector6::new(f.x, f.y, f.z, m.x, m.y, m.z)
}

/// Mass properties for one control setting. Built once per integration
/// step since the actuators are held constant across it.
#[derive(Debug, Clone)]
pub struct PreparedModel<'a> {
    pub params: &'a GliderParams,
    pub rigid: RigidBodyParams,
    pub mass: Matrix6<f64>,
    pub mass_inv: Matrix6<f64>,
    pub ctrl: ControlInput,
}

impl<'a> PreparedModel<'a> {
    pub fn new(params: &'a GliderParams, ctrl: &ControlInput) -> Result<Self> {
        let rigid = params.rigid_body_for(ctrl);
        let mass = rigid.mass_matrix() + params.hydro.added_mass;
        let mass_inv = mass.try_inverse().ok_or(Error::SingularMass { cond: f64::INFINITY })?;
        let cond = one_norm(&mass) * one_norm(&mass_inv);
        if !(cond <= MAX_MASS_CONDITION) {
            return Err(Error::SingularMass { cond });
        }
        Ok(Self {
            params,
            rigid,
            mass,
            mass_inv,
            ctrl: *ctrl,
        })
    }

    /// Generalized force on the right-hand side of `M ν̇_r = F`.
    pub fn net_force(&self, att: &EulerAngles, nu_r: &Vector6<f64>) -> Vector6<f64> {
        let omega = Vector3::new(nu_r[3], nu_r[4], nu_r[5]);
        let coriolis = coriolis_rb(&self.rigid, &omega) + coriolis_added(&self.params.hydro.added_mass, nu_r);
        damping_force(&self.params.hydro, nu_r) + restoring_force(att, &self.rigid, self.ctrl.vbs, &self.params.env)
            - coriolis * nu_r
    }

    pub fn derivative(&self, x: &StateVector, current: &OceanCurrent) -> Result<StateVector> {
        let att = EulerAngles {
            phi: x[3],
            theta: x[4],
            psi: x[5],
        };
        let r = rot_body_to_ned(&att)?;
        let t = euler_rate_matrix(&att)?;
        let nu_r = Vector6::from_column_slice(&x.as_slice()[6..]);
        let lin = Vector3::new(nu_r[0], nu_r[1], nu_r[2]);
        let omega = Vector3::new(nu_r[3], nu_r[4], nu_r[5]);
        let pos_rate = r * lin + current.ned();
        let att_rate = t * omega;
        let acc = self.mass_inv * self.net_force(&att, &nu_r);
        let mut out = StateVector::zeros();
        for i in 0..3 {
            out[i] = pos_rate[i];
            out[i + 3] = att_rate[i];
        }
        for i in 0..6 {
            out[i + 6] = acc[i];
        }
        Ok(out)
    }
}

fn one_norm(m: &Matrix6<f64>) -> f64 {
    m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max)
}

/// Time derivative of the 12-state vector `[η; ν_r]`.
pub fn dynamics_derivative(
    state: &GliderState,
    ctrl: &ControlInput,
    current: &OceanCurrent,
    params: &GliderParams,
) -> Result<StateVector> {
    PreparedModel::new(params, ctrl)?.derivative(&state.to_vector(), current)
}

/// Absolute linear body acceleration `ν̇ = ν̇_r − S(ω) ν_c` (what the
/// accelerometer senses as rate of change of velocity).
pub fn body_acceleration(state: &GliderState, deriv: &StateVector, current: &OceanCurrent) -> Vector3<f64> {
    let nu_c = current.body_at(&state.attitude());
    Vector3::new(deriv[6], deriv[7], deriv[8]) + current_body_derivative(&state.omega(), &nu_c)
}

/// Kinetic plus gravitational/buoyancy potential energy.
pub fn mechanical_energy(state: &GliderState, ctrl: &ControlInput, params: &GliderParams) -> f64 {
    let rb = params.rigid_body_for(ctrl);
    let mass = rb.mass_matrix() + params.hydro.added_mass;
    let nu = state.nu_r();
    let kinetic = 0.5 * nu.dot(&(mass * nu));
    let r = crate::frames::rotation_unchecked(&state.attitude());
    let z = state.eta[2];
    let z_cg = z + (r * rb.r_cg).z;
    let z_cb = z + (r * rb.r_cb).z;
    let buoyancy = rb.buoyancy + params.env.water_density * params.env.gravity * ctrl.vbs;
    kinetic - rb.weight * z_cg + buoyancy * z_cb
}
