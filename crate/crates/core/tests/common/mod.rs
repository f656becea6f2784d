//! Oracle measurements shared by the focused tests and the acceptance run.
#![allow(dead_code)]

use glidernav::dynamics::*;
use glidernav::frames::{euler_rate_matrix, rot_body_to_ned, EulerAngles};
use glidernav::net::{loss_and_gradient, scg_minimize, Architecture, Control, Objective, ScgOptions, SequenceBatch};
use glidernav::{Config, Result};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn params() -> GliderParams {
    GliderParams::from_config(&Config::default()).unwrap()
}

pub fn rand_vec3(rng: &mut ChaCha8Rng, s: f64) -> Vector3<f64> {
    Vector3::new(rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s))
}

pub fn rand_rigid(rng: &mut ChaCha8Rng) -> RigidBodyParams {
    let a = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    RigidBodyParams {
        mass: rng.gen_range(10.0..100.0),
        inertia: a * a.transpose() + Matrix3::identity() * rng.gen_range(0.5..5.0),
        r_cg: rand_vec3(rng, 0.1),
        r_cb: Vector3::zeros(),
        weight: 0.0,
        buoyancy: 0.0,
    }
}

/// Worst relative mismatch between `M ν̇ + C(ν) ν` written with absolute
/// velocities and with relative ones, for an irrotational current
/// (`ν̇_c = −ω × ν_c`).
pub fn rigid_body_identity_worst(draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let rb = rand_rigid(&mut rng);
        let m = rb.mass_matrix();
        let v_r = rand_vec3(&mut rng, 2.0);
        let omega = rand_vec3(&mut rng, 0.5);
        let nu_c = rand_vec3(&mut rng, 0.5);
        let a_lin = rand_vec3(&mut rng, 1.0);
        let a_ang = rand_vec3(&mut rng, 0.3);
        let nu_c_dot = -omega.cross(&nu_c);

        let nu_r = Vector6::new(v_r.x, v_r.y, v_r.z, omega.x, omega.y, omega.z);
        let nu_r_dot = Vector6::new(a_lin.x, a_lin.y, a_lin.z, a_ang.x, a_ang.y, a_ang.z);
        let nu = nu_r + Vector6::new(nu_c.x, nu_c.y, nu_c.z, 0.0, 0.0, 0.0);
        let nu_dot = nu_r_dot + Vector6::new(nu_c_dot.x, nu_c_dot.y, nu_c_dot.z, 0.0, 0.0, 0.0);

        let c = coriolis_rb(&rb, &omega);
        let lhs = m * nu_dot + c * nu;
        let rhs = m * nu_r_dot + c * nu_r;
        let scale = lhs.norm().max(rhs.norm()).max(1e-300);
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    worst
}

/// Worst deviation of `RᵀR` from identity and of `det R` from one.
pub fn rotation_worst(draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lim = std::f64::consts::FRAC_PI_2 - 0.0873;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let att = EulerAngles::new(
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.gen_range(-lim + 1e-6..lim - 1e-6),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let r = rot_body_to_ned(&att).unwrap();
        worst = worst.max((r.transpose() * r - Matrix3::identity()).amax());
        worst = worst.max((r.determinant() - 1.0).abs());
    }
    worst
}

/// Worst entry of `C + Cᵀ` for the rigid-body and added-mass Coriolis
/// matrices.
pub fn coriolis_skew_worst(draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = params();
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let rb = rand_rigid(&mut rng);
        let omega = rand_vec3(&mut rng, 1.0);
        let c = coriolis_rb(&rb, &omega);
        worst = worst.max((c + c.transpose()).amax());
        let nu = Vector6::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let ca = coriolis_added(&p.hydro.added_mass, &nu);
        worst = worst.max((ca + ca.transpose()).amax());
    }
    worst
}

/// Integrates attitude and the body-frame current together through a
/// 1000 s spiralling profile; returns the worst drift of the inertial
/// current and the total heading change.
pub fn current_consistency() -> (f64, f64) {
    let omega_at = |t: f64| Vector3::new(0.02 * (0.013 * t).sin(), 0.015 * (0.021 * t).cos(), 0.05);
    let c_ned = Vector3::new(-0.05, -0.002, 0.0);
    let att0 = EulerAngles::new(0.1, -0.3, 0.4);
    let nu_c0 = rot_body_to_ned(&att0).unwrap().transpose() * c_ned;
    // state [φ θ ψ ν_c]; ψ is left unwrapped to measure the turn
    let mut x = nalgebra::SVector::<f64, 6>::new(att0.phi, att0.theta, att0.psi, nu_c0.x, nu_c0.y, nu_c0.z);
    let dt = 0.1;
    let mut worst: f64 = 0.0;
    for k in 0..10_000 {
        let t0 = k as f64 * dt;
        let f = |t: f64, x: &nalgebra::SVector<f64, 6>| {
            let att = EulerAngles::new(x[0], x[1], x[2]);
            let w = omega_at(t);
            let rate = euler_rate_matrix(&att).unwrap() * w;
            let dc = current_body_derivative(&w, &Vector3::new(x[3], x[4], x[5]));
            nalgebra::SVector::<f64, 6>::new(rate.x, rate.y, rate.z, dc.x, dc.y, dc.z)
        };
        let k1 = f(t0, &x);
        let k2 = f(t0 + dt / 2.0, &(x + k1 * (dt / 2.0)));
        let k3 = f(t0 + dt / 2.0, &(x + k2 * (dt / 2.0)));
        let k4 = f(t0 + dt, &(x + k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        let r = rot_body_to_ned(&EulerAngles::new(x[0], x[1], x[2])).unwrap();
        let c = r * Vector3::new(x[3], x[4], x[5]);
        worst = worst.max((c - c_ned).amax());
    }
    (worst, (x[2] - att0.psi).abs())
}

pub fn glide_ctrl(p: &GliderParams) -> ControlInput {
    ControlInput {
        vbs: -1.0e-3,
        mm_x: p.static_trim_mm_x(-25f64.to_radians()),
        mm_roll: 0.0,
    }
}

/// Observed global orders from successive dt halvings against a dt/16
/// reference over a glide transient under current.
pub fn rk4_orders() -> Vec<f64> {
    let p = params();
    let ctrl = glide_ctrl(&p);
    let model = PreparedModel::new(&p, &ctrl).unwrap();
    let cur = OceanCurrent::from_components(-0.05, -0.002);
    let s0 = GliderState {
        eta: [0.0, 0.0, 10.0, 0.05, -0.1, 0.3],
        nu_r: [0.5, 0.02, 0.05, 0.01, -0.02, 0.01],
    };
    let horizon = 40.0;
    let run = |dt: f64| {
        let mut s = s0;
        for _ in 0..(horizon / dt).round() as usize {
            s = rk4_step_prepared(&s, &model, &cur, dt).unwrap();
        }
        s.to_vector()
    };
    let dts = [0.8, 0.4, 0.2];
    let reference = run(dts[dts.len() - 1] / 16.0);
    let errs: Vec<f64> = dts.iter().map(|&dt| (run(dt) - reference).norm()).collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

pub fn random_batch(n_in: usize, len: usize, episodes: usize, seed: u64) -> SequenceBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<Vec<Vec<f64>>> = (0..episodes)
        .map(|_| (0..len).map(|_| (0..n_in).map(|_| rng.gen_range(-1.5..1.5)).collect()).collect())
        .collect();
    let targets: Vec<Vec<f64>> = (0..episodes).map(|_| (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mask: Vec<Vec<bool>> = (0..episodes).map(|_| (0..len).map(|_| rng.gen_range(0.0..1.0) > 0.15).collect()).collect();
    SequenceBatch::from_episodes(&inputs, &targets, &mask).unwrap()
}

/// Worst relative error of the backpropagated gradient against a
/// fourth-order central difference of the loss, over every parameter.
pub fn gradient_check_worst(arch: &Architecture, len: usize, seed: u64) -> f64 {
    let batch = random_batch(arch.n_in, len, 3, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
    let w: Vec<f64> = (0..arch.n_params()).map(|_| rng.gen_range(-0.6..0.6)).collect();
    let (_, g) = loss_and_gradient(arch, &w, &batch).unwrap();
    let loss = |w: &[f64]| loss_and_gradient(arch, w, &batch).unwrap().0;
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    let mut wp = w.clone();
    for i in 0..w.len() {
        let mut at = |d: f64| {
            wp[i] = w[i] + d;
            let v = loss(&wp);
            wp[i] = w[i];
            v
        };
        let fd = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
        let denom = g[i].abs().max(fd.abs()).max(1e-12);
        worst = worst.max((g[i] - fd).abs() / denom);
    }
    worst
}

pub struct Quadratic {
    pub a: DMatrix<f64>,
    pub x_star: DVector<f64>,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.x_star.len()
    }
    fn value(&mut self, w: &[f64]) -> Result<f64> {
        let d = DVector::from_column_slice(w) - &self.x_star;
        Ok(0.5 * d.dot(&(&self.a * &d)))
    }
    fn value_and_gradient(&mut self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        let d = DVector::from_column_slice(w) - &self.x_star;
        let g = &self.a * &d;
        Ok((0.5 * d.dot(&g), g.as_slice().to_vec()))
    }
}

/// SCG on a random SPD 10-dim quadratic from the origin: returns the max
/// distance to the analytic minimizer, the iteration count, and whether
/// the error history never rose.
pub fn scg_quadratic(seed: u64) -> (f64, usize, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = DMatrix::from_fn(10, 10, |_, _| rng.gen_range(-1.0..1.0));
    let a = &q.transpose() * &q + DMatrix::identity(10, 10) * 0.5;
    let x_star = DVector::from_fn(10, |_, _| rng.gen_range(-2.0..2.0));
    let mut obj = Quadratic { a, x_star: x_star.clone() };
    let res = scg_minimize(
        &mut obj,
        vec![0.0; 10],
        &ScgOptions {
            max_iter: 50,
            ..Default::default()
        },
        |_, _| Ok(Control::Continue),
    )
    .unwrap();
    let err = (DVector::from_vec(res.w) - &x_star).amax();
    (err, res.iterations, res.history.windows(2).all(|w| w[1] <= w[0]))
}
