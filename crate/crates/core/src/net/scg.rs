//! Møller's scaled conjugate gradient. Second-order information comes
//! from a one-sided difference of gradients along the search direction; a
//! Levenberg–Marquardt style scale `λ` keeps the local model positive
//! definite, so no line search is needed.

use crate::error::{Error, Result};

pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&mut self, w: &[f64]) -> Result<f64>;
    fn value_and_gradient(&mut self, w: &[f64]) -> Result<(f64, Vec<f64>)>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScgOptions {
    pub sigma: f64,
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop once the gradient norm falls below this.
    pub grad_tol: f64,
}

impl Default for ScgOptions {
    fn default() -> Self {
        Self {
            sigma: 5e-5,
            lambda: 5e-7,
            max_iter: 2000,
            grad_tol: 1e-12,
        }
    }
}

/// What happened in one iteration, passed to the observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScgIteration {
    pub iter: usize,
    pub error: f64,
    pub accepted: bool,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScgResult {
    pub w: Vec<f64>,
    pub error: f64,
    pub iterations: usize,
    /// Error after every iteration (unchanged on rejected steps).
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(w: &[f64], alpha: f64, p: &[f64]) -> Vec<f64> {
    w.iter().zip(p).map(|(x, d)| x + alpha * d).collect()
}

fn finite_or_diverged(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Divergence(format!("{what} became non-finite")))
    }
}

/// Minimizes `obj` from `w0`. The observer sees each iteration's state and
/// the current weights, and may stop the run early.
pub fn scg_minimize<O, F>(obj: &mut O, w0: Vec<f64>, opts: &ScgOptions, mut observe: F) -> Result<ScgResult>
where
    O: Objective,
    F: FnMut(&ScgIteration, &[f64]) -> Result<Control>,
{
    let n = obj.dim();
    if w0.len() != n {
        return Err(Error::ShapeMismatch(format!("initial point has {} entries, expected {n}", w0.len())));
    }
    let mut w = w0;
    let (e0, g0) = obj.value_and_gradient(&w)?;
    let mut err = finite_or_diverged(e0, "training error")?;
    let mut r: Vec<f64> = g0.iter().map(|g| -g).collect();
    let mut p = r.clone();
    let mut lambda = opts.lambda;
    let mut lambda_bar = 0.0;
    let mut success = true;
    let mut delta = 0.0;
    let mut history = Vec::new();
    let mut iterations = 0;

    for k in 1..=opts.max_iter {
        let p2 = dot(&p, &p);
        if dot(&r, &r).sqrt() < opts.grad_tol || p2 == 0.0 {
            break;
        }
        iterations = k;
        if success {
            let sig = opts.sigma / p2.sqrt();
            let (_, g_plus) = obj.value_and_gradient(&axpy(&w, sig, &p))?;
            // s ≈ H p
            delta = p.iter().zip(&g_plus).zip(&r).map(|((pi, gp), ri)| pi * (gp + ri) / sig).sum();
        }
        delta += (lambda - lambda_bar) * p2;
        if delta <= 0.0 {
            lambda_bar = 2.0 * (lambda - delta / p2);
            delta = -delta + lambda * p2;
            lambda = lambda_bar;
        }
        let mu = dot(&p, &r);
        let alpha = mu / delta;
        let w_new = axpy(&w, alpha, &p);
        let e_new = obj.value(&w_new)?;
        let comparison = if e_new.is_finite() {
            2.0 * delta * (err - e_new) / (mu * mu)
        } else {
            f64::NEG_INFINITY
        };
        let accepted = comparison >= 0.0;
        if accepted {
            let (e_acc, g_new) = obj.value_and_gradient(&w_new)?;
            w = w_new;
            err = finite_or_diverged(e_acc, "training error")?;
            let r_new: Vec<f64> = g_new.iter().map(|g| -g).collect();
            lambda_bar = 0.0;
            success = true;
            if k % n == 0 {
                p = r_new.clone();
            } else {
                let beta = (dot(&r_new, &r_new) - dot(&r_new, &r)) / mu;
                p = r_new.iter().zip(&p).map(|(ri, pi)| ri + beta * pi).collect();
            }
            r = r_new;
            if comparison >= 0.75 {
                lambda *= 0.25;
            }
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if comparison < 0.25 {
            let inc = if comparison.is_finite() { delta * (1.0 - comparison) / p2 } else { 4.0 * lambda.max(1e-12) };
            lambda += inc;
        }
        if !lambda.is_finite() {
            return Err(Error::Divergence("scale parameter became non-finite".into()));
        }
        history.push(err);
        let it = ScgIteration {
            iter: k,
            error: err,
            accepted,
            lambda,
        };
        if observe(&it, &w)? == Control::Stop {
            break;
        }
    }
    Ok(ScgResult {
        w,
        error: err,
        iterations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `½ (x − x*)ᵀ A (x − x*)`; written about the minimizer so the optimum
    /// value is zero and differences near it keep full precision.
    struct Quadratic {
        a: DMatrix<f64>,
        x_star: DVector<f64>,
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

    fn quadratic(seed: u64) -> Quadratic {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = DMatrix::from_fn(10, 10, |_, _| rng.gen_range(-1.0..1.0));
        let a = &q.transpose() * &q + DMatrix::identity(10, 10) * 0.5;
        let x_star = DVector::from_fn(10, |_, _| rng.gen_range(-2.0..2.0));
        Quadratic { a, x_star }
    }

    #[test]
    fn quadratic_reaches_analytic_minimum() {
        for seed in 0..5 {
            let mut q = quadratic(seed);
            let x_star = q.x_star.clone();
            let res = scg_minimize(&mut q, vec![0.0; 10], &ScgOptions { max_iter: 50, ..Default::default() }, |_, _| {
                Ok(Control::Continue)
            })
            .unwrap();
            assert!(res.iterations <= 50);
            let err = (DVector::from_vec(res.w) - &x_star).amax();
            assert!(err < 1e-8, "seed {seed}: {err}");
            assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn history_non_increasing_on_nonconvex() {
        struct Rosen;
        impl Objective for Rosen {
            fn dim(&self) -> usize {
                2
            }
            fn value(&mut self, w: &[f64]) -> Result<f64> {
                Ok((1.0 - w[0]).powi(2) + 100.0 * (w[1] - w[0] * w[0]).powi(2))
            }
            fn value_and_gradient(&mut self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
                let g0 = -2.0 * (1.0 - w[0]) - 400.0 * w[0] * (w[1] - w[0] * w[0]);
                let g1 = 200.0 * (w[1] - w[0] * w[0]);
                Ok((self.value(w)?, vec![g0, g1]))
            }
        }
        let res = scg_minimize(&mut Rosen, vec![-1.2, 1.0], &ScgOptions { max_iter: 500, ..Default::default() }, |_, _| {
            Ok(Control::Continue)
        })
        .unwrap();
        assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(res.error < 1e-6, "{}", res.error);
    }

    #[test]
    fn divergence_is_reported() {
        struct Bad;
        impl Objective for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn value(&mut self, _: &[f64]) -> Result<f64> {
                Ok(f64::NAN)
            }
            fn value_and_gradient(&mut self, _: &[f64]) -> Result<(f64, Vec<f64>)> {
                Ok((f64::NAN, vec![1.0]))
            }
        }
        let r = scg_minimize(&mut Bad, vec![0.0], &ScgOptions::default(), |_, _| Ok(Control::Continue));
        assert!(matches!(r, Err(Error::Divergence(_))));
    }
}
