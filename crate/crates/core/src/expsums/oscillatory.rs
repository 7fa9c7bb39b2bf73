use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::{e, sum_g, ExpSumValue};
use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::lattice::{weight_1d, weight_w};
use crate::qmc;
use crate::quadrature::{integrate_best_effort, integrate_box, QuadOptions};

/// Largest sample count tried by the randomized estimator.
pub const IU_MC_SAMPLE_CAP: usize = 1 << 24;

const MC_SEED: u64 = 0x5eed_c0de;
const EVAL_GUARD: f64 = 2.0e9;

/// `I(gamma0, gamma) = int w(x) e(gamma0 C(x) + gamma . x) dx`.
pub fn osc_integral_i(c: &CubicForm, gamma0: f64, gamma: &[f64], tol: f64) -> Result<ExpSumValue> {
    osc_integral(c, gamma0, gamma, tol, true)
}

/// `I_u(gamma0, gamma) = int_{[-1,1]^n} e(gamma0 C(x) + gamma . x) dx`.
pub fn osc_integral_iu(c: &CubicForm, gamma0: f64, gamma: &[f64], tol: f64) -> Result<ExpSumValue> {
    osc_integral(c, gamma0, gamma, tol, false)
}

fn osc_integral(c: &CubicForm, gamma0: f64, gamma: &[f64], tol: f64, weighted: bool) -> Result<ExpSumValue> {
    let n = c.n();
    Error::check_dim(n, gamma.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    if let Some(diag) = c.diagonal_coeffs() {
        let coeffs: Vec<f64> = diag.iter().map(|v| v.to_f64().unwrap_or(f64::INFINITY)).collect();
        return diagonal_product(&coeffs, gamma0, gamma, tol, weighted);
    }
    if n > 4 {
        return mc_to_tolerance(c, gamma0, gamma, tol, weighted);
    }
    let rate = phase_rate(c, gamma0, gamma);
    let panels = initial_panels(rate);
    let evals = (31.0 * panels as f64).powi(n as i32);
    if evals > EVAL_GUARD {
        return Err(Error::ToleranceNotMet(format!(
            "phase varies too quickly for deterministic quadrature ({evals:.2e} evaluations)"
        )));
    }
    let opts = QuadOptions::abs(tol).with_initial_panels(panels).with_max_panels(2000);
    let f = |x: &[f64]| -> Complex64 {
        let wt = if weighted { weight_w(x) } else { 1.0 };
        if wt == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let lin: f64 = gamma.iter().zip(x).map(|(g, v)| g * v).sum();
        e(gamma0 * c.eval_f64(x) + lin) * wt
    };
    let r = integrate_box(&f, n, -1.0, 1.0, &opts);
    if !r.converged {
        return Err(Error::ToleranceNotMet(format!(
            "estimated error {:.3e} above tolerance {tol:.3e}",
            r.abs_error
        )));
    }
    Ok(ExpSumValue::new(r.value, r.abs_error))
}

/// Maximal rate of the phase, in cycles per unit length, over the box.
fn phase_rate(c: &CubicForm, gamma0: f64, gamma: &[f64]) -> f64 {
    let mut grad = vec![0.0f64; c.n()];
    for (idx, coef) in c.terms() {
        let a = coef.abs().to_f64().unwrap_or(f64::INFINITY);
        for &i in idx {
            grad[i] += a;
        }
    }
    grad.iter()
        .zip(gamma)
        .map(|(g, l)| gamma0.abs() * g + l.abs())
        .fold(0.0, f64::max)
}

fn initial_panels(rate: f64) -> usize {
    (rate / 2.0).ceil() as usize + 1
}

fn one_dim(coef: f64, gamma0: f64, gamma: f64, tol: f64, weighted: bool) -> Result<ExpSumValue> {
    let rate = gamma0.abs() * 3.0 * coef.abs() + gamma.abs();
    let panels = initial_panels(rate);
    if 31.0 * panels as f64 > EVAL_GUARD {
        return Err(Error::ToleranceNotMet("phase varies too quickly for quadrature".into()));
    }
    let opts = QuadOptions::abs(tol).with_initial_panels(panels);
    let r = integrate_best_effort(
        |x: f64| {
            let wt = if weighted { weight_1d(x) } else { 1.0 };
            if wt == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                e(gamma0 * coef * x * x * x + gamma * x) * wt
            }
        },
        -1.0,
        1.0,
        &opts,
    );
    if !r.converged {
        return Err(Error::ToleranceNotMet(format!(
            "estimated error {:.3e} above tolerance {tol:.3e}",
            r.abs_error
        )));
    }
    Ok(ExpSumValue::new(r.value, r.abs_error))
}

/// Diagonal forms factor into one-dimensional integrals.
fn diagonal_product(coeffs: &[f64], gamma0: f64, gamma: &[f64], tol: f64, weighted: bool) -> Result<ExpSumValue> {
    let n = coeffs.len();
    let bound: f64 = if weighted { 0.444 } else { 2.0 };
    let tol_j = tol / (n as f64 * bound.powi(n as i32 - 1));
    // Repeated (coefficient, frequency) pairs share one quadrature.
    let mut cache: Vec<((f64, f64), ExpSumValue)> = Vec::new();
    let mut factors = Vec::with_capacity(n);
    for (&cj, &gj) in coeffs.iter().zip(gamma) {
        let v = match cache.iter().find(|(k, _)| *k == (cj, gj)) {
            Some((_, v)) => *v,
            None => {
                let v = one_dim(cj, gamma0, gj, tol_j, weighted)?;
                cache.push(((cj, gj), v));
                v
            }
        };
        factors.push(v);
    }
    let mut value = Complex64::new(1.0, 0.0);
    for f in &factors {
        value *= f.value;
    }
    let mut err = 0.0;
    for (j, f) in factors.iter().enumerate() {
        let others: f64 = factors
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, g)| g.norm() + g.abs_error)
            .product();
        err += f.abs_error * others;
    }
    if err > tol {
        return Err(Error::ToleranceNotMet(format!(
            "product error {err:.3e} above tolerance {tol:.3e}"
        )));
    }
    Ok(ExpSumValue::new(value, err))
}

/// Randomized quasi-Monte Carlo estimate of `I` (or `I_u`); `abs_error` is
/// the standard error of the batch means.
pub fn osc_integral_mc(
    c: &CubicForm,
    gamma0: f64,
    gamma: &[f64],
    weighted: bool,
    samples: usize,
    seed: u64,
) -> Result<ExpSumValue> {
    let n = c.n();
    Error::check_dim(n, gamma.len())?;
    let est = qmc::integrate_cube(
        |x: &[f64]| {
            let wt = if weighted { weight_w(x) } else { 1.0 };
            if wt == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let lin: f64 = gamma.iter().zip(x).map(|(g, v)| g * v).sum();
            e(gamma0 * c.eval_f64(x) + lin) * wt
        },
        n,
        samples,
        seed,
    );
    Ok(ExpSumValue::new(est.mean, est.std_error))
}

fn mc_to_tolerance(c: &CubicForm, gamma0: f64, gamma: &[f64], tol: f64, weighted: bool) -> Result<ExpSumValue> {
    let mut samples = 1 << 16;
    loop {
        let v = osc_integral_mc(c, gamma0, gamma, weighted, samples, MC_SEED)?;
        if v.abs_error <= tol {
            return Ok(v);
        }
        if samples >= IU_MC_SAMPLE_CAP {
            return Err(Error::ToleranceNotMet(format!(
                "standard error {:.3e} above tolerance {tol:.3e} at {samples} samples",
                v.abs_error
            )));
        }
        samples *= 4;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonReport {
    pub residual: f64,
    pub relative: f64,
    pub g: ExpSumValue,
    pub approx: ExpSumValue,
}

/// `|g(alpha0, lambda) - P^n sum_{|c| <= cutoff} I(P^3 alpha0, P lambda - P c)|`.
pub fn poisson_residual(c: &CubicForm, p: f64, alpha0: f64, lambda: &[f64], cutoff: u32) -> Result<PoissonReport> {
    let n = c.n();
    Error::check_dim(n, lambda.len())?;
    if n > 2 {
        return Err(Error::InvalidInput("Poisson residual is limited to n <= 2".into()));
    }
    let g = sum_g(c, p, alpha0, lambda, true)?;
    let side = 2 * cutoff as i64 + 1;
    let count = side.pow(n as u32);
    let pn = p.powi(n as i32);
    let tol = 1e-9 / count as f64;
    let mut approx = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for idx in 0..count {
        let mut rem = idx;
        let mut gam = vec![0.0; n];
        for (k, gk) in gam.iter_mut().enumerate() {
            let ck = rem % side - cutoff as i64;
            rem /= side;
            *gk = p * lambda[k] - p * ck as f64;
        }
        let v = osc_integral_i(c, p * p * p * alpha0, &gam, tol)?;
        approx += v.value * pn;
        err += v.abs_error * pn;
    }
    let approx = ExpSumValue::new(approx, err);
    let residual = (g.value - approx.value).norm();
    Ok(PoissonReport {
        residual,
        relative: residual / g.norm().max(f64::MIN_POSITIVE),
        g,
        approx,
    })
}
