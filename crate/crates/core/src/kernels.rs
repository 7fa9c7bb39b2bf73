//! Freeman's kernels `K+` and `K-`, their trapezoidal Fourier transforms,
//! and a numerical check of the sandwich `hat- <= 1_{|t| < eta} <= hat+`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_best_effort, QuadOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

/// How `T(P)` grows with `P`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "theta")]
pub enum TPolicy {
    /// `T = max(1, log P)`.
    Log,
    /// `T = P^theta`.
    Pow(f64),
}

impl TPolicy {
    pub const DEFAULT_THETA: f64 = 0.01;

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(TPolicy::Log),
            "pow" => Ok(TPolicy::Pow(Self::DEFAULT_THETA)),
            other => match other.strip_prefix("pow:") {
                Some(t) => t
                    .parse::<f64>()
                    .ok()
                    .filter(|t| *t > 0.0 && *t <= 1.0)
                    .map(TPolicy::Pow)
                    .ok_or_else(|| Error::InvalidInput(format!("bad theta in policy {other:?}"))),
                None => Err(Error::InvalidInput(format!("unknown policy {other:?}"))),
            },
        }
    }
}

pub fn choose_t(p: f64, policy: TPolicy) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!("P must be at least 1, got {p}")));
    }
    Ok(match policy {
        TPolicy::Log => p.ln().max(1.0),
        TPolicy::Pow(theta) => p.powf(theta),
    })
}

/// `L(P) = max(1, log T)`.
pub fn l_of_t(t: f64) -> f64 {
    t.ln().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelParams {
    pub eta: f64,
    pub rho: f64,
    pub sign: Sign,
}

impl KernelParams {
    pub fn new(eta: f64, rho: f64, sign: Sign) -> Result<Self> {
        if !(eta > 0.0) || !(rho > 0.0) || rho > eta {
            return Err(Error::InvalidInput(format!("need 0 < rho <= eta, got eta={eta}, rho={rho}")));
        }
        Ok(KernelParams { eta, rho, sign })
    }

    /// `rho = eta / L(P)` with `T = T(P)` from the policy.
    pub fn from_p(eta: f64, p: f64, policy: TPolicy, sign: Sign) -> Result<Self> {
        let t = choose_t(p, policy)?;
        Self::new(eta, eta / l_of_t(t), sign)
    }

    pub fn with_sign(self, sign: Sign) -> Self {
        KernelParams { sign, ..self }
    }

    /// `2 eta + rho` or `2 eta - rho`.
    pub fn width(&self) -> f64 {
        match self.sign {
            Sign::Plus => 2.0 * self.eta + self.rho,
            Sign::Minus => 2.0 * self.eta - self.rho,
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `K(alpha) = sin(pi alpha rho) sin(pi alpha (2 eta +- rho)) / (pi^2 alpha^2 rho)`.
pub fn kernel_k(alpha: f64, kp: &KernelParams) -> f64 {
    let b = kp.width();
    b * sinc(PI * alpha * kp.rho) * sinc(PI * alpha * b)
}

/// Closed-form transform `int e(alpha t) K(alpha) d alpha`: a trapezoid.
pub fn kernel_hat(t: f64, kp: &KernelParams) -> f64 {
    let (inner, outer) = match kp.sign {
        Sign::Plus => (kp.eta, kp.eta + kp.rho),
        Sign::Minus => (kp.eta - kp.rho, kp.eta),
    };
    let t = t.abs();
    if t <= inner {
        1.0
    } else if t >= outer {
        0.0
    } else {
        ((outer - t) / kp.rho).clamp(0.0, 1.0)
    }
}

/// `1_{|t| < eta}`.
pub fn indicator(t: f64, eta: f64) -> f64 {
    if t.abs() < eta {
        1.0
    } else {
        0.0
    }
}

/// Second-order bound on `|K(alpha) - K(0)|` from the sinc expansion.
pub fn taylor_bound(alpha: f64, kp: &KernelParams) -> f64 {
    let b = kp.width();
    PI * PI / 6.0 * alpha * alpha * (kp.rho * kp.rho + b * b) * b
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichRow {
    pub t: f64,
    pub hat_minus: f64,
    pub indicator: f64,
    pub hat_plus: f64,
    pub numeric_minus: f64,
    pub numeric_plus: f64,
    pub allowed: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub eta: f64,
    pub rho: f64,
    pub cutoff: f64,
    pub tail_bound: f64,
    pub max_deviation: f64,
    pub rows: Vec<SandwichRow>,
}

/// Truncated transform `2 int_0^A cos(2 pi alpha t) K(alpha) d alpha` with
/// its quadrature error estimate.
pub fn numeric_hat(t: f64, kp: &KernelParams, cutoff: f64, tol: f64) -> (f64, f64) {
    // Oscillation rate of the integrand in cycles per unit alpha.
    let rate = kp.width() / 2.0 + kp.rho / 2.0 + t.abs();
    let panels = ((cutoff * rate) / 4.0).ceil() as usize + 1;
    let opts = QuadOptions::abs(tol / 2.0)
        .with_initial_panels(panels)
        .with_max_panels(panels * 8 + 1000);
    let r = integrate_best_effort(
        |a: f64| (2.0 * PI * a * t).cos() * kernel_k(a, kp),
        0.0,
        cutoff,
        &opts,
    );
    (2.0 * r.value, 2.0 * r.abs_error)
}

/// Compares numerical and closed-form transforms on `t_grid` for both signs
/// and checks the exact sandwich on the grid and at every knot.
pub fn sandwich_check(kp: &KernelParams, t_grid: &[f64], quad_tol: f64) -> Result<SandwichReport> {
    let plus = kp.with_sign(Sign::Plus);
    let minus = kp.with_sign(Sign::Minus);
    // |K(alpha)| <= 1/(pi^2 rho alpha^2), so the two-sided tail beyond A is
    // at most 2/(pi^2 rho A); pick A so this is quad_tol / 2.
    let cutoff = 4.0 / (PI * PI * kp.rho * quad_tol);
    let tail_bound = 2.0 / (PI * PI * kp.rho * cutoff);
    let eta = kp.eta;
    let knots = [
        0.0,
        eta - kp.rho,
        eta,
        eta + kp.rho,
        -(eta - kp.rho),
        -eta,
        -(eta + kp.rho),
    ];
    for &t in &knots {
        chain(t, &minus, &plus)?;
    }
    let rows: Vec<SandwichRow> = t_grid
        .par_iter()
        .map(|&t| {
            let (nm, em) = numeric_hat(t, &minus, cutoff, quad_tol / 2.0);
            let (np, ep) = numeric_hat(t, &plus, cutoff, quad_tol / 2.0);
            SandwichRow {
                t,
                hat_minus: kernel_hat(t, &minus),
                indicator: indicator(t, eta),
                hat_plus: kernel_hat(t, &plus),
                numeric_minus: nm,
                numeric_plus: np,
                allowed: quad_tol + tail_bound + em.max(ep).min(quad_tol),
            }
        })
        .collect();
    let mut max_deviation = 0.0f64;
    for r in &rows {
        chain(r.t, &minus, &plus)?;
        for (num, hat) in [(r.numeric_minus, r.hat_minus), (r.numeric_plus, r.hat_plus)] {
            let dev = (num - hat).abs();
            max_deviation = max_deviation.max(dev);
            if dev > quad_tol + tail_bound {
                return Err(Error::SandwichViolation {
                    t: r.t,
                    detail: format!("numeric transform {num} differs from closed form {hat} by {dev:.3e}"),
                });
            }
        }
    }
    Ok(SandwichReport {
        eta,
        rho: kp.rho,
        cutoff,
        tail_bound,
        max_deviation,
        rows,
    })
}

fn chain(t: f64, minus: &KernelParams, plus: &KernelParams) -> Result<()> {
    let lo = kernel_hat(t, minus);
    let mid = indicator(t, minus.eta);
    let hi = kernel_hat(t, plus);
    if lo <= mid && mid <= hi {
        Ok(())
    } else {
        Err(Error::SandwichViolation {
            t,
            detail: format!("{lo} <= {mid} <= {hi} fails"),
        })
    }
}

/// `n` evenly spaced points covering `[-2 eta, 2 eta]`.
pub fn default_grid(eta: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|i| -2.0 * eta + 4.0 * eta * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero_and_one() {
        let kp = KernelParams::new(1.0, 0.5, Sign::Minus).unwrap();
        assert_eq!(kernel_k(0.0, &kp), 1.5);
        assert!((kernel_k(1.0, &kp) + 2.0 / (PI * PI)).abs() < 1e-12);
        assert_eq!(kernel_k(0.3, &kp), kernel_k(-0.3, &kp));
        let kp = kp.with_sign(Sign::Plus);
        assert_eq!(kernel_k(0.0, &kp), 2.5);
    }

    #[test]
    fn trapezoid() {
        let minus = KernelParams::new(1.0, 0.4, Sign::Minus).unwrap();
        let plus = minus.with_sign(Sign::Plus);
        assert_eq!(kernel_hat(0.0, &minus), 1.0);
        assert_eq!(kernel_hat(0.0, &plus), 1.0);
        assert_eq!(kernel_hat(1.4, &plus), 0.0);
        assert!((kernel_hat(0.8, &minus) - 0.5).abs() < 1e-12);
        assert_eq!(kernel_hat(1.0, &minus), 0.0);
        assert_eq!(indicator(1.0, 1.0), 0.0);
        assert_eq!(kernel_hat(1.0, &plus), 1.0);
    }

    #[test]
    fn t_policies() {
        assert_eq!(choose_t(1.0, TPolicy::Log).unwrap(), 1.0);
        assert_eq!(choose_t(1.0, TPolicy::Pow(0.01)).unwrap(), 1.0);
        assert!((choose_t(10f64.exp(), TPolicy::Log).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(TPolicy::parse("pow:0.5").unwrap(), TPolicy::Pow(0.5));
    }

    #[test]
    fn small_sandwich() {
        let kp = KernelParams::new(0.5, 0.5 / 100f64.ln(), Sign::Plus).unwrap();
        let rep = sandwich_check(&kp, &default_grid(0.5, 9), 1e-3).unwrap();
        assert!(rep.max_deviation < 1e-3 + rep.tail_bound);
    }
}
