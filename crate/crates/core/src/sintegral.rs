//! The singular integral `chi_w`: Schmidt's tent-function limit
//! `I_L(f) = int w(x) Psi_L(f(x)) dx` (primary), the oscillatory integral
//! over `(beta0, alpha)` (cross-check), and the box density `int_B Psi_L(f)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsums::{osc_integral_i, ExpSumValue};
use crate::forms::{CubicForm, LinearSystem};
use crate::lattice::weight_w;
use crate::qmc;
use crate::quadrature::{integrate_best_effort, QuadOptions};

/// `psi_L(xi) = L max(0, 1 - L |xi|)`.
#[inline]
pub fn psi_l(xi: f64, l: f64) -> f64 {
    l * (1.0 - l * xi.abs()).max(0.0)
}

/// `Psi_L(xi) = prod_v psi_L(xi_v)`.
pub fn big_psi_l(xi: &[f64], l: f64) -> f64 {
    xi.iter().map(|&v| psi_l(v, l)).product()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub std_error: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub samples: usize,
    pub seed: u64,
}

fn check_l(l: f64) -> Result<()> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("L must be positive, got {l}")))
    }
}

fn check_lsys(c: &CubicForm, lsys: Option<&LinearSystem>) -> Result<()> {
    if let Some(ls) = lsys {
        Error::check_dim(c.n(), ls.n())?;
    }
    Ok(())
}

/// `int_{[-1,1]^n} w(x) Psi_L(f(x)) dx` for an arbitrary `f`, by randomized
/// QMC with batch-mean standard errors.
pub fn schmidt_il_with<F>(f: F, n: usize, l: f64, samples: usize, seed: u64) -> Result<DensityEstimate>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    check_l(l)?;
    if samples < 1000 {
        return Err(Error::InvalidInput("at least 1000 samples are required".into()));
    }
    let est = qmc::integrate_cube(
        |x: &[f64]| {
            let wt = weight_w(x);
            if wt == 0.0 {
                0.0
            } else {
                wt * big_psi_l(&f(x), l)
            }
        },
        n,
        samples,
        seed,
    );
    Ok(DensityEstimate {
        value: est.mean,
        std_error: est.std_error,
        l,
        samples: est.samples,
        seed,
    })
}

fn system_values<'a>(c: &'a CubicForm, lsys: Option<&LinearSystem>) -> impl Fn(&[f64]) -> Vec<f64> + Sync + 'a {
    let rows: Vec<Vec<f64>> = lsys.map(|l| l.matrix()).unwrap_or_default();
    move |x: &[f64]| {
        let mut v = Vec::with_capacity(rows.len() + 1);
        v.push(c.eval_f64(x));
        for r in &rows {
            v.push(r.iter().zip(x).map(|(a, b)| a * b).sum());
        }
        v
    }
}

/// `I_L(f)` with `f = (C, L_1, ..., L_r)`.
pub fn schmidt_il(
    c: &CubicForm,
    lsys: Option<&LinearSystem>,
    l: f64,
    samples: usize,
    seed: u64,
) -> Result<DensityEstimate> {
    check_lsys(c, lsys)?;
    schmidt_il_with(system_values(c, lsys), c.n(), l, samples, seed)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiRow {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "IL")]
    pub il: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiEstimate {
    pub value: f64,
    pub error_bar: f64,
    /// Whether `|I_{L_{i+1}} - I_{L_i}|` strictly decreases along the schedule.
    pub converged: bool,
    pub table: Vec<ChiRow>,
}

/// `I_L` along an increasing schedule with a common seed. Never fails on
/// non-convergence; see [`chi_w_estimate`].
pub fn chi_w_schedule(
    c: &CubicForm,
    lsys: Option<&LinearSystem>,
    schedule: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ChiEstimate> {
    if schedule.len() < 3 {
        return Err(Error::InvalidInput("the L schedule needs at least 3 entries".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("the L schedule must be increasing".into()));
    }
    let table = schedule
        .iter()
        .map(|&l| {
            schmidt_il(c, lsys, l, samples, seed).map(|e| ChiRow {
                l,
                il: e.value,
                stderr: e.std_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let diffs: Vec<f64> = table.windows(2).map(|w| (w[1].il - w[0].il).abs()).collect();
    let converged = diffs.windows(2).all(|d| d[1] < d[0]);
    let last = &table[table.len() - 1];
    Ok(ChiEstimate {
        value: last.il,
        error_bar: diffs[diffs.len() - 1] + last.stderr,
        converged,
        table,
    })
}

/// `chi_w = lim I_L`, reported as the last schedule entry; `NotConverged`
/// unless successive differences decrease.
pub fn chi_w_estimate(
    c: &CubicForm,
    lsys: Option<&LinearSystem>,
    schedule: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ChiEstimate> {
    let est = chi_w_schedule(c, lsys, schedule, samples, seed)?;
    if est.converged {
        Ok(est)
    } else {
        let rows: Vec<String> = est.table.iter().map(|r| format!("L={} I_L={:.6}", r.l, r.il)).collect();
        Err(Error::NotConverged(format!(
            "differences along the L schedule do not decrease: {}",
            rows.join(", ")
        )))
    }
}

/// Truncation of the `(beta0, alpha)` integration domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OscBox {
    pub beta0: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiOscillatory {
    pub value: ExpSumValue,
    pub quadrature_error: f64,
    /// Observed change from the half-size box, used as the tail estimate.
    pub tail_bound: f64,
    pub half_box_value: f64,
    pub domain: OscBox,
}

/// `int_{|beta0| <= B} int_{|alpha| <= A} I(beta0, Lambda alpha)`.
///
/// Requires `r <= 1` and either `n <= 3` or a diagonal form (whose `I`
/// factors into one-dimensional integrals).
pub fn chi_w_oscillatory(c: &CubicForm, lsys: Option<&LinearSystem>, domain: OscBox, tol: f64) -> Result<ChiOscillatory> {
    check_lsys(c, lsys)?;
    let n = c.n();
    let r = lsys.map_or(0, |l| l.r());
    if r > 1 {
        return Err(Error::InvalidInput("oscillatory singular integral supports r <= 1".into()));
    }
    if n > 3 && c.diagonal_coeffs().is_none() {
        return Err(Error::InvalidInput("oscillatory singular integral supports n <= 3 or diagonal forms".into()));
    }
    if !(domain.beta0 > 0.0) || (r == 1 && !(domain.alpha > 0.0)) || !(tol > 0.0) {
        return Err(Error::InvalidInput("box half-widths and tolerance must be positive".into()));
    }
    let row: Vec<f64> = lsys.map(|l| l.matrix().remove(0)).unwrap_or_else(|| vec![0.0; n]);
    let full = box_integral(c, &row, r, domain, tol)?;
    let half = box_integral(
        c,
        &row,
        r,
        OscBox {
            beta0: domain.beta0 / 2.0,
            alpha: domain.alpha / 2.0,
        },
        tol,
    )?;
    let tail = (full.value.re - half.value.re).abs();
    Ok(ChiOscillatory {
        value: ExpSumValue::new(full.value, full.abs_error + tail),
        quadrature_error: full.abs_error,
        tail_bound: tail,
        half_box_value: half.value.re,
        domain,
    })
}

fn box_integral(c: &CubicForm, row: &[f64], r: usize, domain: OscBox, tol: f64) -> Result<ExpSumValue> {
    let vol = 2.0 * domain.beta0 * if r == 1 { 2.0 * domain.alpha } else { 1.0 };
    let inner_tol = tol / (4.0 * vol);
    let mut failure: Option<Error> = None;
    let beta_panels = (2.0 * domain.beta0).ceil() as usize + 1;
    let beta_integral = |alpha: f64, failure: &mut Option<Error>| {
        let gamma: Vec<f64> = row.iter().map(|v| v * alpha).collect();
        integrate_best_effort(
            |b: f64| {
                if failure.is_some() {
                    return Complex64::new(0.0, 0.0);
                }
                match osc_integral_i(c, b, &gamma, inner_tol) {
                    Ok(v) => v.value,
                    Err(e) => {
                        *failure = Some(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            -domain.beta0,
            domain.beta0,
            &QuadOptions::abs(tol / (4.0 * if r == 1 { 2.0 * domain.alpha } else { 1.0 }))
                .with_initial_panels(beta_panels)
                .with_max_panels(4000),
        )
    };
    let (value, err, ok) = if r == 0 {
        let q = beta_integral(0.0, &mut failure);
        (q.value, q.abs_error + inner_tol * vol, q.converged)
    } else {
        let mut inner_err = 0.0f64;
        let mut inner_ok = true;
        let q = integrate_best_effort(
            |a: f64| {
                let q = beta_integral(a, &mut failure);
                inner_err = inner_err.max(q.abs_error);
                inner_ok &= q.converged;
                q.value
            },
            -domain.alpha,
            domain.alpha,
            &QuadOptions::abs(tol / 4.0)
                .with_initial_panels((2.0 * domain.alpha).ceil() as usize + 1)
                .with_max_panels(4000),
        );
        (
            q.value,
            q.abs_error + 2.0 * domain.alpha * inner_err + inner_tol * vol,
            q.converged && inner_ok,
        )
    };
    if let Some(e) = failure {
        return Err(e);
    }
    if !ok || err > tol {
        return Err(Error::ToleranceNotMet(format!(
            "oscillatory singular integral error {err:.3e} above tolerance {tol:.3e}"
        )));
    }
    Ok(ExpSumValue::new(value, err))
}

/// `int_{|x| <= 1/2} Psi_L(f(x)) dx`, unweighted.
pub fn intbox_check(
    c: &CubicForm,
    lsys: Option<&LinearSystem>,
    l: f64,
    samples: usize,
    seed: u64,
) -> Result<DensityEstimate> {
    check_lsys(c, lsys)?;
    check_l(l)?;
    if samples < 1000 {
        return Err(Error::InvalidInput("at least 1000 samples are required".into()));
    }
    let f = system_values(c, lsys);
    let n = c.n();
    // Sample [-1,1]^n and rescale to [-1/2,1/2]^n: volume factor 2^-n.
    let est = qmc::integrate_cube(
        |x: &[f64]| {
            let y: Vec<f64> = x.iter().map(|v| v / 2.0).collect();
            big_psi_l(&f(&y), l)
        },
        n,
        samples,
        seed,
    );
    let scale = 0.5f64.powi(n as i32);
    Ok(DensityEstimate {
        value: est.mean * scale,
        std_error: est.std_error * scale,
        l,
        samples: est.samples,
        seed,
    })
}
