use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::{e, Accumulator, ExpSumValue};
use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::lattice::{weight_w, weighted_bound};

/// Default cap on the number of lattice points in a `g` sum.
pub const G_SUM_BUDGET: f64 = 1.0e9;

/// `g(alpha0, lambda) = sum_x w(x/P) e(alpha0 C(x) + lambda . x)`, or the
/// unweighted sum over `|x| < P` when `weighted` is false.
pub fn sum_g(c: &CubicForm, p: f64, alpha0: f64, lambda: &[f64], weighted: bool) -> Result<ExpSumValue> {
    sum_g_with_budget(c, p, alpha0, lambda, weighted, G_SUM_BUDGET)
}

pub fn sum_g_with_budget(
    c: &CubicForm,
    p: f64,
    alpha0: f64,
    lambda: &[f64],
    weighted: bool,
    budget: f64,
) -> Result<ExpSumValue> {
    let n = c.n();
    Error::check_dim(n, lambda.len())?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("P must be at least 1, got {p}")));
    }
    // Both the weighted and unweighted sums live on |x_j| <= ceil(P) - 1.
    let b = weighted_bound(p).max(0);
    let side = (2 * b + 1) as u64;
    let total = (side as f64).powi(n as i32);
    if total > budget {
        return Err(Error::resource("g sum terms", total, budget));
    }
    let compiled = c.compile();
    let exact = compiled.fits(b);
    let rows: Vec<(Accumulator, f64)> = (-b..=b)
        .into_par_iter()
        .map(|x0| {
            let mut acc = Accumulator::default();
            let mut err = 0.0;
            let mut x = vec![-b; n];
            x[0] = x0;
            loop {
                let wt = if weighted {
                    let xs: Vec<f64> = x.iter().map(|&v| v as f64 / p).collect();
                    weight_w(&xs)
                } else {
                    1.0
                };
                if wt > 0.0 {
                    let cx = if exact {
                        compiled.eval_i128(&x) as f64
                    } else {
                        c.eval(&x).expect("dimension checked").to_f64().unwrap_or(f64::INFINITY)
                    };
                    let t0 = alpha0 * cx;
                    let lin: f64 = lambda.iter().zip(&x).map(|(l, &v)| l * v as f64).sum();
                    let lin_mag: f64 = lambda.iter().zip(&x).map(|(l, &v)| (l * v as f64).abs()).sum();
                    let phase = (t0.rem_euclid(1.0) + lin.rem_euclid(1.0)).rem_euclid(1.0);
                    acc.add(e(phase) * wt);
                    let arg_err = f64::EPSILON * (2.0 * t0.abs() + (n as f64 + 2.0) * lin_mag + 4.0);
                    err += wt * (2.0 * std::f64::consts::PI * arg_err + 4.0 * f64::EPSILON);
                }
                let mut k = n - 1;
                loop {
                    if k == 0 {
                        return (acc, err);
                    }
                    x[k] += 1;
                    if x[k] <= b {
                        break;
                    }
                    x[k] = -b;
                    k -= 1;
                }
            }
        })
        .collect();
    let mut acc = Accumulator::default();
    let mut err = 0.0;
    for (a, e) in &rows {
        acc.merge(a);
        err += e;
    }
    Ok(ExpSumValue::new(acc.value(), err + 4.0 * f64::EPSILON * total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_phase_counts_box() {
        let c = CubicForm::diagonal(&[1, 2]).unwrap();
        let g = sum_g(&c, 3.5, 0.0, &[0.0, 0.0], false).unwrap();
        assert!((g.value.re - 49.0).abs() < 1e-9);
        let g = sum_g(&c, 3.0, 0.0, &[0.0, 0.0], false).unwrap();
        assert!((g.value.re - 25.0).abs() < 1e-9);
        let g = sum_g(&c, 3.0, 0.0, &[0.0, 0.0], true).unwrap();
        assert!(g.value.re > 0.0 && g.value.im == 0.0);
    }

    #[test]
    fn quarter_turn_cubes() {
        let c = CubicForm::diagonal(&[1]).unwrap();
        let g = sum_g(&c, 3.0, 0.25, &[0.0], false).unwrap();
        assert!((g.value.re - 3.0).abs() < 1e-12 && g.value.im.abs() < 1e-12);
    }

    #[test]
    fn one_dimensional() {
        let c = CubicForm::diagonal(&[1]).unwrap();
        let g = sum_g(&c, 1.0, 0.3, &[0.1], true).unwrap();
        // Only x = 0 with weight e^{-1}.
        assert!((g.value.re - (-1f64).exp()).abs() < 1e-15);
    }
}
