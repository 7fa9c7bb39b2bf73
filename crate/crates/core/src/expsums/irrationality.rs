use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::LinearSystem;

/// Value of `F(alpha; P)` with its maximizing `(q, avec)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FValue {
    pub value: f64,
    pub q: u64,
    pub avec: Vec<i64>,
}

/// `F(alpha; P) = sup_{q >= 1, a} prod_v (q + P |q lambda_v - a_v|)^(-1)`
/// with `lambda = alpha . L`.
pub fn irrationality_f(lsys: &LinearSystem, alpha: &[f64], p: f64) -> Result<FValue> {
    let lambda = lsys.combine(alpha)?;
    irrationality_f_lambda(&lambda, p)
}

/// The same supremum for an explicit coefficient vector `lambda`.
///
/// Each factor is at most `1/q`, so the scan stops at the first `q` with
/// `q^(-n)` not exceeding the best value found; ties keep the smaller `q`.
pub fn irrationality_f_lambda(lambda: &[f64], p: f64) -> Result<FValue> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("P must be at least 1, got {p}")));
    }
    if lambda.is_empty() || lambda.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("lambda must be a nonempty finite vector".into()));
    }
    let n = lambda.len() as i32;
    let mut best = FValue {
        value: 0.0,
        q: 1,
        avec: vec![],
    };
    let mut q = 1u64;
    loop {
        let qf = q as f64;
        if q > 1 && qf.powi(-n) <= best.value {
            return Ok(best);
        }
        let mut prod = 1.0;
        let mut avec = Vec::with_capacity(lambda.len());
        for &l in lambda {
            let t = qf * l;
            let a = t.round();
            prod /= qf + p * (t - a).abs();
            avec.push(a as i64);
        }
        if prod > best.value {
            best = FValue { value: prod, q, avec };
        }
        q += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha() {
        let f = irrationality_f_lambda(&[0.0, 0.0], 100.0).unwrap();
        assert_eq!(f, FValue { value: 1.0, q: 1, avec: vec![0, 0] });
    }

    #[test]
    fn rational_coefficients() {
        let f = irrationality_f_lambda(&[0.5, 1.0 / 3.0], 1e6).unwrap();
        assert!(f.value >= 6f64.powi(-2));
        assert_eq!(f.q, 6);
    }

    #[test]
    fn root_two() {
        let f = irrationality_f_lambda(&[2f64.sqrt()], 1e4).unwrap();
        assert!(f.value < 0.02);
    }
}
