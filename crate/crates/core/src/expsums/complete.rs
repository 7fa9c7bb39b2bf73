use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Accumulator, ExpSumValue};
use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::forms::CubicForm;

/// Default cap on `q^n` for a complete sum.
pub const COMPLETE_SUM_BUDGET: f64 = 1.0e8;

const BLOCK: u64 = 1 << 14;
const TABLE_LIMIT: u64 = 1 << 22;

/// A cubic form with coefficients reduced modulo `q`.
#[derive(Clone, Debug)]
pub struct ModCubic {
    q: u64,
    n: usize,
    terms: Vec<([usize; 3], u64)>,
}

impl ModCubic {
    pub fn new(c: &CubicForm, q: u64) -> Self {
        let qb = BigInt::from(q);
        let terms = c
            .terms()
            .filter_map(|(idx, coef)| {
                let r = coef.mod_floor(&qb).to_u64().expect("reduced");
                (r != 0).then_some((*idx, r))
            })
            .collect();
        ModCubic { q, n: c.n(), terms }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `C(y) mod q` for reduced `y`.
    #[inline]
    pub fn eval(&self, y: &[u64]) -> u64 {
        let q = self.q as u128;
        let mut acc = 0u128;
        for &([i, j, k], c) in &self.terms {
            let t = (y[i] as u128 * y[j] as u128) % q;
            let t = (t * y[k] as u128) % q;
            acc = (acc + c as u128 * t) % q;
        }
        acc as u64
    }

    /// Calls `f(y)` for every `y` in `(Z/q)^n` with linear index in
    /// `[start, end)`, in lexicographic order (last coordinate fastest).
    pub fn for_each_in_range<F: FnMut(&[u64])>(&self, start: u64, end: u64, mut f: F) {
        let mut y = vec![0u64; self.n];
        let mut idx = start;
        for k in (0..self.n).rev() {
            y[k] = idx % self.q;
            idx /= self.q;
        }
        for _ in start..end {
            f(&y);
            for k in (0..self.n).rev() {
                y[k] += 1;
                if y[k] < self.q {
                    break;
                }
                y[k] = 0;
            }
        }
    }

    pub fn size(&self) -> f64 {
        (self.q as f64).powi(self.n as i32)
    }
}

struct Roots {
    q: u64,
    table: Option<Vec<Complex64>>,
}

impl Roots {
    fn new(q: u64) -> Self {
        let table = (q <= TABLE_LIMIT).then(|| {
            let mut t = vec![Complex64::new(1.0, 0.0); q as usize];
            for k in 1..=(q / 2) {
                let w = root(k, q);
                t[k as usize] = w;
                t[(q - k) as usize] = w.conj();
            }
            t
        });
        Roots { q, table }
    }

    #[inline]
    fn get(&self, k: u64) -> Complex64 {
        match &self.table {
            Some(t) => t[k as usize],
            None if 2 * k <= self.q => root(k, self.q),
            None => root(self.q - k, self.q).conj(),
        }
    }
}

#[inline]
fn root(k: u64, q: u64) -> Complex64 {
    let (s, c) = (2.0 * std::f64::consts::PI * (k as f64 / q as f64)).sin_cos();
    Complex64::new(c, s)
}

/// `S_{q,a,avec} = sum_{y mod q} e_q(a C(y) + avec . y)` with the default
/// budget.
pub fn complete_sum(c: &CubicForm, q: u64, a: i64, avec: &[i64]) -> Result<ExpSumValue> {
    complete_sum_with_budget(c, q, a, avec, COMPLETE_SUM_BUDGET)
}

pub fn complete_sum_with_budget(c: &CubicForm, q: u64, a: i64, avec: &[i64], budget: f64) -> Result<ExpSumValue> {
    Error::check_dim(c.n(), avec.len())?;
    if q == 0 {
        return Err(Error::InvalidInput("modulus q must be at least 1".into()));
    }
    let m = ModCubic::new(c, q);
    let total = m.size();
    if total > budget {
        return Err(Error::resource("complete sum terms", total, budget));
    }
    if q == 1 {
        return Ok(ExpSumValue::exact(Complex64::new(1.0, 0.0)));
    }
    let qi = q as i128;
    let a_red = (a as i128).rem_euclid(qi) as u128;
    let lin: Vec<u128> = avec.iter().map(|&v| (v as i128).rem_euclid(qi) as u128).collect();
    let roots = Roots::new(q);
    let count = total as u64;
    let blocks = count.div_ceil(BLOCK);
    let partial: Vec<Accumulator> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::default();
            let start = b * BLOCK;
            let end = (start + BLOCK).min(count);
            m.for_each_in_range(start, end, |y| {
                let mut k = a_red * m.eval(y) as u128;
                for (l, &yy) in lin.iter().zip(y) {
                    k += l * yy as u128;
                }
                acc.add(roots.get((k % q as u128) as u64));
            });
            acc
        })
        .collect();
    let mut acc = Accumulator::default();
    for p in &partial {
        acc.merge(p);
    }
    Ok(ExpSumValue::new(acc.value(), total * 4.0 * f64::EPSILON))
}

/// Complete sum assembled from prime-power blocks:
/// `S_q = prod_{p^e || q} S_{p^e, a (q/p^e)^2, avec}`.
pub fn complete_sum_crt(c: &CubicForm, q: u64, a: i64, avec: &[i64]) -> Result<ExpSumValue> {
    Error::check_dim(c.n(), avec.len())?;
    if q == 0 {
        return Err(Error::InvalidInput("modulus q must be at least 1".into()));
    }
    let n = c.n() as i32;
    let mut pieces = Vec::new();
    for (p, e) in factorize(q) {
        let pe = p.pow(e);
        let m = (q / pe) as i128 % pe as i128;
        let a_pe = ((a as i128).rem_euclid(pe as i128) * m % pe as i128 * m % pe as i128) as i64;
        let v = complete_sum(c, pe, a_pe, avec)?;
        pieces.push((v, (pe as f64).powi(n)));
    }
    let mut value = Complex64::new(1.0, 0.0);
    for (v, _) in &pieces {
        value *= v.value;
    }
    // |prod z - prod z'| <= sum_i err_i prod_{j != i} bound_j, plus roundoff
    // of the products themselves.
    let total: f64 = pieces.iter().map(|(_, b)| b).product();
    let abs_error = pieces.iter().map(|(v, b)| v.abs_error * total / b).sum::<f64>()
        + 4.0 * f64::EPSILON * pieces.len() as f64 * total;
    Ok(ExpSumValue::new(value, abs_error))
}

#[derive(Clone, Debug, Serialize)]
pub struct SboundRow {
    pub q: u64,
    pub max_ratio: f64,
    pub a: i64,
    pub avec: Vec<i64>,
}

/// Empirical size of `|S_{q,a,avec}| / q^(n - h/8 + psi)`.
#[derive(Clone, Debug, Serialize)]
pub struct SboundReport {
    pub h_lower: usize,
    pub psi: f64,
    pub exponent: f64,
    pub rows: Vec<SboundRow>,
    pub max_ratio: f64,
    pub argmax_q: u64,
}

/// Scans `q <= qmax`, all `a` prime to `q`, and `avec` in `{0}` plus
/// `samples` random residue vectors drawn from `seed`.
pub fn sbound_check(
    c: &CubicForm,
    h_lower: usize,
    qmax: u64,
    psi: f64,
    samples: usize,
    seed: u64,
) -> Result<SboundReport> {
    let n = c.n();
    let exponent = n as f64 - h_lower as f64 / 8.0 + psi;
    let work: f64 = (1..=qmax).map(|q| (q as f64).powi(n as i32 + 1) * (samples + 1) as f64).sum();
    if work > 50.0 * COMPLETE_SUM_BUDGET {
        return Err(Error::resource("sbound scan terms", work, 50.0 * COMPLETE_SUM_BUDGET));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for q in 1..=qmax {
        let mut vecs = vec![vec![0i64; n]];
        for _ in 0..samples {
            vecs.push((0..n).map(|_| rng.gen_range(0..q as i64)).collect());
        }
        let denom = (q as f64).powf(exponent);
        let mut best = SboundRow {
            q,
            max_ratio: -1.0,
            a: 1,
            avec: vec![0; n],
        };
        for a in 1..=q as i64 {
            if a.gcd(&(q as i64)) != 1 {
                continue;
            }
            for v in &vecs {
                let s = complete_sum(c, q, a, v)?;
                let ratio = s.norm() / denom;
                if ratio > best.max_ratio {
                    best = SboundRow {
                        q,
                        max_ratio: ratio,
                        a,
                        avec: v.clone(),
                    };
                }
            }
        }
        rows.push(best);
    }
    let (max_ratio, argmax_q) = rows
        .iter()
        .fold((0.0f64, 1u64), |(m, aq), r| if r.max_ratio > m { (r.max_ratio, r.q) } else { (m, aq) });
    Ok(SboundReport {
        h_lower,
        psi,
        exponent,
        rows,
        max_ratio,
        argmax_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> CubicForm {
        CubicForm::diagonal(&[1]).unwrap()
    }

    #[test]
    fn modulus_one_is_one() {
        let s = complete_sum(&cube(), 1, 7, &[3]).unwrap();
        assert_eq!(s.value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cubes_mod_nine() {
        let s = complete_sum(&cube(), 9, 1, &[0]).unwrap();
        let expect = 3.0 * (1.0 + 2.0 * (2.0 * std::f64::consts::PI / 9.0).cos());
        assert!((s.value.re - expect).abs() < 1e-12 && s.value.im.abs() < 1e-12);
        assert!((expect - 7.596_266_6).abs() < 1e-6);
    }

    #[test]
    fn cubes_mod_two_vanish() {
        let s = complete_sum(&cube(), 2, 1, &[0]).unwrap();
        assert!(s.norm() <= 1e-15);
    }

    #[test]
    fn crt_matches_direct() {
        let c = CubicForm::diagonal(&[1, 1]).unwrap();
        let d = complete_sum(&c, 36, 5, &[1, 2]).unwrap();
        let r = complete_sum_crt(&c, 36, 5, &[1, 2]).unwrap();
        assert!((d.value - r.value).norm() < 1e-9);
        let d = complete_sum(&cube(), 6, 1, &[0]).unwrap();
        let r = complete_sum_crt(&cube(), 6, 1, &[0]).unwrap();
        assert!((d.value - r.value).norm() < 1e-9);
    }

    #[test]
    fn budget_enforced() {
        let c = CubicForm::diagonal(&[1, 1, 1]).unwrap();
        assert!(matches!(
            complete_sum_with_budget(&c, 100, 1, &[0, 0, 0], 1e5),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn sbound_rows() {
        let rep = sbound_check(&cube(), 1, 2, 0.0, 0, 1).unwrap();
        assert_eq!(rep.rows[0].max_ratio, 1.0);
        assert!(rep.rows[1].max_ratio < 1e-12);
    }
}
