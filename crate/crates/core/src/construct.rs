//! Explicit integer solutions of `C(x) = 0, |L(x) - tau| < eta` from an
//! h-decomposition `C = sum A_i B_i`: every integer point of the kernel of
//! the linear forms `A_i` is a zero of `C`, so the search runs over that
//! lattice.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::forms::{verify_h_decomposition, CubicForm, HDecomposition, LinearSystem};

fn ser_big_rows<S: Serializer>(rows: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Vec<serde_json::Value>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| match x.to_i64() {
                    Some(i) => serde_json::Value::from(i),
                    None => serde_json::Value::from(x.to_string()),
                })
                .collect()
        })
        .collect();
    v.serialize(s)
}

/// A basis of the lattice `{x in Z^n : A_i(x) = 0 for all i}`, in row
/// Hermite normal form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegerKernelBasis {
    pub n: usize,
    pub rank: usize,
    #[serde(serialize_with = "ser_big_rows")]
    pub vectors: Vec<Vec<BigInt>>,
}

impl IntegerKernelBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.vectors
            .iter()
            .map(|v| v.iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    /// Whether the gcd of the maximal minors is 1, i.e. the vectors span
    /// a saturated lattice rather than a proper sublattice.
    pub fn is_saturated(&self) -> bool {
        maximal_minor_gcd(&self.vectors).is_one()
    }
}

fn clear_denominators(row: &[BigRational]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    row.iter().map(|v| v.numer() * (&l / v.denom())).collect()
}

/// Exact integer kernel by unimodular column reduction of `[A; I]`.
pub fn integer_kernel(forms: &[Vec<BigRational>], n: usize) -> Result<IntegerKernelBasis> {
    for f in forms {
        Error::check_dim(n, f.len())?;
    }
    let a: Vec<Vec<BigInt>> = forms.iter().map(|f| clear_denominators(f)).collect();
    let m = a.len();
    // Columns of the augmented matrix; entries 0..m are A, m..m+n track U.
    let mut cols: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            let mut c: Vec<BigInt> = a.iter().map(|row| row[j].clone()).collect();
            c.extend((0..n).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            c
        })
        .collect();
    let mut piv = 0;
    for i in 0..m {
        loop {
            let nz: Vec<usize> = (piv..n).filter(|&j| !cols[j][i].is_zero()).collect();
            if nz.len() <= 1 {
                if let Some(&j) = nz.first() {
                    cols.swap(piv, j);
                    piv += 1;
                }
                break;
            }
            let &jmin = nz.iter().min_by_key(|&&j| cols[j][i].abs()).unwrap();
            for &j in &nz {
                if j == jmin {
                    continue;
                }
                let q = cols[j][i].div_floor(&cols[jmin][i]);
                let src = cols[jmin].clone();
                for (t, s) in cols[j].iter_mut().zip(&src) {
                    *t -= &q * s;
                }
            }
        }
    }
    let kernel: Vec<Vec<BigInt>> = cols[piv..].iter().map(|c| c[m..].to_vec()).collect();
    Ok(IntegerKernelBasis {
        n,
        rank: piv,
        vectors: row_hnf(kernel),
    })
}

/// Row Hermite normal form: positive pivots, entries above each pivot
/// reduced into `[0, pivot)`, zero rows dropped.
pub fn row_hnf(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let Some(width) = rows.first().map(|r| r.len()) else {
        return rows;
    };
    let mut r = 0;
    for col in 0..width {
        loop {
            let nz: Vec<usize> = (r..rows.len()).filter(|&i| !rows[i][col].is_zero()).collect();
            if nz.len() <= 1 {
                if let Some(&i) = nz.first() {
                    rows.swap(r, i);
                    if rows[r][col].is_negative() {
                        for v in rows[r].iter_mut() {
                            *v = -v.clone();
                        }
                    }
                    for k in 0..r {
                        let q = rows[k][col].div_floor(&rows[r][col]);
                        if !q.is_zero() {
                            let src = rows[r].clone();
                            for (t, s) in rows[k].iter_mut().zip(&src) {
                                *t -= &q * s;
                            }
                        }
                    }
                    r += 1;
                }
                break;
            }
            let &imin = nz.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            for &i in &nz {
                if i == imin {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[imin][col]);
                let src = rows[imin].clone();
                for (t, s) in rows[i].iter_mut().zip(&src) {
                    *t -= &q * s;
                }
            }
        }
    }
    rows.truncate(r);
    rows
}

fn det_bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let k = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for i in 0..k {
        if m[i][i].is_zero() {
            match (i + 1..k).find(|&r| !m[r][i].is_zero()) {
                Some(r) => {
                    m.swap(i, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for r in i + 1..k {
            for c in i + 1..k {
                m[r][c] = (&m[r][c] * &m[i][i] - &m[r][i] * &m[i][c]) / &prev;
            }
        }
        prev = m[i][i].clone();
    }
    sign * &m[k - 1][k - 1]
}

/// gcd of all `k x k` minors of a `k x n` matrix (the product of its
/// elementary divisors).
pub fn maximal_minor_gcd(rows: &[Vec<BigInt>]) -> BigInt {
    let k = rows.len();
    if k == 0 {
        return BigInt::one();
    }
    let n = rows[0].len();
    if k > n {
        return BigInt::zero();
    }
    let mut g = BigInt::zero();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let sub: Vec<Vec<BigInt>> = rows.iter().map(|r| idx.iter().map(|&j| r[j].clone()).collect()).collect();
        g = g.gcd(&det_bareiss(sub));
        if g.is_one() {
            return g;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return g;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Reduced row echelon form over the rationals with pivot columns; after
/// moving pivots first the matrix reads `(I | Lambda'')`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rref {
    pub rows: Vec<Vec<BigRational>>,
    pub pivots: Vec<usize>,
}

pub fn rref(forms: &[Vec<BigRational>], n: usize) -> Result<Rref> {
    for f in forms {
        Error::check_dim(n, f.len())?;
    }
    let mut m: Vec<Vec<BigRational>> = forms.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][col].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                let src = m[r].clone();
                for (t, s) in m[i].iter_mut().zip(&src) {
                    *t -= &f * s;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    Ok(Rref { rows: m, pivots })
}

/// `lambda'_{i,j} = sum_k lambda_{i,k} z_{j,k}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedSystem {
    pub lambda_prime: Vec<Vec<f64>>,
}

pub fn reduce_linear_system(lsys: &LinearSystem, basis: &IntegerKernelBasis) -> Result<ReducedSystem> {
    Error::check_dim(lsys.n(), basis.n)?;
    let z: Vec<Vec<f64>> = basis
        .vectors
        .iter()
        .map(|v| v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let lambda_prime = lsys
        .matrix()
        .iter()
        .map(|row| z.iter().map(|zj| row.iter().zip(zj).map(|(a, b)| a * b).sum()).collect())
        .collect();
    Ok(ReducedSystem { lambda_prime })
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub y: Vec<i64>,
    pub x: Vec<i64>,
    /// Sup norm of `y`.
    pub shell: i64,
    pub basis: IntegerKernelBasis,
    pub linear_values: Vec<f64>,
    pub max_deviation: f64,
    pub cubic_vanishes: bool,
}

/// Lexicographically first `y` with `max |y_j| = s` accepted by `f`.
fn shell_search<F>(d: usize, s: i64, f: &F) -> Option<Vec<i64>>
where
    F: Fn(&[i64]) -> bool + Sync,
{
    if s == 0 {
        let y = vec![0; d];
        return f(&y).then_some(y);
    }
    (-s..=s).into_par_iter().find_map_first(|y0| {
        let mut y = vec![0i64; d];
        y[0] = y0;
        rest(&mut y, 1, s, y0.abs() == s, f).then_some(y)
    })
}

fn rest<F: Fn(&[i64]) -> bool>(y: &mut [i64], j: usize, s: i64, hit: bool, f: &F) -> bool {
    let d = y.len();
    if j == d {
        return hit && f(y);
    }
    if j == d - 1 && !hit {
        for v in [-s, s] {
            y[j] = v;
            if f(y) {
                return true;
            }
        }
        return false;
    }
    for v in -s..=s {
        y[j] = v;
        if rest(y, j + 1, s, hit || v.abs() == s, f) {
            return true;
        }
    }
    false
}

/// Searches `|y| <= y_bound` shell by shell for `|L'(y) - tau| < eta`, maps
/// `y` to `x = sum y_j z_j` and re-verifies `C(x) = 0` and the inequalities
/// on `x` directly. `Ok(None)` when the bounded search fails.
pub fn solve_system(
    c: &CubicForm,
    decomp: &HDecomposition,
    lsys: &LinearSystem,
    tau: &[f64],
    eta: f64,
    y_bound: i64,
) -> Result<Option<Solution>> {
    let n = c.n();
    Error::check_dim(n, lsys.n())?;
    Error::check_dim(lsys.r(), tau.len())?;
    if !(eta > 0.0) {
        return Err(Error::InvalidInput("eta must be positive".into()));
    }
    if !verify_h_decomposition(c, decomp) {
        return Err(Error::InvalidInput("h-decomposition does not verify".into()));
    }
    let forms: Vec<Vec<BigRational>> = decomp.pairs.iter().map(|p| p.linear.clone()).collect();
    let basis = integer_kernel(&forms, n)?;
    if basis.dim() == 0 {
        return Err(Error::InvalidInput("the linear forms of the decomposition have trivial kernel".into()));
    }
    let z = basis
        .to_i64()
        .ok_or_else(|| Error::InvalidInput("kernel basis does not fit in 64-bit integers".into()))?;
    let reduced = reduce_linear_system(lsys, &basis)?;
    let d = basis.dim();
    let to_x = |y: &[i64]| -> Option<Vec<i64>> {
        (0..n)
            .map(|k| {
                let s: i128 = y.iter().zip(&z).map(|(&yj, zj)| yj as i128 * zj[k] as i128).sum();
                i64::try_from(s).ok()
            })
            .collect()
    };
    let accept = |y: &[i64]| -> bool {
        let close = reduced.lambda_prime.iter().zip(tau).all(|(row, t)| {
            let v: f64 = row.iter().zip(y).map(|(a, &b)| a * b as f64).sum();
            (v - t).abs() < eta
        });
        if !close {
            return false;
        }
        let Some(x) = to_x(y) else { return false };
        let zero = c.eval(&x).map(|v| v.is_zero()).unwrap_or(false);
        let ok = lsys
            .eval(&x)
            .map(|vals| vals.iter().zip(tau).all(|(v, t)| (v - t).abs() < eta))
            .unwrap_or(false);
        zero && ok
    };
    for s in 0..=y_bound.max(0) {
        if let Some(y) = shell_search(d, s, &accept) {
            let x = to_x(&y).expect("accepted points fit");
            let linear_values = lsys.eval(&x)?;
            let max_deviation = linear_values
                .iter()
                .zip(tau)
                .map(|(v, t)| (v - t).abs())
                .fold(0.0, f64::max);
            let cubic_vanishes = c.eval(&x)?.is_zero();
            return Ok(Some(Solution {
                y,
                x,
                shell: s,
                basis,
                linear_values,
                max_deviation,
                cubic_vanishes,
            }));
        }
    }
    Ok(None)
}
