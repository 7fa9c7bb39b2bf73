//! Distribution of `L(x) mod 1` over integer zeros `x` of a cubic form:
//! Weyl sums, random-box discrepancy, and tables over a range of `P`.

use std::f64::consts::PI;
use std::fmt::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsums::e;
use crate::forms::{CubicForm, LinearSystem};
use crate::lattice::{enumerate_zeros, Strategy};

/// Default number of random boxes for discrepancy estimates.
pub const DEFAULT_BOXES: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex {
    fn from(z: Complex64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylStat {
    pub k: Vec<i64>,
    #[serde(rename = "P")]
    pub p: f64,
    pub sum: Complex,
    pub normalized: Complex,
    #[serde(rename = "N")]
    pub n: u64,
}

impl WeylStat {
    pub fn abs_normalized(&self) -> f64 {
        self.normalized.re.hypot(self.normalized.im)
    }
}

/// `L(x)` reduced modulo one for each point.
pub fn fractional_parts(lsys: &LinearSystem, points: &[Vec<i64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|x| {
            lsys.rows()
                .iter()
                .map(|row| row.eval(x).rem_euclid(1.0))
                .map(|v| if v >= 1.0 { 0.0 } else { v })
                .collect()
        })
        .collect()
}

/// `sum_{x in zeros} e(k . L(x))` over a given zero list.
pub fn weyl_sum_over(lsys: &LinearSystem, zeros: &[Vec<i64>], k: &[i64], p: f64) -> Result<WeylStat> {
    Error::check_dim(lsys.r(), k.len())?;
    if k.iter().all(|&v| v == 0) {
        return Err(Error::InvalidInput("frequency vector k must be nonzero".into()));
    }
    if zeros.is_empty() {
        return Err(Error::EmptyZeroSet);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for x in zeros {
        let phase: f64 = lsys
            .rows()
            .iter()
            .zip(k)
            .map(|(row, &kv)| (kv as f64 * row.eval(x)).rem_euclid(1.0))
            .sum();
        sum += e(phase);
    }
    let n = zeros.len() as u64;
    Ok(WeylStat {
        k: k.to_vec(),
        p,
        sum: sum.into(),
        normalized: (sum / n as f64).into(),
        n,
    })
}

/// Weyl sum over the zeros of `C` with `|x| <= P`.
pub fn weyl_sum(c: &CubicForm, lsys: &LinearSystem, k: &[i64], p: f64, strategy: Strategy) -> Result<WeylStat> {
    Error::check_dim(c.n(), lsys.n())?;
    Error::check_dim(lsys.r(), k.len())?;
    if k.iter().all(|&v| v == 0) {
        return Err(Error::InvalidInput("frequency vector k must be nonzero".into()));
    }
    let zeros = enumerate_zeros(c, p, strategy)?;
    weyl_sum_over(lsys, &zeros, k, p)
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyStat {
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub value: f64,
    pub boxes: usize,
    pub seed: u64,
}

/// Random boxes `[a, b)` in `[0,1)^r`, reproducible from `seed`.
pub fn random_boxes(r: usize, boxes: usize, seed: u64) -> Vec<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..boxes)
        .map(|_| {
            (0..r)
                .map(|_| {
                    let u: f64 = rng.gen();
                    let v: f64 = rng.gen();
                    if u <= v {
                        (u, v)
                    } else {
                        (v, u)
                    }
                })
                .collect()
        })
        .collect()
}

/// Largest `|fraction of points in B - vol(B)|` over `boxes` random boxes.
pub fn discrepancy(points: &[Vec<f64>], boxes: usize, seed: u64) -> Result<DiscrepancyStat> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput("discrepancy needs at least one point".into()));
    };
    let r = first.len();
    if points.iter().any(|p| p.len() != r) {
        return Err(Error::InvalidInput("points must share one dimension".into()));
    }
    let total = points.len() as f64;
    let value = random_boxes(r, boxes, seed)
        .par_iter()
        .map(|bx| {
            let inside = points
                .iter()
                .filter(|p| p.iter().zip(bx).all(|(&v, &(a, b))| a <= v && v < b))
                .count();
            let vol: f64 = bx.iter().map(|(a, b)| b - a).product();
            (inside as f64 / total - vol).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(DiscrepancyStat {
        p: None,
        value,
        boxes,
        seed,
    })
}

/// Erdos-Turan bound for one-dimensional points:
/// `6/(K+1) + (4/pi) sum_{k<=K} (1/k - 1/(K+1)) |(1/N) sum e(k x)|`.
pub fn erdos_turan_bound(points: &[f64], big_k: usize) -> f64 {
    let n = points.len() as f64;
    let kp1 = (big_k + 1) as f64;
    let mut s = 6.0 / kp1;
    for k in 1..=big_k {
        let z: Complex64 = points.iter().map(|&x| e(k as f64 * x)).sum();
        s += 4.0 / PI * (1.0 / k as f64 - 1.0 / kp1) * (z.norm() / n);
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistRow {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub discrepancy: f64,
    /// `|normalized Weyl sum|` for each `k` in the experiment's `k_set`.
    pub weyl: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistTable {
    pub k_set: Vec<Vec<i64>>,
    pub boxes: usize,
    pub seed: u64,
    pub rows: Vec<EquidistRow>,
}

impl EquidistTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("P,N,discrepancy");
        for k in &self.k_set {
            let label: Vec<String> = k.iter().map(|v| v.to_string()).collect();
            write!(out, ",weyl_{}", label.join("_")).unwrap();
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{},{:.10}", r.p, r.n, r.discrepancy).unwrap();
            for w in &r.weyl {
                write!(out, ",{w:.10}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// For each `P`: the zero count, the discrepancy of `L(Z) mod 1` and the
/// normalized Weyl sums. Zeros are enumerated once at the largest `P`;
/// every row uses the same boxes.
pub fn equidist_experiment(
    c: &CubicForm,
    lsys: &LinearSystem,
    p_grid: &[f64],
    k_set: &[Vec<i64>],
    boxes: usize,
    seed: u64,
    strategy: Strategy,
) -> Result<EquidistTable> {
    Error::check_dim(c.n(), lsys.n())?;
    if p_grid.is_empty() {
        return Err(Error::InvalidInput("P grid is empty".into()));
    }
    for k in k_set {
        Error::check_dim(lsys.r(), k.len())?;
        if k.iter().all(|&v| v == 0) {
            return Err(Error::InvalidInput("frequency vector k must be nonzero".into()));
        }
    }
    let pmax = p_grid.iter().cloned().fold(f64::MIN, f64::max);
    let all = enumerate_zeros(c, pmax, strategy)?;
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let b = p.floor() as i64;
        let zeros: Vec<Vec<i64>> = all
            .iter()
            .filter(|x| x.iter().all(|v| v.abs() <= b))
            .cloned()
            .collect();
        if zeros.is_empty() {
            return Err(Error::EmptyZeroSet);
        }
        let disc = discrepancy(&fractional_parts(lsys, &zeros), boxes, seed)?;
        let weyl = k_set
            .iter()
            .map(|k| weyl_sum_over(lsys, &zeros, k, p).map(|w| w.abs_normalized()))
            .collect::<Result<Vec<_>>>()?;
        rows.push(EquidistRow {
            p,
            n: zeros.len() as u64,
            discrepancy: disc.value,
            weyl,
        });
    }
    Ok(EquidistTable {
        k_set: k_set.to_vec(),
        boxes,
        seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series() {
        let c = CubicForm::diagonal(&[1, 1]).unwrap();
        let l = LinearSystem::from_real_rows(vec![vec![2f64.sqrt(), 0.0]]).unwrap();
        let w = weyl_sum(&c, &l, &[1], 5.0, Strategy::Direct).unwrap();
        assert_eq!(w.n, 11);
        let s2 = 2f64.sqrt();
        let expect = ((11.0 * PI * s2).sin() / (PI * s2).sin()).abs();
        assert!((w.sum.re.hypot(w.sum.im) - expect).abs() < 1e-10);
        let m = weyl_sum(&c, &l, &[-1], 5.0, Strategy::Direct).unwrap();
        assert!((m.sum.re - w.sum.re).abs() < 1e-12 && (m.sum.im + w.sum.im).abs() < 1e-12);
        assert!(weyl_sum(&c, &l, &[0], 5.0, Strategy::Direct).is_err());
    }

    #[test]
    fn discrepancy_examples() {
        let single = vec![vec![0.3]; 50];
        assert!(discrepancy(&single, 100, 1).unwrap().value >= 0.49);
        let grid: Vec<Vec<f64>> = (0..100).map(|j| vec![j as f64 / 100.0]).collect();
        assert!(discrepancy(&grid, 500, 2).unwrap().value <= 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let iid: Vec<Vec<f64>> = (0..10_000).map(|_| vec![rng.gen()]).collect();
        assert!(discrepancy(&iid, 500, 4).unwrap().value <= 0.05);
    }
}
