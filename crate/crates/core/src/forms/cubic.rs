use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::Poly;
use crate::error::{Error, Result};

/// A cubic form in `n` variables with integer coefficients.
///
/// Monomials are keyed by sorted zero-based index triples `[i, j, k]` with
/// `i <= j <= k`; the coefficient of `x_i x_j x_k` is stored once. Zero
/// coefficients are never stored and at least one coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicForm {
    n: usize,
    coeffs: BTreeMap<[usize; 3], BigInt>,
}

fn sorted(mut idx: [usize; 3]) -> [usize; 3] {
    idx.sort_unstable();
    idx
}

impl CubicForm {
    /// Build a form from `(index triple, coefficient)` terms. Triples may
    /// come in any order; repeated monomials are summed.
    pub fn new<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = ([usize; 3], BigInt)>,
    {
        if n == 0 {
            return Err(Error::InvalidInput("a cubic form needs n >= 1".into()));
        }
        let mut coeffs: BTreeMap<[usize; 3], BigInt> = BTreeMap::new();
        for (idx, c) in terms {
            if idx.iter().any(|&i| i >= n) {
                return Err(Error::InvalidInput(format!(
                    "monomial index {idx:?} out of range for n = {n}"
                )));
            }
            *coeffs.entry(sorted(idx)).or_insert_with(BigInt::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "a cubic form needs at least one nonzero coefficient".into(),
            ));
        }
        Ok(CubicForm { n, coeffs })
    }

    /// Clear denominators of a rational form. Returns the integer form and
    /// the positive factor it was multiplied by.
    pub fn from_rational<I>(n: usize, terms: I) -> Result<(Self, BigInt)>
    where
        I: IntoIterator<Item = ([usize; 3], BigRational)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let scale = terms
            .iter()
            .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let ints = terms.into_iter().map(|(idx, c)| {
            let v = c * BigRational::from_integer(scale.clone());
            (idx, v.to_integer())
        });
        Ok((CubicForm::new(n, ints)?, scale))
    }

    /// `sum_i coeffs[i] * x_i^3`.
    pub fn diagonal(coeffs: &[i64]) -> Result<Self> {
        CubicForm::new(
            coeffs.len(),
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| ([i, i, i], BigInt::from(c))),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize; 3], &BigInt)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, idx: [usize; 3]) -> BigInt {
        self.coeffs
            .get(&sorted(idx))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Exact value at an integer point.
    pub fn eval(&self, x: &[i64]) -> Result<BigInt> {
        Error::check_dim(self.n, x.len())?;
        let mut acc = BigInt::zero();
        for (&[i, j, k], c) in &self.coeffs {
            acc += c * (BigInt::from(x[i]) * x[j] * x[k]);
        }
        Ok(acc)
    }

    /// Exact gradient at an integer point.
    pub fn grad(&self, x: &[i64]) -> Result<Vec<BigInt>> {
        Error::check_dim(self.n, x.len())?;
        let mut g = vec![BigInt::zero(); self.n];
        for (&idx, c) in &self.coeffs {
            // d/dx_m of x_i x_j x_k: drop one occurrence of m per position.
            for pos in 0..3 {
                let m = idx[pos];
                if pos > 0 && idx[pos - 1] == m {
                    continue;
                }
                let mult = idx.iter().filter(|&&v| v == m).count() as i64;
                let mut rest = BigInt::from(mult);
                let mut dropped = false;
                for &v in &idx {
                    if v == m && !dropped {
                        dropped = true;
                    } else {
                        rest *= x[v];
                    }
                }
                g[m] += c * rest;
            }
        }
        Ok(g)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        self.coeffs
            .iter()
            .map(|(&[i, j, k], c)| c.to_f64().unwrap_or(f64::NAN) * x[i] * x[j] * x[k])
            .sum()
    }

    /// The form as a polynomial with rational coefficients.
    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::zero(self.n);
        for (&idx, c) in &self.coeffs {
            let mut exps = vec![0u32; self.n];
            for &i in &idx {
                exps[i] += 1;
            }
            p.add_term(exps, BigRational::from_integer(c.clone()));
        }
        p
    }

    /// Compose with the linear substitution `x = sum_j t_j v_j`, giving a
    /// cubic polynomial in the `t` variables.
    pub fn substitute(&self, vs: &[Vec<i64>]) -> Result<Poly> {
        for v in vs {
            Error::check_dim(self.n, v.len())?;
        }
        let d = vs.len();
        let coords: Vec<Poly> = (0..self.n)
            .map(|i| {
                let cs: Vec<BigRational> = vs
                    .iter()
                    .map(|v| BigRational::from_integer(BigInt::from(v[i])))
                    .collect();
                if d == 0 {
                    Poly::zero(0)
                } else {
                    Poly::linear(&cs)
                }
            })
            .collect();
        let mut out = Poly::zero(d);
        for (&[i, j, k], c) in &self.coeffs {
            let term = coords[i].mul(&coords[j]).mul(&coords[k]);
            out = out.add(&term.scale(&BigRational::from_integer(c.clone())));
        }
        Ok(out)
    }

    /// Diagonal coefficients if the form is `sum c_i x_i^3`.
    pub fn diagonal_coeffs(&self) -> Option<Vec<BigInt>> {
        let mut out = vec![BigInt::zero(); self.n];
        for (&[i, j, k], c) in &self.coeffs {
            if i != j || j != k {
                return None;
            }
            out[i] = c.clone();
        }
        Some(out)
    }

    /// Connected components of the graph joining variables that share a
    /// monomial. The form is additive across components. Variables that do
    /// not occur form singleton components.
    pub fn additive_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for &[i, j, k] in self.coeffs.keys() {
            for (a, b) in [(i, j), (j, k)] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    /// Restrict to a subset of variables (others set to zero), reindexed.
    pub fn restrict(&self, vars: &[usize]) -> Option<CubicForm> {
        let pos: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let terms: Vec<_> = self
            .coeffs
            .iter()
            .filter_map(|(idx, c)| {
                let mapped: Option<Vec<usize>> = idx.iter().map(|i| pos.get(i).copied()).collect();
                mapped.map(|m| ([m[0], m[1], m[2]], c.clone()))
            })
            .collect();
        CubicForm::new(vars.len(), terms).ok()
    }

    /// Fast evaluator for hot enumeration loops.
    pub fn compile(&self) -> CompiledCubic {
        let terms = self
            .coeffs
            .iter()
            .map(|(&idx, c)| (idx, c.to_i128()))
            .collect::<Vec<_>>();
        let exact = terms.iter().all(|(_, c)| c.is_some());
        CompiledCubic {
            n: self.n,
            terms: terms
                .into_iter()
                .map(|(idx, c)| (idx, c.unwrap_or(0)))
                .collect(),
            exact,
            max_abs: self.max_abs_coeff().to_f64().unwrap_or(f64::INFINITY),
        }
    }
}

/// Cubic form with machine-integer coefficients for inner loops.
#[derive(Clone, Debug)]
pub struct CompiledCubic {
    n: usize,
    terms: Vec<([usize; 3], i128)>,
    exact: bool,
    max_abs: f64,
}

impl CompiledCubic {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether `eval_i128` is exact for every point with `|x| <= bound`.
    pub fn fits(&self, bound: i64) -> bool {
        let b = bound.unsigned_abs() as f64;
        self.exact && self.max_abs * (self.terms.len() as f64) * b * b * b < 1.0e36
    }

    /// Value at `x`; exact when `fits(|x|)` holds.
    #[inline]
    pub fn eval_i128(&self, x: &[i64]) -> i128 {
        let mut acc = 0i128;
        for &([i, j, k], c) in &self.terms {
            acc += c * (x[i] as i128) * (x[j] as i128) * (x[k] as i128);
        }
        acc
    }

    /// Value reduced into `[0, m)`, for `m < 2^62` and `x` already reduced.
    #[inline]
    pub fn eval_mod(&self, x: &[u64], m: u64) -> u64 {
        let m128 = m as i128;
        let mut acc: i128 = 0;
        for &([i, j, k], c) in &self.terms {
            let c = c.rem_euclid(m128);
            let t = (x[i] as i128 * x[j] as i128) % m128;
            let t = (t * x[k] as i128) % m128;
            acc = (acc + c * t) % m128;
        }
        acc as u64
    }

    pub fn coefficients_exact(&self) -> bool {
        self.exact
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn taxicab_zero() {
        let c = CubicForm::diagonal(&[1, 1, -1, -1]).unwrap();
        assert_eq!(c.eval(&[1, 12, 9, 10]).unwrap(), BigInt::zero());
        assert_eq!(c.eval(&[0, 0, 0, 0]).unwrap(), BigInt::zero());
    }

    #[test]
    fn sum_of_three_cubes() {
        let c = CubicForm::diagonal(&[1, 1, 1]).unwrap();
        assert_eq!(c.eval(&[1, 2, 3]).unwrap(), BigInt::from(36));
    }

    #[test]
    fn gradients() {
        let c = CubicForm::diagonal(&[1, 1]).unwrap();
        assert_eq!(c.grad(&[1, 2]).unwrap(), big(&[3, 12]));
        assert_eq!(c.grad(&[0, 0]).unwrap(), big(&[0, 0]));
        // x1^2 x2
        let c = CubicForm::new(2, [([0, 0, 1], BigInt::from(1))]).unwrap();
        assert_eq!(c.grad(&[1, 1]).unwrap(), big(&[2, 1]));
        // x1 x2 x3 at (2,3,5)
        let c = CubicForm::new(3, [([2, 0, 1], BigInt::from(1))]).unwrap();
        assert_eq!(c.grad(&[2, 3, 5]).unwrap(), big(&[15, 10, 6]));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let c = CubicForm::diagonal(&[1, 1]).unwrap();
        assert!(matches!(c.eval(&[1]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(c.grad(&[1, 2, 3]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_form_rejected() {
        assert!(CubicForm::new(2, [([0, 0, 1], BigInt::from(1)), ([1, 0, 0], BigInt::from(-1))]).is_err());
        assert!(CubicForm::new(0, std::iter::empty()).is_err());
    }

    #[test]
    fn rational_ingestion_clears_denominators() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let third = BigRational::new(BigInt::from(-1), BigInt::from(3));
        let (c, scale) = CubicForm::from_rational(2, [([0, 0, 0], half), ([1, 1, 1], third)]).unwrap();
        assert_eq!(scale, BigInt::from(6));
        assert_eq!(c.coeff([0, 0, 0]), BigInt::from(3));
        assert_eq!(c.coeff([1, 1, 1]), BigInt::from(-2));
    }

    #[test]
    fn additive_components_of_mixed_form() {
        // x0^3 + x1^2 x2 + x3^3
        let c = CubicForm::new(
            4,
            [
                ([0, 0, 0], BigInt::from(1)),
                ([1, 1, 2], BigInt::from(1)),
                ([3, 3, 3], BigInt::from(1)),
            ],
        )
        .unwrap();
        assert_eq!(c.additive_components(), vec![vec![0], vec![1, 2], vec![3]]);
    }

    #[test]
    fn compiled_matches_exact() {
        let c = CubicForm::new(
            3,
            [
                ([0, 1, 2], BigInt::from(7)),
                ([0, 0, 0], BigInt::from(-3)),
                ([1, 1, 2], BigInt::from(2)),
            ],
        )
        .unwrap();
        let cc = c.compile();
        assert!(cc.fits(100));
        for x in [[1, 2, 3], [-4, 5, 9], [10, -10, 7]] {
            assert_eq!(BigInt::from(cc.eval_i128(&x)), c.eval(&x).unwrap());
            let m = 13u64;
            let xr: Vec<u64> = x.iter().map(|v| v.rem_euclid(13) as u64).collect();
            let expect = c.eval(&x).unwrap().mod_floor(&BigInt::from(13));
            assert_eq!(BigInt::from(cc.eval_mod(&xr, m)), expect);
        }
    }
}
