use std::collections::BTreeMap;

use num_rational::BigRational;

use super::cubic::CubicForm;
use super::poly::Poly;
use crate::error::{Error, Result};

/// One summand `A(x) * B(x)` of an h-decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct HPair {
    /// Rational linear form `A`.
    pub linear: Vec<BigRational>,
    /// Rational quadratic form `B`, keyed by sorted index pairs `(i, j)`.
    pub quadratic: BTreeMap<(usize, usize), BigRational>,
}

impl HPair {
    pub fn new(linear: Vec<BigRational>, quadratic: BTreeMap<(usize, usize), BigRational>) -> Self {
        let quadratic = quadratic
            .into_iter()
            .fold(BTreeMap::new(), |mut acc: BTreeMap<(usize, usize), BigRational>, ((i, j), c)| {
                let key = (i.min(j), i.max(j));
                let e = acc.entry(key).or_insert_with(|| BigRational::from_integer(0.into()));
                *e += c;
                acc
            });
        HPair { linear, quadratic }
    }

    pub fn n(&self) -> usize {
        self.linear.len()
    }

    /// `a (x_i + x_j)(x_i^2 - x_i x_j + x_j^2) = a x_i^3 + a x_j^3`.
    pub fn two_cubes(n: usize, i: usize, j: usize, a: i64) -> Self {
        let q = |v: i64| BigRational::from_integer(v.into());
        let mut linear = vec![q(0); n];
        linear[i] = q(1);
        linear[j] = q(1);
        let quadratic = [((i, i), a), ((i, j), -a), ((j, j), a)]
            .into_iter()
            .map(|(k, v)| (k, q(v)))
            .collect();
        HPair::new(linear, quadratic)
    }

    fn quadratic_poly(&self) -> Poly {
        let n = self.n();
        let mut p = Poly::zero(n);
        for (&(i, j), c) in &self.quadratic {
            let mut e = vec![0u32; n];
            e[i] += 1;
            e[j] += 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn product(&self) -> Poly {
        Poly::linear(&self.linear).mul(&self.quadratic_poly())
    }
}

/// A witness `C = A_1 B_1 + ... + A_h B_h` bounding `h(C) <= h`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct HDecomposition {
    pub pairs: Vec<HPair>,
}

impl HDecomposition {
    pub fn new(pairs: Vec<HPair>) -> Self {
        HDecomposition { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn expand(&self, n: usize) -> Result<Poly> {
        let mut acc = Poly::zero(n);
        for pair in &self.pairs {
            Error::check_dim(n, pair.n())?;
            if pair.quadratic.keys().any(|&(_, j)| j >= n) {
                return Err(Error::InvalidInput("quadratic index out of range".into()));
            }
            acc = acc.add(&pair.product());
        }
        Ok(acc)
    }
}

/// Whether `C - sum A_i B_i` is the zero polynomial.
pub fn verify_h_decomposition(c: &CubicForm, d: &HDecomposition) -> bool {
    match d.expand(c.n()) {
        Ok(p) => c.to_poly().sub(&p).is_zero(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn quad(terms: &[((usize, usize), i64)]) -> BTreeMap<(usize, usize), BigRational> {
        terms.iter().map(|&(k, v)| (k, q(v))).collect()
    }

    pub(crate) fn taxicab_witness() -> HDecomposition {
        HDecomposition::new(vec![
            HPair::new(
                vec![q(1), q(1), q(0), q(0)],
                quad(&[((0, 0), 1), ((0, 1), -1), ((1, 1), 1)]),
            ),
            HPair::new(
                vec![q(0), q(0), q(-1), q(-1)],
                quad(&[((2, 2), 1), ((2, 3), -1), ((3, 3), 1)]),
            ),
        ])
    }

    #[test]
    fn taxicab_decomposition_verifies() {
        let c = CubicForm::diagonal(&[1, 1, -1, -1]).unwrap();
        assert!(verify_h_decomposition(&c, &taxicab_witness()));
    }

    #[test]
    fn wrong_sign_in_second_quadratic_fails() {
        let c = CubicForm::diagonal(&[1, 1, -1, -1]).unwrap();
        let mut d = taxicab_witness();
        d.pairs[1].quadratic.insert((2, 3), q(1));
        assert!(!verify_h_decomposition(&c, &d));
    }

    #[test]
    fn two_cubes_matches_witness() {
        let d = HDecomposition::new(vec![HPair::two_cubes(4, 0, 1, 1), HPair::two_cubes(4, 2, 3, -1)]);
        let c = CubicForm::diagonal(&[1, 1, -1, -1]).unwrap();
        assert!(verify_h_decomposition(&c, &d));
        assert_eq!(d.expand(4).unwrap(), taxicab_witness().expand(4).unwrap());
    }

    #[test]
    fn single_cube() {
        let c = CubicForm::diagonal(&[1]).unwrap();
        let d = HDecomposition::new(vec![HPair::new(vec![q(1)], quad(&[((0, 0), 1)]))]);
        assert!(verify_h_decomposition(&c, &d));
    }

    #[test]
    fn permutation_and_rescaling_invariance() {
        let c = CubicForm::diagonal(&[1, 1, -1, -1]).unwrap();
        let mut d = taxicab_witness();
        d.pairs.reverse();
        assert!(verify_h_decomposition(&c, &d));
        let s = BigRational::new(BigInt::from(-3), BigInt::from(7));
        let pair = &mut d.pairs[0];
        pair.linear.iter_mut().for_each(|a| *a = &*a * &s);
        pair.quadratic.values_mut().for_each(|b| *b = &*b / &s);
        assert!(verify_h_decomposition(&c, &d));
    }

    #[test]
    fn dimension_mismatch_does_not_verify() {
        let c = CubicForm::diagonal(&[1, 1]).unwrap();
        let d = HDecomposition::new(vec![HPair::new(vec![q(1)], quad(&[((0, 0), 1)]))]);
        assert!(!verify_h_decomposition(&c, &d));
    }
}
