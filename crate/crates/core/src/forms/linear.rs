use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficients of a linear form, either exact rationals or reals.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearForm {
    Rational(Vec<BigRational>),
    Real(Vec<f64>),
}

impl LinearForm {
    pub fn n(&self) -> usize {
        match self {
            LinearForm::Rational(c) => c.len(),
            LinearForm::Real(c) => c.len(),
        }
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        match self {
            LinearForm::Rational(c) => c.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect(),
            LinearForm::Real(c) => c.clone(),
        }
    }

    /// Exact value when the coefficients are rational.
    pub fn eval_exact(&self, x: &[i64]) -> Option<BigRational> {
        match self {
            LinearForm::Rational(c) => Some(
                c.iter()
                    .zip(x)
                    .map(|(a, &xi)| a * BigRational::from_integer(BigInt::from(xi)))
                    .fold(BigRational::zero(), |acc, t| acc + t),
            ),
            LinearForm::Real(_) => None,
        }
    }

    pub fn eval(&self, x: &[i64]) -> f64 {
        match self {
            LinearForm::Rational(_) => self
                .eval_exact(x)
                .and_then(|v| v.to_f64())
                .unwrap_or(f64::NAN),
            LinearForm::Real(c) => c.iter().zip(x).map(|(a, &xi)| a * xi as f64).sum(),
        }
    }
}

/// `r` linear forms in `n` variables, rows of the coefficient matrix.
///
/// `assume_irrational` records the (unverifiable) hypothesis that no
/// nonzero real combination of the rows is a rational form.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    n: usize,
    rows: Vec<LinearForm>,
    assume_irrational: bool,
}

impl LinearSystem {
    pub fn new(n: usize, rows: Vec<LinearForm>, assume_irrational: bool) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("a linear system needs r >= 1 rows".into()));
        }
        if rows.len() >= n {
            return Err(Error::InvalidInput(format!(
                "a linear system needs r < n, got r = {}, n = {n}",
                rows.len()
            )));
        }
        for row in &rows {
            Error::check_dim(n, row.n())?;
        }
        let sys = LinearSystem {
            n,
            rows,
            assume_irrational,
        };
        let rank = numeric_rank(&sys.matrix());
        if rank < sys.r() {
            return Err(Error::InvalidInput(format!(
                "linear forms are not independent: rank {rank} < r = {}",
                sys.r()
            )));
        }
        Ok(sys)
    }

    /// Real rows, assumed irrational.
    pub fn from_real_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.first().map(|r| r.len()).unwrap_or(0);
        LinearSystem::new(n, rows.into_iter().map(LinearForm::Real).collect(), true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[LinearForm] {
        &self.rows
    }

    pub fn assume_irrational(&self) -> bool {
        self.assume_irrational
    }

    /// Coefficient matrix, `r` rows of length `n`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.coeffs_f64()).collect()
    }

    /// `(L_1(x), ..., L_r(x))`.
    pub fn eval(&self, x: &[i64]) -> Result<Vec<f64>> {
        Error::check_dim(self.n, x.len())?;
        Ok(self.rows.iter().map(|r| r.eval(x)).collect())
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.coeffs_f64().iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `lambda = alpha . rows`, the coefficient vector of `alpha . L`.
    pub fn combine(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.r(), alpha.len())?;
        let m = self.matrix();
        Ok((0..self.n)
            .map(|j| m.iter().zip(alpha).map(|(row, a)| a * row[j]).sum())
            .collect())
    }
}

/// Rank by Gaussian elimination with partial pivoting and a relative
/// tolerance.
pub fn numeric_rank(m: &[Vec<f64>]) -> usize {
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |s, v| s.max(v.abs()));
    let tol = 1e-10 * scale.max(1e-300);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let piv = (rank..rows)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col].abs() <= tol {
            continue;
        }
        a.swap(rank, piv);
        for r in rank + 1..rows {
            let f = a[r][col] / a[rank][col];
            for c in col..cols {
                a[r][c] -= f * a[rank][c];
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rows_select_coordinates() {
        let sys = LinearSystem::from_real_rows(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(sys.eval(&[4, -7, 9]).unwrap(), vec![4.0, -7.0]);
        assert_eq!(sys.eval(&[0, 0, 0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn sqrt2_plus_sqrt3() {
        let sys = LinearSystem::from_real_rows(vec![vec![2f64.sqrt(), 3f64.sqrt()]]).unwrap();
        let v = sys.eval(&[1, 1]).unwrap()[0];
        assert!((v - 3.146_264_369_941_972).abs() < 1e-14);
    }

    #[test]
    fn rational_rows_are_exact() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let row = LinearForm::Rational(vec![third.clone(), third]);
        assert_eq!(
            row.eval_exact(&[1, 2]).unwrap(),
            BigRational::from_integer(BigInt::from(1))
        );
        assert_eq!(row.eval(&[1, 2]), 1.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(LinearSystem::from_real_rows(vec![vec![1.0]]).is_err());
        assert!(LinearSystem::from_real_rows(vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).is_err());
        let sys = LinearSystem::from_real_rows(vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(sys.eval(&[1]), Err(Error::DimensionMismatch { .. })));
    }
}
