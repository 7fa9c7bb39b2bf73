//! Certified bounds on the h-invariant.
//!
//! Upper bounds come from an explicit decomposition `C = sum A_i B_i` or
//! from a rational linear space of dimension `d` inside `{C = 0}`, which
//! gives `h <= n - d`. Lower bounds come from a binary restriction of `C`
//! with no rational linear factor (so `C` is not `A * B`, hence `h >= 2`),
//! and, for diagonal forms, from `sigma >= n - 2h` where `sigma` is the
//! dimension of the singular locus.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::cubic::CubicForm;
use super::decomp::{verify_h_decomposition, HDecomposition};
use crate::error::{Error, Result};

/// Parameters for the bounded searches behind `h_bounds`.
#[derive(Clone, Copy, Debug)]
pub struct SpaceSearch {
    /// Sup-norm bound on candidate integer vectors.
    pub height: i64,
    /// Cap on visited search nodes per dimension.
    pub max_nodes: usize,
    /// Cap on vector pairs tried for the irreducibility certificate.
    pub max_pairs: usize,
}

impl Default for SpaceSearch {
    fn default() -> Self {
        SpaceSearch {
            height: 2,
            max_nodes: 200_000,
            max_pairs: 20_000,
        }
    }
}

impl SpaceSearch {
    pub fn with_height(height: i64) -> Self {
        SpaceSearch {
            height,
            ..Default::default()
        }
    }
}

/// Six times the symmetric trilinear form attached to `C`.
fn polarize6(c: &CubicForm, u: &[i64], v: &[i64], w: &[i64]) -> BigInt {
    let add = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<i64>>();
    let e = |x: &[i64]| c.eval(x).expect("dimension checked by caller");
    let uv = add(u, v);
    let uw = add(u, w);
    let vw = add(v, w);
    let uvw = add(&uv, w);
    e(&uvw) - e(&uv) - e(&uw) - e(&vw) + e(u) + e(v) + e(w)
}

fn rank_exact(vs: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = vs
        .iter()
        .map(|v| v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[rank][col];
                for c2 in col..cols {
                    let t = &f * &m[rank][c2];
                    m[r][c2] -= t;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Primitive vectors with `|v| <= height`, first nonzero entry positive,
/// ordered by support size, then support, then lexicographically.
fn primitive_vectors(n: usize, height: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let side = (2 * height + 1) as usize;
    let total = side.checked_pow(n as u32).unwrap_or(usize::MAX);
    let mut v = vec![-height; n];
    for _ in 0..total {
        if let Some(first) = v.iter().find(|&&x| x != 0) {
            let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
            if *first > 0 && g == 1 {
                out.push(v.clone());
            }
        }
        for slot in v.iter_mut().rev() {
            if *slot < height {
                *slot += 1;
                break;
            }
            *slot = -height;
        }
    }
    out.sort_by(|a, b| {
        let sa: Vec<usize> = (0..n).filter(|&i| a[i] != 0).collect();
        let sb: Vec<usize> = (0..n).filter(|&i| b[i] != 0).collect();
        sa.len().cmp(&sb.len()).then_with(|| sa.cmp(&sb)).then_with(|| a.cmp(b))
    });
    out
}

/// Whether `C` vanishes identically on the real span of `vs`, by exact
/// symbolic expansion of `C(t_1 v_1 + ... + t_d v_d)`.
pub fn vanishes_on_span(c: &CubicForm, vs: &[Vec<i64>]) -> Result<bool> {
    Ok(c.substitute(vs)?.is_zero())
}

struct SpaceDfs<'a> {
    c: &'a CubicForm,
    cands: Vec<Vec<i64>>,
    target: usize,
    nodes: usize,
    max_nodes: usize,
}

impl SpaceDfs<'_> {
    fn extend(&mut self, chosen: &mut Vec<usize>, start: usize) -> bool {
        if chosen.len() == self.target {
            return true;
        }
        for idx in start..self.cands.len() {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return false;
            }
            let v = self.cands[idx].clone();
            let compatible = chosen.iter().enumerate().all(|(a, &ia)| {
                let s = &self.cands[ia];
                polarize6(self.c, &v, &v, s).is_zero()
                    && chosen[a..]
                        .iter()
                        .all(|&ib| polarize6(self.c, &v, s, &self.cands[ib]).is_zero())
            });
            if !compatible {
                continue;
            }
            let mut basis: Vec<Vec<i64>> = chosen.iter().map(|&i| self.cands[i].clone()).collect();
            basis.push(v);
            if rank_exact(&basis) < basis.len() {
                continue;
            }
            chosen.push(idx);
            if self.extend(chosen, idx + 1) {
                return true;
            }
            chosen.pop();
        }
        false
    }
}

/// Search for `d` independent integer vectors of height at most `height`
/// whose real span lies in `{C = 0}`. A hit certifies `h(C) <= n - d`;
/// a miss proves nothing.
pub fn find_rational_linear_space(c: &CubicForm, d: usize, height: i64) -> Option<Vec<Vec<i64>>> {
    find_rational_linear_space_with(c, d, &SpaceSearch::with_height(height))
}

pub fn find_rational_linear_space_with(
    c: &CubicForm,
    d: usize,
    search: &SpaceSearch,
) -> Option<Vec<Vec<i64>>> {
    let n = c.n();
    if d == 0 || d >= n || search.height < 1 {
        return None;
    }
    let cands: Vec<Vec<i64>> = primitive_vectors(n, search.height)
        .into_iter()
        .filter(|v| c.eval(v).map(|x| x.is_zero()).unwrap_or(false))
        .collect();
    let mut dfs = SpaceDfs {
        c,
        cands,
        target: d,
        nodes: 0,
        max_nodes: search.max_nodes,
    };
    let mut chosen = Vec::new();
    if !dfs.extend(&mut chosen, 0) {
        return None;
    }
    let basis: Vec<Vec<i64>> = chosen.iter().map(|&i| dfs.cands[i].clone()).collect();
    // Postcondition by the independent symbolic route.
    match vanishes_on_span(c, &basis) {
        Ok(true) => Some(basis),
        _ => None,
    }
}

fn ser_binary<S: serde::Serializer>(b: &[BigInt; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    b.iter().map(|v| v.to_string()).collect::<Vec<_>>().serialize(s)
}

/// Evidence for the lower end of an h-window.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LowerCertificate {
    /// `h >= 1` holds for every nonzero form.
    Trivial,
    /// `F(s, t) = C(s u + t v)` has `C(u) != 0` and `F(s, 1)` has no
    /// rational root, so `C` has no rational linear factor and `h >= 2`.
    NoRationalLinearFactor {
        u: Vec<i64>,
        v: Vec<i64>,
        /// Coefficients of `F(s, 1)` from `s^3` down to `s^0`.
        #[serde(serialize_with = "ser_binary")]
        binary: [BigInt; 4],
    },
    /// Diagonal form whose singular locus has affine dimension `sigma`;
    /// `sigma >= n - 2h` gives `h >= ceil((n - sigma) / 2)`.
    SingularLocus { sigma: usize },
}

/// Evidence for the upper end of an h-window.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum UpperCertificate {
    Dimension,
    Decomposition { pairs: usize },
    LinearSpace { basis: Vec<Vec<i64>> },
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HBounds {
    pub lower: usize,
    pub upper: usize,
    pub lower_certificate: LowerCertificate,
    pub upper_certificate: UpperCertificate,
}

impl HBounds {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

fn divisors(m: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d = 1u128;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            if d * d != m {
                out.push(m / d);
            }
        }
        d += 1;
    }
    out
}

/// Whether `a3 s^3 + a2 s^2 + a1 s + a0` (with `a3 != 0`) has a rational
/// root. `None` if the coefficients are too large for divisor enumeration.
fn has_rational_root(coeffs: &[BigInt; 4]) -> Option<bool> {
    let [a3, a2, a1, a0] = coeffs;
    if a0.is_zero() {
        return Some(true);
    }
    let lim = BigInt::from(1_000_000_000_000i64);
    if a0.abs() > lim || a3.abs() > lim {
        return None;
    }
    let p0 = a0.abs().to_u128()?;
    let q0 = a3.abs().to_u128()?;
    for p in divisors(p0) {
        for q in divisors(q0) {
            if (p as u64).gcd(&(q as u64)) != 1 {
                continue;
            }
            for sign in [1i64, -1] {
                let (p, q) = (BigInt::from(p) * sign, BigInt::from(q));
                // q^3 F(p/q) = a3 p^3 + a2 p^2 q + a1 p q^2 + a0 q^3
                let val = a3 * &p * &p * &p + a2 * &p * &p * &q + a1 * &p * &q * &q + a0 * &q * &q * &q;
                if val.is_zero() {
                    return Some(true);
                }
            }
        }
    }
    Some(false)
}

fn binary_restriction(c: &CubicForm, u: &[i64], v: &[i64]) -> [BigInt; 4] {
    let a3 = c.eval(u).expect("dimension");
    let a0 = c.eval(v).expect("dimension");
    let a2 = polarize6(c, u, u, v) / 2;
    let a1 = polarize6(c, u, v, v) / 2;
    [a3, a2, a1, a0]
}

/// Search for a binary restriction certifying that `C` has no rational
/// linear factor.
pub fn find_irreducibility_certificate(c: &CubicForm, max_pairs: usize) -> Option<LowerCertificate> {
    let n = c.n();
    if n < 2 {
        return None;
    }
    let vs = primitive_vectors(n, 1);
    let mut tried = 0usize;
    for u in &vs {
        if c.eval(u).map(|x| x.is_zero()).unwrap_or(true) {
            continue;
        }
        for v in &vs {
            if u == v || rank_exact(&[u.clone(), v.clone()]) < 2 {
                continue;
            }
            tried += 1;
            if tried > max_pairs {
                return None;
            }
            let binary = binary_restriction(c, u, v);
            if has_rational_root(&binary) == Some(false) {
                return Some(LowerCertificate::NoRationalLinearFactor {
                    u: u.clone(),
                    v: v.clone(),
                    binary,
                });
            }
        }
    }
    None
}

/// Re-check a lower certificate from scratch.
pub fn verify_lower_certificate(c: &CubicForm, cert: &LowerCertificate) -> bool {
    match cert {
        LowerCertificate::Trivial => true,
        LowerCertificate::NoRationalLinearFactor { u, v, binary } => {
            if u.len() != c.n() || v.len() != c.n() {
                return false;
            }
            // Recompute F(s, 1) at s = 0, 1, -1, 2 and compare.
            let at = |s: i64| {
                let x: Vec<i64> = u.iter().zip(v).map(|(a, b)| s * a + b).collect();
                c.eval(&x).expect("dimension")
            };
            let poly = |s: i64| {
                let s = BigInt::from(s);
                &binary[0] * &s * &s * &s + &binary[1] * &s * &s + &binary[2] * &s + &binary[3]
            };
            !binary[0].is_zero()
                && [0, 1, -1, 2].iter().all(|&s| at(s) == poly(s))
                && has_rational_root(binary) == Some(false)
        }
        LowerCertificate::SingularLocus { sigma } => c
            .diagonal_coeffs()
            .map(|d| d.iter().filter(|x| x.is_zero()).count() == *sigma)
            .unwrap_or(false),
    }
}

/// Dimension of the singular locus of a diagonal form: the number of
/// variables with zero coefficient.
pub fn diagonal_singular_dimension(c: &CubicForm) -> Option<usize> {
    c.diagonal_coeffs()
        .map(|d| d.iter().filter(|x| x.is_zero()).count())
}

/// Certified window `lower <= h(C) <= upper`.
pub fn h_bounds(c: &CubicForm, witness: Option<&HDecomposition>, search: &SpaceSearch) -> Result<HBounds> {
    let n = c.n();
    let mut upper = n;
    let mut upper_certificate = UpperCertificate::Dimension;
    if let Some(w) = witness {
        if !verify_h_decomposition(c, w) {
            return Err(Error::InvalidInput("h-decomposition witness does not verify".into()));
        }
        if w.len() < upper {
            upper = w.len();
            upper_certificate = UpperCertificate::Decomposition { pairs: w.len() };
        }
    }
    let mut best: Option<Vec<Vec<i64>>> = None;
    for d in 1..n {
        match find_rational_linear_space_with(c, d, search) {
            Some(basis) => best = Some(basis),
            None => break,
        }
    }
    if let Some(basis) = best {
        if n - basis.len() < upper {
            upper = n - basis.len();
            upper_certificate = UpperCertificate::LinearSpace { basis };
        }
    }

    let mut lower = 1;
    let mut lower_certificate = LowerCertificate::Trivial;
    if let Some(sigma) = diagonal_singular_dimension(c) {
        let bound = (n - sigma).div_ceil(2);
        if bound > lower {
            lower = bound;
            lower_certificate = LowerCertificate::SingularLocus { sigma };
        }
    }
    if lower < 2 {
        if let Some(cert) = find_irreducibility_certificate(c, search.max_pairs) {
            lower = 2;
            lower_certificate = cert;
        }
    }
    if lower > upper {
        return Err(Error::InconsistentBounds { lower, upper });
    }
    Ok(HBounds {
        lower,
        upper,
        lower_certificate,
        upper_certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::decomp::HPair;
    use std::collections::BTreeMap;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn taxicab_plane() {
        let c = CubicForm::diagonal(&[1, 1, -1, -1]).unwrap();
        let basis = find_rational_linear_space(&c, 2, 1).unwrap();
        assert_eq!(basis, vec![vec![1, -1, 0, 0], vec![0, 0, 1, -1]]);
        assert!(vanishes_on_span(&c, &basis).unwrap());
    }

    #[test]
    fn independent_variable_gives_line() {
        let c = CubicForm::new(2, [([0, 0, 0], BigInt::from(1))]).unwrap();
        assert_eq!(find_rational_linear_space(&c, 1, 1), Some(vec![vec![0, 1]]));
    }

    /// Oracle: every 2-dim rational subspace of Q^3 is the kernel of a
    /// primitive normal vector; for x^3+y^3+z^3 none lies in the surface.
    /// Check that no plane spanned by vectors of height <= 3 kills the form,
    /// by brute force over all pairs with C(u) = C(v) = 0.
    #[test]
    fn three_cubes_has_no_plane() {
        let c = CubicForm::diagonal(&[1, 1, 1]).unwrap();
        assert_eq!(find_rational_linear_space(&c, 2, 3), None);
        let zeros: Vec<Vec<i64>> = primitive_vectors(3, 3)
            .into_iter()
            .filter(|v| c.eval(v).unwrap().is_zero())
            .collect();
        for (i, u) in zeros.iter().enumerate() {
            for v in &zeros[i + 1..] {
                if rank_exact(&[u.clone(), v.clone()]) == 2 {
                    assert!(!vanishes_on_span(&c, &[u.clone(), v.clone()]).unwrap());
                }
            }
        }
        assert_eq!(find_rational_linear_space(&c, 1, 3), Some(vec![vec![1, -1, 0]]));
    }

    #[test]
    fn taxicab_bounds_are_exact() {
        let c = CubicForm::diagonal(&[1, 1, -1, -1]).unwrap();
        let b = h_bounds(&c, None, &SpaceSearch::with_height(1)).unwrap();
        assert_eq!((b.lower, b.upper), (2, 2));
        assert!(b.is_exact());
        assert!(verify_lower_certificate(&c, &b.lower_certificate));
    }

    #[test]
    fn taxicab_has_no_rational_linear_factor() {
        let c = CubicForm::diagonal(&[1, 1, -1, -1]).unwrap();
        let cert = find_irreducibility_certificate(&c, 100_000).unwrap();
        assert!(verify_lower_certificate(&c, &cert));
    }

    #[test]
    fn single_variable_cube() {
        let c = CubicForm::diagonal(&[1]).unwrap();
        let b = h_bounds(&c, None, &SpaceSearch::default()).unwrap();
        assert_eq!((b.lower, b.upper), (1, 1));
    }

    #[test]
    fn three_cubes_window_contains_two() {
        let c = CubicForm::diagonal(&[1, 1, 1]).unwrap();
        let pairs = (0..3)
            .map(|i| {
                let mut lin = vec![q(0); 3];
                lin[i] = q(1);
                let mut quad = BTreeMap::new();
                quad.insert((i, i), q(1));
                HPair::new(lin, quad)
            })
            .collect();
        let w = HDecomposition::new(pairs);
        let b = h_bounds(&c, Some(&w), &SpaceSearch::with_height(3)).unwrap();
        assert!(b.lower <= 2 && 2 <= b.upper);
        assert_eq!((b.lower, b.upper), (2, 2));
        assert!(matches!(b.upper_certificate, UpperCertificate::LinearSpace { .. }));
    }

    #[test]
    fn reducible_form_has_no_irreducibility_certificate() {
        // x0 * (x0^2 + x1^2 + x2^2) has a rational linear factor.
        let c = CubicForm::new(
            3,
            [
                ([0, 0, 0], BigInt::from(1)),
                ([0, 1, 1], BigInt::from(1)),
                ([0, 2, 2], BigInt::from(1)),
            ],
        )
        .unwrap();
        assert_eq!(find_irreducibility_certificate(&c, 100_000), None);
        let b = h_bounds(&c, None, &SpaceSearch::with_height(1)).unwrap();
        assert_eq!((b.lower, b.upper), (1, 1));
    }

    #[test]
    fn bad_witness_is_rejected() {
        let c = CubicForm::diagonal(&[1, 1]).unwrap();
        let w = HDecomposition::new(vec![HPair::new(vec![q(1), q(0)], BTreeMap::new())]);
        assert!(h_bounds(&c, Some(&w), &SpaceSearch::default()).is_err());
    }

    #[test]
    fn rational_root_detection() {
        let b = |v: [i64; 4]| v.map(BigInt::from);
        assert_eq!(has_rational_root(&b([2, 0, 0, -1])), Some(false));
        assert_eq!(has_rational_root(&b([2, 0, 0, -16])), Some(true));
        assert_eq!(has_rational_root(&b([6, -5, -2, 1])), Some(true)); // roots 1, 1/2, -1/3
        assert_eq!(has_rational_root(&b([1, 0, 1, 1])), Some(false));
    }
}
