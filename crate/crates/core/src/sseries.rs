//! The singular series: exact local densities, exact per-modulus terms via
//! Ramanujan sums, truncated partial sums, and nonsingular p-adic zero
//! certificates.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::{is_prime, ramanujan_sum};
use crate::error::{Error, Result};
use crate::expsums::{sbound_check, ModCubic, COMPLETE_SUM_BUDGET};
use crate::forms::{h_bounds, CubicForm, SpaceSearch};

/// Work cap for exhaustive residue enumeration.
pub const LOCAL_BUDGET: f64 = 1.0e8;

fn ser_rational<S: Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::forms::io::format_rational(v))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalDensity {
    pub p: u64,
    pub k: u32,
    /// Number of solutions of `C(x) = 0 mod p^k`.
    pub count: u64,
    #[serde(serialize_with = "ser_rational")]
    pub sigma: BigRational,
}

fn pow_rational(p: u64, e: i64) -> BigRational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// `p^(-k(n-1)) #{x mod p^k : C(x) = 0 mod p^k}`.
///
/// Solutions are counted level by level: only zeros modulo `p^j` are lifted
/// to `p^(j+1)`.
pub fn local_density(c: &CubicForm, p: u64, k: u32) -> Result<LocalDensity> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if k == 0 {
        return Err(Error::InvalidInput("depth k must be at least 1".into()));
    }
    let n = c.n();
    let pn = (p as f64).powi(n as i32);
    if pn > LOCAL_BUDGET || (p as f64).powi(k as i32) > 1e15 {
        return Err(Error::resource("local density residues", pn, LOCAL_BUDGET));
    }
    let mods: Vec<ModCubic> = (1..=k).map(|j| ModCubic::new(c, p.pow(j))).collect();
    let work = AtomicU64::new(0);
    let base = ModCubic::new(c, p);
    let roots: Vec<Vec<u64>> = {
        let mut v = Vec::new();
        base.for_each_in_range(0, pn as u64, |y| {
            if base.eval(y) == 0 {
                v.push(y.to_vec());
            }
        });
        v
    };
    let count: Result<u64> = roots
        .par_iter()
        .map(|r| lift_count(&mods, p, 1, r, &work))
        .try_reduce(|| 0, |a, b| Ok(a + b));
    let count = count?;
    let sigma = BigRational::from_integer(BigInt::from(count)) * pow_rational(p, -(k as i64) * (n as i64 - 1));
    Ok(LocalDensity { p, k, count, sigma })
}

fn lift_count(mods: &[ModCubic], p: u64, level: u32, x: &[u64], work: &AtomicU64) -> Result<u64> {
    if level as usize == mods.len() {
        return Ok(1);
    }
    let n = x.len();
    let step = p.pow(level);
    let m = &mods[level as usize];
    let lifts = (p as f64).powi(n as i32) as u64;
    let done = work.fetch_add(lifts, Ordering::Relaxed) + lifts;
    if done as f64 > LOCAL_BUDGET {
        return Err(Error::resource("local density lifts", done as f64, LOCAL_BUDGET));
    }
    let mut total = 0;
    let mut y = x.to_vec();
    let mut d = vec![0u64; n];
    for _ in 0..lifts {
        for i in 0..n {
            y[i] = x[i] + step * d[i];
        }
        if m.eval(&y) == 0 {
            total += lift_count(mods, p, level + 1, &y, work)?;
        }
        for i in (0..n).rev() {
            d[i] += 1;
            if d[i] < p {
                break;
            }
            d[i] = 0;
        }
    }
    Ok(total)
}

/// `H[m] = #{x mod q : C(x) = m mod q}`.
pub fn value_histogram(c: &CubicForm, q: u64) -> Result<Vec<u64>> {
    let m = ModCubic::new(c, q);
    let total = m.size();
    if total > LOCAL_BUDGET {
        return Err(Error::resource("histogram residues", total, LOCAL_BUDGET));
    }
    let count = total as u64;
    let block = 1u64 << 14;
    let blocks = count.div_ceil(block);
    Ok((0..blocks)
        .into_par_iter()
        .fold(
            || vec![0u64; q as usize],
            |mut h, b| {
                let start = b * block;
                m.for_each_in_range(start, (start + block).min(count), |y| h[m.eval(y) as usize] += 1);
                h
            },
        )
        .reduce(
            || vec![0u64; q as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        ))
}

/// `A(q) = q^(-n) sum_{(a,q)=1} S_{q,a,0}`, exactly, as
/// `q^(-n) sum_m H[m] c_q(m)`.
pub fn series_term_exact(c: &CubicForm, q: u64) -> Result<BigRational> {
    let h = value_histogram(c, q)?;
    Ok(term_from_histogram(&h, q, c.n()))
}

fn term_from_histogram(h: &[u64], q: u64, n: usize) -> BigRational {
    let mut s = BigInt::zero();
    for (m, &cnt) in h.iter().enumerate() {
        if cnt != 0 {
            s += BigInt::from(cnt) * BigInt::from(ramanujan_sum(q, m as u64));
        }
    }
    BigRational::new(s, BigInt::from(q).pow(n as u32))
}

/// Floating evaluation of the same term from the histogram and explicit
/// roots of unity, without using the Ramanujan-sum identity.
fn term_float_from_histogram(h: &[u64], q: u64, n: usize) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for a in 1..=q {
        if a.gcd(&q) != 1 {
            continue;
        }
        for (m, &cnt) in h.iter().enumerate() {
            if cnt != 0 {
                s += crate::expsums::e(((a * m as u64) % q) as f64 / q as f64) * cnt as f64;
            }
        }
    }
    s / (q as f64).powi(n as i32)
}

/// `sum_{j=0}^{k} A(p^j)`, exact.
pub fn local_factor_via_sums(c: &CubicForm, p: u64, k: u32) -> Result<BigRational> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let mut total = BigRational::one();
    for j in 1..=k {
        total += series_term_exact(c, p.pow(j))?;
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesTerm {
    pub q: u64,
    pub value: f64,
    pub imag: f64,
    #[serde(serialize_with = "ser_rational")]
    pub exact: BigRational,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncatedSeries {
    pub big_q: u64,
    pub partial_sum: f64,
    #[serde(serialize_with = "ser_rational")]
    pub partial_exact: BigRational,
    pub terms: Vec<SeriesTerm>,
}

/// Partial sum of the singular series over `q <= Q`.
pub fn singular_series_truncated(c: &CubicForm, big_q: u64) -> Result<TruncatedSeries> {
    if big_q == 0 {
        return Err(Error::InvalidInput("Q must be at least 1".into()));
    }
    let n = c.n();
    let work: f64 = (1..=big_q).map(|q| (q as f64).powi(n as i32)).sum();
    if work > 10.0 * LOCAL_BUDGET {
        return Err(Error::resource("singular series residues", work, 10.0 * LOCAL_BUDGET));
    }
    let terms = (1..=big_q)
        .map(|q| {
            let h = value_histogram(c, q)?;
            let exact = term_from_histogram(&h, q, n);
            let float = term_float_from_histogram(&h, q, n);
            if float.im.abs() > 1e-9 {
                return Err(Error::ToleranceNotMet(format!(
                    "q = {q} term has imaginary part {:.3e}",
                    float.im
                )));
            }
            Ok(SeriesTerm {
                q,
                value: float.re,
                imag: float.im,
                exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let partial_exact = terms.iter().fold(BigRational::zero(), |s, t| s + &t.exact);
    Ok(TruncatedSeries {
        big_q,
        partial_sum: terms.iter().map(|t| t.value).sum(),
        partial_exact,
        terms,
    })
}

/// Comparison of a partial sum with the product of local factors over
/// primes `p <= Q`, each to the largest depth with `p^k <= Q`.
#[derive(Clone, Debug, Serialize)]
pub struct EulerComparison {
    #[serde(serialize_with = "ser_rational")]
    pub partial: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub product: BigRational,
    /// `product - partial`: the terms of the expanded product with `q > Q`.
    #[serde(serialize_with = "ser_rational")]
    pub mismatch: BigRational,
    /// `prod_p sum_j |A(p^j)| - sum_{q <= Q} |A(q)|`, bounding `|mismatch|`.
    #[serde(serialize_with = "ser_rational")]
    pub mismatch_bound: BigRational,
}

pub fn euler_product_comparison(c: &CubicForm, big_q: u64) -> Result<EulerComparison> {
    let series = singular_series_truncated(c, big_q)?;
    let mut product = BigRational::one();
    let mut abs_product = BigRational::one();
    for p in (2..=big_q).filter(|&p| is_prime(p)) {
        let mut k = 0;
        while p.pow(k + 1) <= big_q {
            k += 1;
        }
        let mut f = BigRational::one();
        let mut fa = BigRational::one();
        for j in 1..=k {
            let t = &series.terms[(p.pow(j) - 1) as usize].exact;
            f += t;
            fa += t.abs();
        }
        product *= f;
        abs_product *= fa;
    }
    let abs_partial = series.terms.iter().fold(BigRational::zero(), |s, t| s + t.exact.abs());
    Ok(EulerComparison {
        mismatch: &product - &series.partial_exact,
        partial: series.partial_exact,
        product,
        mismatch_bound: abs_product - abs_partial,
    })
}

/// `a` is a zero of `C` modulo `p^m` whose gradient has valuation `t` with
/// `m - 2t >= 1`, so Newton iteration converges to a zero in `Z_p^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PadicCertificate {
    pub p: u64,
    pub a: Vec<i64>,
    pub m: u32,
    pub t: u32,
    pub slack: i64,
}

fn valuation(v: &BigInt, p: u64) -> Option<u32> {
    if v.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = v.clone();
    let mut e = 0;
    while (&v % &pb).is_zero() {
        v /= &pb;
        e += 1;
    }
    Some(e)
}

fn gradient_valuation(c: &CubicForm, a: &[i64], p: u64) -> Result<Option<(u32, usize)>> {
    let g = c.grad(a)?;
    Ok(g.iter()
        .enumerate()
        .filter_map(|(i, v)| valuation(v, p).map(|e| (e, i)))
        .min())
}

/// Certificate for the given point and modulus exponent, if it is one.
pub fn certificate_at(c: &CubicForm, p: u64, a: &[i64], m: u32) -> Result<Option<PadicCertificate>> {
    Error::check_dim(c.n(), a.len())?;
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let pm = BigInt::from(p).pow(m);
    if !(c.eval(a)? % &pm).is_zero() {
        return Ok(None);
    }
    let Some((t, _)) = gradient_valuation(c, a, p)? else {
        return Ok(None);
    };
    let slack = m as i64 - 2 * t as i64;
    Ok((slack >= 1).then(|| PadicCertificate {
        p,
        a: a.to_vec(),
        m,
        t,
        slack,
    }))
}

/// Independent recheck of a certificate.
pub fn verify_certificate(c: &CubicForm, cert: &PadicCertificate) -> bool {
    if cert.a.len() != c.n() || !is_prime(cert.p) {
        return false;
    }
    let pm = BigInt::from(cert.p).pow(cert.m);
    let Ok(value) = c.eval(&cert.a) else { return false };
    if !(value % pm).is_zero() {
        return false;
    }
    let Ok(g) = c.grad(&cert.a) else { return false };
    let t = g.iter().filter_map(|v| valuation(v, cert.p)).min();
    t == Some(cert.t) && cert.slack == cert.m as i64 - 2 * cert.t as i64 && cert.slack >= 1
}

/// One Newton step: a certificate modulo `p^(m+1)` reducing to `cert.a`
/// modulo `p^(m-t)`.
pub fn lift_certificate(c: &CubicForm, cert: &PadicCertificate) -> Result<PadicCertificate> {
    if !verify_certificate(c, cert) {
        return Err(Error::InvalidInput("certificate does not verify".into()));
    }
    let p = BigInt::from(cert.p);
    let pm = p.pow(cert.m);
    let u = (c.eval(&cert.a)? / &pm).mod_floor(&p);
    let g = c.grad(&cert.a)?;
    let (t, i) = gradient_valuation(c, &cert.a, cert.p)?.expect("verified certificate has nonzero gradient");
    let v = (&g[i] / p.pow(t)).mod_floor(&p);
    // k = -u / v mod p
    let vinv = v.modpow(&(&p - 2u32), &p);
    let k = (-(u * vinv)).mod_floor(&p);
    let step = p.pow(cert.m - t);
    let modulus = p.pow(cert.m + 1);
    let mut a: Vec<BigInt> = cert.a.iter().map(|&x| BigInt::from(x)).collect();
    a[i] += &step * k;
    let a: Vec<i64> = a
        .iter()
        .map(|x| x.mod_floor(&modulus).to_i64())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidInput("lifted point overflows 64-bit coordinates".into()))?;
    certificate_at(c, cert.p, &a, cert.m + 1)?
        .ok_or_else(|| Error::InvalidInput("Newton step failed to produce a certificate".into()))
}

/// Lexicographically first certificate at the smallest modulus exponent
/// `m <= m_max`. `None` means none was found, not that none exists.
pub fn find_nonsingular_padic_zero(c: &CubicForm, p: u64, m_max: u32) -> Result<Option<PadicCertificate>> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let n = c.n();
    for m in 1..=m_max {
        let pm = p.pow(m);
        let size = (pm as f64).powi(n as i32);
        if size > LOCAL_BUDGET {
            return Err(Error::resource("p-adic search residues", size, LOCAL_BUDGET));
        }
        let mc = ModCubic::new(c, pm);
        let mut found = None;
        let mut y = vec![0u64; n];
        for _ in 0..size as u64 {
            if mc.eval(&y) == 0 {
                let a: Vec<i64> = y.iter().map(|&v| v as i64).collect();
                if let Some(cert) = certificate_at(c, p, &a, m)? {
                    found = Some(cert);
                    break;
                }
            }
            for i in (0..n).rev() {
                y[i] += 1;
                if y[i] < pm {
                    break;
                }
                y[i] = 0;
            }
        }
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Certified,
    NotFound,
    BudgetExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeCertificate {
    pub p: u64,
    pub status: CertificateStatus,
    pub certificate: Option<PadicCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub certificates: Vec<PrimeCertificate>,
    pub all_certified: bool,
    pub series: TruncatedSeries,
    pub h_lower: usize,
    pub psi: f64,
    /// Largest observed `|S_{q,a,avec}| / q^(n - h/8 + psi)` over the scanned range.
    pub sbound_constant: Option<f64>,
    pub sbound_qmax: u64,
    /// Heuristic bound on `sum_{q > Q} |A(q)|`; absent when the bound
    /// diverges or was not computed.
    pub tail_heuristic: Option<f64>,
    pub tail_note: String,
}

/// Certificates for all primes `p <= pmax`, the partial singular series at
/// `Q`, and a heuristic tail estimate from the observed complete-sum
/// constant `K`: `|A(q)| <= K q^(1 - h/8 + psi)`, summed by an integral.
pub fn positivity_report(c: &CubicForm, pmax: u64, m_max: u32, big_q: u64, psi: f64) -> Result<PositivityReport> {
    let primes: Vec<u64> = (2..=pmax).filter(|&p| is_prime(p)).collect();
    let certificates: Vec<PrimeCertificate> = primes
        .par_iter()
        .map(|&p| match find_nonsingular_padic_zero(c, p, m_max) {
            Ok(Some(cert)) => PrimeCertificate {
                p,
                status: CertificateStatus::Certified,
                certificate: Some(cert),
            },
            Ok(None) => PrimeCertificate {
                p,
                status: CertificateStatus::NotFound,
                certificate: None,
            },
            Err(_) => PrimeCertificate {
                p,
                status: CertificateStatus::BudgetExceeded,
                certificate: None,
            },
        })
        .collect();
    let series = singular_series_truncated(c, big_q)?;
    let h = h_bounds(c, None, &SpaceSearch::default())?.lower;
    let n = c.n() as i32;
    let mut qmax = 0u64;
    let mut work = 0.0;
    while qmax < big_q.max(2) {
        let next = ((qmax + 1) as f64).powi(n + 1);
        if work + next > COMPLETE_SUM_BUDGET {
            break;
        }
        work += next;
        qmax += 1;
    }
    let sbound_constant = sbound_check(c, h, qmax.max(1), psi, 0, 0).ok().map(|r| r.max_ratio);
    let s = 1.0 - h as f64 / 8.0 + psi;
    let (tail_heuristic, tail_note) = match sbound_constant {
        None => (None, "complete-sum constant not computed".to_string()),
        Some(_) if s >= -1.0 => (
            None,
            format!("tail unquantified: exponent 1 - h/8 + psi = {s:.3} is not below -1 (h lower bound {h})"),
        ),
        Some(k) => {
            let q = big_q as f64;
            (
                Some(k * q.powf(s + 1.0) / (-s - 1.0)),
                "heuristic: observed constant, not a proof".to_string(),
            )
        }
    };
    Ok(PositivityReport {
        all_certified: certificates
            .iter()
            .all(|c| matches!(c.status, CertificateStatus::Certified)),
        certificates,
        series,
        h_lower: h,
        psi,
        sbound_constant,
        sbound_qmax: qmax,
        tail_heuristic,
        tail_note,
    })
}

/// Exact multiplicativity check helper: the terms at `q1`, `q2` and `q1 q2`.
pub fn term_product_defect(c: &CubicForm, q1: u64, q2: u64) -> Result<BigRational> {
    if q1.gcd(&q2) != 1 {
        return Err(Error::InvalidInput("moduli must be coprime".into()));
    }
    Ok(series_term_exact(c, q1 * q2)? - series_term_exact(c, q1)? * series_term_exact(c, q2)?)
}
