//! Small-integer arithmetic: factorization, Moebius function, totient.

use num_integer::Integer;

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut q: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            let mut e = 0;
            while q % p == 0 {
                q /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if q > 1 {
        out.push((q, 1));
    }
    out
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && factorize(p) == vec![(p, 1)]
}

pub fn mobius(q: u64) -> i64 {
    let f = factorize(q);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn totient(q: u64) -> u64 {
    factorize(q)
        .iter()
        .fold(q, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn divisors(q: u64) -> Vec<u64> {
    let mut d: Vec<u64> = vec![1];
    for (p, e) in factorize(q) {
        let cur = d.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            d.extend(cur.iter().map(|x| x * pk));
        }
    }
    d.sort_unstable();
    d
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Ramanujan sum `c_q(m) = sum_{d | gcd(q, m)} mu(q/d) d`.
pub fn ramanujan_sum(q: u64, m: u64) -> i64 {
    let g = q.gcd(&m);
    divisors(g)
        .into_iter()
        .map(|d| mobius(q / d) * d as i64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert!(is_prime(97) && !is_prime(91) && !is_prime(1));
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(totient(36), 12);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn ramanujan_matches_definition() {
        for q in 1..30u64 {
            for m in 0..30u64 {
                let direct: f64 = (1..=q)
                    .filter(|a| a.gcd(&q) == 1)
                    .map(|a| (2.0 * std::f64::consts::PI * (a * m) as f64 / q as f64).cos())
                    .sum();
                assert!((direct - ramanujan_sum(q, m) as f64).abs() < 1e-9, "q={q} m={m}");
            }
        }
    }
}
