use std::f64::consts::PI;

use cubiclab::arith::ramanujan_sum;
use cubiclab::construct::{integer_kernel, rref, row_hnf};
use cubiclab::expsums::{complete_sum, sum_g};
use cubiclab::forms::CubicForm;
use cubiclab::kernels::{indicator, kernel_hat, KernelParams, Sign};
use cubiclab::lattice::{enumerate_zeros, Strategy as Enum};
use cubiclab::sseries::{local_density, local_factor_via_sums, term_product_defect};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn monomials(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                out.push([i, j, k]);
            }
        }
    }
    out
}

fn form_strategy(max_n: usize) -> impl Strategy<Value = CubicForm> {
    (1..=max_n).prop_flat_map(|n| {
        let m = monomials(n);
        proptest::collection::vec(-4i64..=4, m.len()).prop_filter_map("zero form", move |cs| {
            if cs.iter().all(|&c| c == 0) {
                return None;
            }
            CubicForm::new(n, m.iter().zip(&cs).map(|(&k, &c)| (k, BigInt::from(c)))).ok()
        })
    })
}

fn naive_sum(c: &CubicForm, q: u64, a: i64, avec: &[i64]) -> Complex64 {
    let n = c.n();
    let mut x = vec![0i64; n];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let cx: i64 = c.eval(&x).unwrap().try_into().unwrap();
        let lin: i64 = avec.iter().zip(&x).map(|(a, b)| a * b).sum();
        let t = (a * cx + lin).rem_euclid(q as i64) as f64 / q as f64;
        total += Complex64::from_polar(1.0, 2.0 * PI * t);
        let mut i = 0;
        loop {
            if i == n {
                return total;
            }
            x[i] += 1;
            if x[i] < q as i64 {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cubic_is_homogeneous(c in form_strategy(4), x in proptest::collection::vec(-20i64..=20, 4), t in -6i64..=6) {
        let x = &x[..c.n()];
        let tx: Vec<i64> = x.iter().map(|v| v * t).collect();
        prop_assert_eq!(c.eval(&tx).unwrap(), c.eval(x).unwrap() * BigInt::from(t.pow(3)));
    }

    #[test]
    fn complete_sum_matches_naive(c in form_strategy(2), q in 1u64..=15, a in -20i64..=20, v in proptest::collection::vec(-20i64..=20, 2)) {
        let avec = &v[..c.n()];
        let s = complete_sum(&c, q, a, avec).unwrap();
        let naive = naive_sum(&c, q, a, avec);
        prop_assert!((s.value - naive).norm() <= 1e-9 * (q as f64).powi(c.n() as i32));
    }

    #[test]
    fn complete_sum_is_periodic(c in form_strategy(2), q in 1u64..=30, a in 0i64..30, v in proptest::collection::vec(0i64..30, 2), i in 0usize..2) {
        let n = c.n();
        let avec = v[..n].to_vec();
        let mut shifted = avec.clone();
        shifted[i % n] += q as i64;
        let base = complete_sum(&c, q, a, &avec).unwrap().value;
        let s1 = complete_sum(&c, q, a + q as i64, &avec).unwrap().value;
        let s2 = complete_sum(&c, q, a, &shifted).unwrap().value;
        let tol = 1e-9 * (q as f64).powi(n as i32);
        prop_assert!((base - s1).norm() <= tol);
        prop_assert!((base - s2).norm() <= tol);
    }

    #[test]
    fn generating_sum_translation_and_conjugation(c in form_strategy(2), alpha0 in -0.01f64..0.01, l in proptest::collection::vec(-1.0f64..1.0, 2), shift in -3i64..=3) {
        let n = c.n();
        let lambda = &l[..n];
        let g = sum_g(&c, 6.0, alpha0, lambda, true).unwrap().value;
        let mut moved = lambda.to_vec();
        moved[0] += shift as f64;
        let g_moved = sum_g(&c, 6.0, alpha0, &moved, true).unwrap().value;
        let neg: Vec<f64> = lambda.iter().map(|v| -v).collect();
        let g_neg = sum_g(&c, 6.0, -alpha0, &neg, true).unwrap().value;
        prop_assert!((g - g_moved).norm() < 1e-9);
        prop_assert!((g - g_neg.conj()).norm() < 1e-9);
    }

    #[test]
    fn diagonal_enumeration_strategies_agree(coeffs in proptest::collection::vec(prop_oneof![-3i64..=-1, 1i64..=3], 4), p in 1u32..=6) {
        let c = CubicForm::diagonal(&coeffs).unwrap();
        let d = enumerate_zeros(&c, p as f64, Enum::Direct).unwrap();
        let m = enumerate_zeros(&c, p as f64, Enum::MeetInMiddle).unwrap();
        prop_assert_eq!(d, m);
    }

    #[test]
    fn kernel_basis_is_exact_and_saturated(
        rows in proptest::collection::vec(proptest::collection::vec(-4i64..=4, 5), 1..4),
        den in 1i64..=6,
    ) {
        let n = 5;
        let forms: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| BigRational::new(v.into(), den.into())).collect())
            .collect();
        let k = integer_kernel(&forms, n).unwrap();
        let rank = rref(&forms, n).unwrap().pivots.len();
        prop_assert_eq!(k.dim(), n - rank);
        prop_assert_eq!(k.rank, rank);
        for z in &k.vectors {
            for f in &forms {
                let s = f.iter().zip(z).fold(BigRational::zero(), |acc, (a, b)| acc + a * BigRational::from_integer(b.clone()));
                prop_assert!(s.is_zero());
            }
        }
        prop_assert!(k.is_saturated());
    }

    #[test]
    fn hermite_form_is_canonical(
        rows in proptest::collection::vec(proptest::collection::vec(-5i64..=5, 4), 2),
        u in -3i64..=3,
    ) {
        let a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        // Unimodular row operations: swap, then add u times one row to the other.
        let b: Vec<Vec<BigInt>> = vec![
            a[1].iter().zip(&a[0]).map(|(x, y)| x + BigInt::from(u) * y).collect(),
            a[0].clone(),
        ];
        prop_assert_eq!(row_hnf(a), row_hnf(b));
    }

    #[test]
    fn sandwich_holds_everywhere(eta in 0.01f64..2.0, frac in 0.01f64..1.0, t in -5.0f64..5.0) {
        let kp = KernelParams::new(eta, eta * frac, Sign::Plus).unwrap();
        let lo = kernel_hat(t, &kp.with_sign(Sign::Minus));
        let hi = kernel_hat(t, &kp);
        let u = indicator(t, eta);
        prop_assert!(lo <= u && u <= hi);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }

    #[test]
    fn ramanujan_sum_matches_definition(q in 1u64..=60, m in 0u64..=200) {
        let mut s = 0.0;
        for a in 1..=q {
            if num_integer::gcd(a, q) == 1 {
                s += (2.0 * PI * (a * m) as f64 / q as f64).cos();
            }
        }
        prop_assert!((ramanujan_sum(q, m) as f64 - s).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn local_density_two_ways(c in form_strategy(3), p in prop_oneof![Just(2u64), Just(3), Just(5)], k in 1u32..=2) {
        prop_assert_eq!(local_density(&c, p, k).unwrap().sigma, local_factor_via_sums(&c, p, k).unwrap());
    }

    #[test]
    fn series_terms_are_multiplicative(c in form_strategy(2), q1 in prop_oneof![Just(2u64), Just(4), Just(8)], q2 in prop_oneof![Just(3u64), Just(5), Just(9)]) {
        prop_assert!(term_product_defect(&c, q1, q2).unwrap().is_zero());
    }
}
