//! Acceptance checks. Prints one `PASS`/`FAIL` line per check and exits
//! nonzero if any check fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cubiclab::construct::solve_system;
use cubiclab::equidist::equidist_experiment;
use cubiclab::expsums::{complete_sum, complete_sum_crt, poisson_residual};
use cubiclab::forms::{
    h_bounds, vanishes_on_span, verify_h_decomposition, verify_lower_certificate, CubicForm, HDecomposition, HPair,
    LinearSystem, SpaceSearch, UpperCertificate,
};
use cubiclab::kernels::{default_grid, kernel_hat, sandwich_check, KernelParams, Sign};
use cubiclab::lattice::{enumerate_zeros, zeros_in_box, CountQuery, EnumBudget, Strategy};
use cubiclab::sintegral::{chi_w_oscillatory, chi_w_schedule, OscBox};
use cubiclab::sseries::{local_density, local_factor_via_sums};
use cubiclab::Error;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    what: &'static str,
    ok: bool,
    limit: Duration,
    detail: String,
}

fn verdict(what: &'static str, ok: bool, limit: Duration, detail: String) -> Outcome {
    Outcome { what, ok, limit, detail }
}

fn taxicab() -> CubicForm {
    CubicForm::diagonal(&[1, 1, -1, -1]).unwrap()
}

fn taxicab_witness() -> HDecomposition {
    HDecomposition::new(vec![HPair::two_cubes(4, 0, 1, 1), HPair::two_cubes(4, 2, 3, -1)])
}

fn golden() -> LinearSystem {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    LinearSystem::from_real_rows(vec![vec![phi, 2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt()]]).unwrap()
}

fn random_form(rng: &mut ChaCha8Rng, n: usize) -> CubicForm {
    let mut terms: Vec<([usize; 3], i64)> = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                terms.push(([i, j, k], rng.gen_range(-5i64..=5)));
            }
        }
    }
    if terms.iter().all(|t| t.1 == 0) {
        terms[0].1 = 1;
    }
    CubicForm::new(n, terms.into_iter().map(|(m, c)| (m, c.into()))).unwrap()
}

fn a1_crt_factorization_of_complete_sums() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut cases = 0;
    while cases < 100 {
        let q1 = rng.gen_range(2u64..=200);
        let q2 = rng.gen_range(2u64..=(400 / q1).max(2));
        if q1 * q2 > 400 || q1.gcd(&q2) != 1 {
            continue;
        }
        let q = q1 * q2;
        let n = rng.gen_range(1..=2);
        let c = random_form(&mut rng, n);
        let a = rng.gen_range(0..q as i64);
        let avec: Vec<i64> = (0..n).map(|_| rng.gen_range(0..q as i64)).collect();
        let direct = complete_sum(&c, q, a, &avec).unwrap().value;
        let crt = complete_sum_crt(&c, q, a, &avec).unwrap().value;
        worst = worst.max((direct - crt).norm() / (q as f64).powi(n as i32));
        cases += 1;
    }
    verdict(
        "complete sums: CRT product equals direct sum",
        worst <= 1e-9,
        Duration::from_secs(30),
        format!("{cases} cases, max |diff| / q^n = {worst:.2e}"),
    )
}

fn a2_local_densities_from_sums_are_exact() -> Outcome {
    let forms = [CubicForm::diagonal(&[1, 1]).unwrap(), CubicForm::diagonal(&[1, 2, 3]).unwrap()];
    let mut checked = 0;
    let mut skipped = 0;
    let mut mismatches = Vec::new();
    for c in &forms {
        for p in [2u64, 3, 5, 7] {
            for k in 1..=3 {
                match (local_density(c, p, k), local_factor_via_sums(c, p, k)) {
                    (Ok(d), Ok(s)) => {
                        checked += 1;
                        if d.sigma != s {
                            mismatches.push(format!("n={} p={p} k={k}: {} vs {s}", c.n(), d.sigma));
                        }
                    }
                    (Err(Error::ResourceLimit { .. }), _) | (_, Err(Error::ResourceLimit { .. })) => skipped += 1,
                    (Err(e), _) | (_, Err(e)) => panic!("{e}"),
                }
            }
        }
    }
    verdict(
        "local densities equal their exponential-sum expansion",
        mismatches.is_empty() && checked > 0,
        Duration::from_secs(300),
        format!("{checked} exact rational comparisons, {skipped} over budget, mismatches {mismatches:?}"),
    )
}

fn a3_kernel_transforms_and_sandwich() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for eta in [0.05, 0.5] {
        let kp = KernelParams::new(eta, eta / 100f64.ln(), Sign::Plus).unwrap();
        let grid = default_grid(eta, 200);
        match sandwich_check(&kp, &grid, 1e-4) {
            Ok(rep) => {
                let within = rep.max_deviation <= 1e-4 + rep.tail_bound;
                let chain = rep
                    .rows
                    .iter()
                    .all(|r| r.hat_minus <= r.indicator && r.indicator <= r.hat_plus);
                let minus = kp.with_sign(Sign::Minus);
                let knots = [0.0, eta - kp.rho, eta, eta + kp.rho];
                let knot_chain = knots.iter().flat_map(|&t| [t, -t]).all(|t| {
                    let u = if t.abs() < eta { 1.0 } else { 0.0 };
                    kernel_hat(t, &minus) <= u && u <= kernel_hat(t, &kp)
                });
                ok &= within && chain && knot_chain && rep.rows.len() == 200;
                details.push(format!(
                    "eta={eta}: max dev {:.2e} (allowed {:.2e}), chain {}",
                    rep.max_deviation,
                    1e-4 + rep.tail_bound,
                    chain && knot_chain
                ));
            }
            Err(e) => {
                ok = false;
                details.push(format!("eta={eta}: {e}"));
            }
        }
    }
    verdict(
        "kernel transforms match closed forms and sandwich the indicator",
        ok,
        Duration::from_secs(60),
        details.join("; "),
    )
}

fn a4_poisson_summation() -> Outcome {
    let c = CubicForm::diagonal(&[1]).unwrap();
    let mut worst = 0.0f64;
    for p in [8.0, 16.0] {
        for (alpha0, lambda) in [(0.0, 0.0), (1e-4, 0.3)] {
            let rep = poisson_residual(&c, p, alpha0, &[lambda], 5).unwrap();
            worst = worst.max(rep.relative);
        }
    }
    verdict(
        "Poisson summation for the weighted cubic sum",
        worst <= 1e-2,
        Duration::from_secs(120),
        format!("max relative residual {worst:.2e}"),
    )
}

fn a5_singular_integral_two_ways() -> Outcome {
    // x1^3 with L = sqrt(2) x2.
    let c = CubicForm::diagonal(&[1, 0]).unwrap();
    let l = LinearSystem::from_real_rows(vec![vec![0.0, 2f64.sqrt()]]).unwrap();
    let schmidt = chi_w_schedule(&c, Some(&l), &[4.0, 8.0, 16.0, 32.0], 1_000_000, 7).unwrap();
    let osc = chi_w_oscillatory(&c, Some(&l), OscBox { beta0: 20.0, alpha: 4.0 }, 1e-3).unwrap();
    let osc_err = osc.quadrature_error + osc.tail_bound;
    let combined = (schmidt.error_bar.powi(2) + osc_err.powi(2)).sqrt();
    let diff = (schmidt.value - osc.value.value.re).abs();
    let agree = diff <= 2.0 * combined;
    let table: Vec<String> = schmidt.table.iter().map(|r| format!("{}:{:.4}", r.l, r.il)).collect();
    verdict(
        "Schmidt limit and oscillatory integral agree, schedule differences decrease",
        agree && schmidt.converged,
        Duration::from_secs(600),
        format!(
            "I_L {}; monotone {}; Schmidt {:.4} +- {:.1e}, oscillatory {:.4} +- {:.1e} (half box {:.4}); |diff| {:.3} vs 2 x {:.1e}",
            table.join(" "),
            schmidt.converged,
            schmidt.value,
            schmidt.error_bar,
            osc.value.value.re,
            osc_err,
            osc.half_box_value,
            diff,
            combined
        ),
    )
}

fn a5s_singular_integral_two_ways_six_variables() -> Outcome {
    let c = CubicForm::diagonal(&[1, 1, 1, -1, -1, -1]).unwrap();
    let schmidt = chi_w_schedule(&c, None, &[4.0, 8.0, 16.0, 32.0, 64.0], 1_000_000, 7).unwrap();
    let osc = chi_w_oscillatory(&c, None, OscBox { beta0: 100.0, alpha: 0.0 }, 1e-4).unwrap();
    let osc_err = osc.quadrature_error + osc.tail_bound;
    let combined = (schmidt.error_bar.powi(2) + osc_err.powi(2)).sqrt();
    let diff = (schmidt.value - osc.value.value.re).abs();
    verdict(
        "six-variable diagonal form: Schmidt limit and oscillatory integral agree",
        diff <= 2.0 * combined && schmidt.converged,
        Duration::from_secs(600),
        format!(
            "Schmidt {:.6} +- {:.1e}, oscillatory {:.6} +- {:.1e}, |diff| {:.1e}",
            schmidt.value, schmidt.error_bar, osc.value.value.re, osc_err, diff
        ),
    )
}

fn a6_constructive_solution_on_taxicab() -> Outcome {
    let c = taxicab();
    let d = taxicab_witness();
    let l = golden();
    let sol = solve_system(&c, &d, &l, &[0.3], 0.05, 500).unwrap();
    let (ok, detail) = match sol {
        None => (false, "no solution within Y = 500".to_string()),
        Some(s) => {
            let zero = c.eval(&s.x).unwrap().is_zero();
            let q = CountQuery::new(c.clone(), 1.0).with_constraints(l.clone(), vec![0.3], 0.05);
            let constraint = q.satisfies_constraints(&s.x);
            let bound = s.x.iter().map(|v| v.abs()).max().unwrap_or(0);
            let in_zero_set = zeros_in_box(&c, bound, Strategy::MeetInMiddle, &EnumBudget::default())
                .unwrap()
                .0
                .binary_search(&s.x)
                .is_ok();
            let lx = l.rows()[0].eval(&s.x);
            (
                zero && constraint && in_zero_set && verify_h_decomposition(&c, &d),
                format!("x = {:?}, L(x) = {lx:.6}, C(x) = 0: {zero}, in enumerated zero set: {in_zero_set}", s.x),
            )
        }
    };
    verdict(
        "solver output is an exact zero satisfying the inequality",
        ok,
        Duration::from_secs(60),
        detail,
    )
}

fn a7_equidistribution_trend() -> Outcome {
    let t = equidist_experiment(&taxicab(), &golden(), &[20.0, 80.0], &[vec![1]], 500, 11, Strategy::MeetInMiddle)
        .unwrap();
    let (lo, hi) = (&t.rows[0], &t.rows[1]);
    let disc_ok = hi.discrepancy <= 0.7 * lo.discrepancy;
    let weyl_ok = hi.weyl[0] < lo.weyl[0];
    verdict(
        "discrepancy and Weyl sums shrink from P = 20 to P = 80",
        disc_ok && weyl_ok,
        Duration::from_secs(600),
        format!(
            "discrepancy {:.4} -> {:.4}, |Weyl| {:.4} -> {:.4}",
            lo.discrepancy, hi.discrepancy, lo.weyl[0], hi.weyl[0]
        ),
    )
}

fn a8_enumeration_strategies_agree() -> Outcome {
    let c = taxicab();
    let direct = enumerate_zeros(&c, 30.0, Strategy::Direct).unwrap();
    let mim = enumerate_zeros(&c, 30.0, Strategy::MeetInMiddle).unwrap();
    verdict(
        "direct and meet-in-the-middle zero sets coincide",
        direct == mim && !direct.is_empty(),
        Duration::from_secs(120),
        format!("{} vs {} zeros", direct.len(), mim.len()),
    )
}

fn a9_h_bound_certificates() -> Outcome {
    let c = taxicab();
    let search = SpaceSearch::default();
    let with = h_bounds(&c, Some(&taxicab_witness()), &search).unwrap();
    let without = h_bounds(&c, None, &search).unwrap();
    let taxi_ok = (with.lower, with.upper) == (2, 2)
        && (without.lower, without.upper) == (2, 2)
        && verify_lower_certificate(&c, &with.lower_certificate)
        && verify_lower_certificate(&c, &without.lower_certificate);
    let c3 = CubicForm::diagonal(&[1, 1, 1]).unwrap();
    let hb = h_bounds(&c3, None, &search).unwrap();
    let upper_ok = match &hb.upper_certificate {
        UpperCertificate::LinearSpace { basis } => vanishes_on_span(&c3, basis).unwrap() && basis.len() == 3 - hb.upper,
        UpperCertificate::Dimension => hb.upper == 3,
        UpperCertificate::Decomposition { .. } => false,
    };
    let c3_ok = hb.lower <= 2 && 2 <= hb.upper && verify_lower_certificate(&c3, &hb.lower_certificate) && upper_ok;
    verdict(
        "h-invariant windows with verified certificates",
        taxi_ok && c3_ok,
        Duration::from_secs(60),
        format!(
            "taxicab ({}, {}) / ({}, {}) without witness; three cubes [{}, {}]",
            with.lower, with.upper, without.lower, without.upper, hb.lower, hb.upper
        ),
    )
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("1", a1_crt_factorization_of_complete_sums),
        ("2", a2_local_densities_from_sums_are_exact),
        ("3", a3_kernel_transforms_and_sandwich),
        ("4", a4_poisson_summation),
        ("5", a5_singular_integral_two_ways),
        ("5s", a5s_singular_integral_two_ways_six_variables),
        ("6", a6_constructive_solution_on_taxicab),
        ("7", a7_equidistribution_trend),
        ("8", a8_enumeration_strategies_agree),
        ("9", a9_h_bound_certificates),
    ];
    // Optional positional arguments select checks by id.
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut run = 0;
    let mut failed = 0;
    for (id, check) in checks {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        run += 1;
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let secs = t0.elapsed().as_secs_f64();
        match result {
            Ok(o) => {
                let pass = o.ok && secs <= o.limit.as_secs_f64();
                failed += usize::from(!pass);
                let status = if pass { "PASS" } else { "FAIL" };
                println!("{status} [{id}] {}: {} ({secs:.1}s, limit {}s)", o.what, o.detail, o.limit.as_secs());
            }
            Err(_) => {
                failed += 1;
                println!("FAIL [{id}] panicked ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {failed} of {run} checks failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
