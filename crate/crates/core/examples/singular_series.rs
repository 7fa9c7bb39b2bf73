//! Truncated singular series, the Euler product, local densities and
//! p-adic certificates.
use cubiclab::forms::CubicForm;
use cubiclab::sseries::{euler_product_comparison, local_density, local_factor_via_sums, positivity_report};
use num_traits::ToPrimitive;

fn main() -> cubiclab::Result<()> {
    let c = CubicForm::diagonal(&[1, 2, 3])?;
    for p in [2u64, 3, 5, 7] {
        for k in 1..=2 {
            let d = local_density(&c, p, k)?;
            let s = local_factor_via_sums(&c, p, k)?;
            assert_eq!(d.sigma, s);
            println!("sigma({p}^{k}) = {} ({} zeros)", d.sigma, d.count);
        }
    }

    let cmp = euler_product_comparison(&c, 40)?;
    println!(
        "Q = 40: partial {:.6}, product {:.6}, |mismatch| {:.2e} <= {:.2e}",
        cmp.partial.to_f64().unwrap(),
        cmp.product.to_f64().unwrap(),
        cmp.mismatch.to_f64().unwrap().abs(),
        cmp.mismatch_bound.to_f64().unwrap()
    );

    let rep = positivity_report(&CubicForm::diagonal(&[1, 1, -1, -1])?, 13, 6, 30, 0.0)?;
    for pc in &rep.certificates {
        println!("p = {:>2}: {:?} {:?}", pc.p, pc.status, pc.certificate.as_ref().map(|c| (&c.a, c.m)));
    }
    println!("tail: {:?} ({})", rep.tail_heuristic, rep.tail_note);
    Ok(())
}
