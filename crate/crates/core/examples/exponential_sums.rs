//! Complete sums modulo q, their multiplicativity, the generating sum over
//! a box and the irrationality functional.
use cubiclab::expsums::{complete_sum, complete_sum_crt, irrationality_f_lambda, sbound_check, sum_g};
use cubiclab::forms::CubicForm;

fn main() -> cubiclab::Result<()> {
    let c = CubicForm::diagonal(&[1, 1, 1])?;
    for q in [2u64, 7, 9, 36] {
        let s = complete_sum(&c, q, 1, &[0, 0, 0])?;
        let t = complete_sum_crt(&c, q, 1, &[0, 0, 0])?;
        println!(
            "q = {q:>2}: S = {:+.7} {:+.7}i  (crt {:+.7} {:+.7}i)",
            s.value.re, s.value.im, t.value.re, t.value.im
        );
    }

    let rep = sbound_check(&c, 3, 30, 0.0, 0, 1)?;
    println!("max |S| / q^(n - h/8) over q <= 30: {:.4} at q = {}", rep.max_ratio, rep.argmax_q);

    let cube = CubicForm::diagonal(&[1])?;
    for p in [8.0, 16.0, 32.0] {
        let g = sum_g(&cube, p, 1e-4, &[0.3], true)?;
        println!("g(1e-4, 0.3) at P = {p}: {:.6} {:+.6}i", g.value.re, g.value.im);
    }

    for p in [1e2, 1e4, 1e6] {
        let f = irrationality_f_lambda(&[2f64.sqrt()], p)?;
        println!("F(sqrt 2; {p:e}) = {:.3e} (q = {})", f.value, f.q);
    }
    Ok(())
}
