//! The singular integral of x1^3 + x2^3 + x3^3 - x4^3 - x5^3 - x6^3 by
//! Schmidt's limit and by the oscillatory integral.
use cubiclab::forms::CubicForm;
use cubiclab::sintegral::{chi_w_oscillatory, chi_w_schedule, OscBox};

fn main() -> cubiclab::Result<()> {
    let c = CubicForm::diagonal(&[1, 1, 1, -1, -1, -1])?;
    let s = chi_w_schedule(&c, None, &[4.0, 8.0, 16.0, 32.0, 64.0], 1_000_000, 7)?;
    for row in &s.table {
        println!("L = {:>4}: I_L = {:.6} +- {:.1e}", row.l, row.il, row.stderr);
    }
    println!("Schmidt: {:.6} +- {:.1e} (converged: {})", s.value, s.error_bar, s.converged);

    for b in [25.0, 50.0, 100.0] {
        let o = chi_w_oscillatory(&c, None, OscBox { beta0: b, alpha: 0.0 }, 1e-4)?;
        println!(
            "oscillatory, |beta0| <= {b}: {:.6} (quadrature {:.1e}, box change {:.1e})",
            o.value.value.re, o.quadrature_error, o.tail_bound
        );
    }
    Ok(())
}
