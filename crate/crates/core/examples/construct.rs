//! An integer zero of the taxicab form with |L(x) - 0.3| < 0.05, found in
//! the lattice cut out by the decomposition's linear forms.
use cubiclab::construct::{integer_kernel, solve_system};
use cubiclab::forms::{CubicForm, HDecomposition, HPair, LinearSystem};

fn main() -> cubiclab::Result<()> {
    let c = CubicForm::diagonal(&[1, 1, -1, -1])?;
    let d = HDecomposition::new(vec![HPair::two_cubes(4, 0, 1, 1), HPair::two_cubes(4, 2, 3, -1)]);
    let forms: Vec<_> = d.pairs.iter().map(|p| p.linear.clone()).collect();
    let basis = integer_kernel(&forms, 4)?;
    println!("kernel basis: {:?} (saturated: {})", basis.to_i64(), basis.is_saturated());

    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let l = LinearSystem::from_real_rows(vec![vec![phi, 2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt()]])?;
    for (tau, eta) in [(0.3, 0.05), (0.3, 0.01), (-1.7, 0.001)] {
        match solve_system(&c, &d, &l, &[tau], eta, 500)? {
            Some(s) => println!(
                "tau = {tau}, eta = {eta}: x = {:?}, L(x) = {:.6}, C(x) = {}",
                s.x,
                s.linear_values[0],
                c.eval(&s.x)?
            ),
            None => println!("tau = {tau}, eta = {eta}: not found within bound"),
        }
    }
    Ok(())
}
