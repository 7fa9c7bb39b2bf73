//! Values of an irrational linear form on taxicab zeros, reduced mod 1.
use cubiclab::equidist::equidist_experiment;
use cubiclab::forms::{CubicForm, LinearSystem};
use cubiclab::lattice::Strategy;

fn main() -> cubiclab::Result<()> {
    let c = CubicForm::diagonal(&[1, 1, -1, -1])?;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let l = LinearSystem::from_real_rows(vec![vec![phi, 2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt()]])?;
    let t = equidist_experiment(&c, &l, &[20.0, 40.0, 80.0], &[vec![1], vec![2]], 500, 11, Strategy::MeetInMiddle)?;
    print!("{}", t.to_csv());
    Ok(())
}
