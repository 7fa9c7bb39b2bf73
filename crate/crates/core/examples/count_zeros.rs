//! Zeros of the taxicab form: direct scan against meet-in-the-middle, and
//! weighted counts under an inequality.
use std::time::Instant;

use cubiclab::forms::{CubicForm, LinearSystem};
use cubiclab::lattice::{count, enumerate_zeros, CountQuery, Strategy};

fn main() -> cubiclab::Result<()> {
    let c = CubicForm::diagonal(&[1, 1, -1, -1])?;
    let p = 30.0;

    let t = Instant::now();
    let direct = enumerate_zeros(&c, p, Strategy::Direct)?;
    let td = t.elapsed();
    let t = Instant::now();
    let mim = enumerate_zeros(&c, p, Strategy::MeetInMiddle)?;
    let tm = t.elapsed();
    println!("|x| <= {p}: {} zeros (direct {td:?}, meet-in-the-middle {tm:?})", direct.len());
    assert_eq!(direct, mim);

    let nontrivial: Vec<_> = mim
        .iter()
        .filter(|x| x.iter().all(|&v| v > 0) && x[0] < x[1] && x[0] != x[2] && x[0] != x[3])
        .collect();
    println!("positive solutions of a^3 + b^3 = c^3 + d^3 with a < b: {nontrivial:?}");

    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let l = LinearSystem::from_real_rows(vec![vec![phi, 2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt()]])?;
    for p in [20.0, 40.0, 80.0] {
        let q = CountQuery::new(c.clone(), p)
            .with_constraints(l.clone(), vec![0.3], 0.05)
            .weighted(true)
            .strategy(Strategy::MeetInMiddle);
        let r = count(&q)?;
        println!("N_w({p}) = {:.6}", r.value.as_f64());
    }
    Ok(())
}
