//! N_w(P) against the predicted main term, from the bundled taxicab config.
use std::path::Path;

use cubiclab::experiment::{load_experiment, run_asymptotic_experiment};

fn main() -> cubiclab::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/taxicab_experiment.json");
    let exp = load_experiment(&path)?;
    let rep = run_asymptotic_experiment(&exp)?;
    println!("h in [{}, {}], flags {:?}", rep.hypotheses.h_lower, rep.hypotheses.h_upper, rep.hypotheses.asymptotic_formula);
    println!("S_Q = {:.6}, chi_w = {:.4}", rep.singular_series.partial_sum.value, rep.singular_integral.estimate.value);
    for row in &rep.rows {
        println!("P = {:>3}: N_w = {:.4}, ratio = {:.4}", row.p, row.n_w.value, row.ratio.value);
    }
    for n in &rep.notes {
        println!("note: {n}");
    }
    Ok(())
}
