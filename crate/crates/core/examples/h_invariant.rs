//! Certified h-invariant windows for a few small forms.
use cubiclab::forms::{h_bounds, verify_h_decomposition, CubicForm, HDecomposition, HPair, SpaceSearch};

fn main() -> cubiclab::Result<()> {
    let taxicab = CubicForm::diagonal(&[1, 1, -1, -1])?;
    let witness = HDecomposition::new(vec![HPair::two_cubes(4, 0, 1, 1), HPair::two_cubes(4, 2, 3, -1)]);
    assert!(verify_h_decomposition(&taxicab, &witness));

    let forms = [
        ("x1^3 + x2^3 - x3^3 - x4^3", taxicab, Some(witness)),
        ("x1^3 + x2^3 + x3^3", CubicForm::diagonal(&[1, 1, 1])?, None),
        ("x1^3 + 2 x2^3 + 3 x3^3", CubicForm::diagonal(&[1, 2, 3])?, None),
    ];
    for (name, c, w) in &forms {
        let hb = h_bounds(c, w.as_ref(), &SpaceSearch::default())?;
        println!("{name}: h in [{}, {}]", hb.lower, hb.upper);
        println!("  lower: {}", serde_json::to_string(&hb.lower_certificate)?);
        println!("  upper: {}", serde_json::to_string(&hb.upper_certificate)?);
    }
    Ok(())
}
