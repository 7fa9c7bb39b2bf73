//! Fourier pairs bounding the interval indicator from above and below.
use cubiclab::kernels::{default_grid, kernel_hat, sandwich_check, KernelParams, Sign, TPolicy};

fn main() -> cubiclab::Result<()> {
    for eta in [0.05, 0.5] {
        let kp = KernelParams::new(eta, eta / 100f64.ln(), Sign::Plus)?;
        let rep = sandwich_check(&kp, &default_grid(eta, 200), 1e-4)?;
        println!(
            "eta = {eta}: rho = {:.5}, max |numeric - closed form| = {:.2e} (tail {:.1e})",
            rep.rho, rep.max_deviation, rep.tail_bound
        );
    }

    let kp = KernelParams::from_p(0.1, 1000.0, TPolicy::Log, Sign::Minus)?;
    for t in [0.0, 0.05, 0.09, 0.1, 0.11] {
        println!(
            "t = {t:<4}: hat- = {:.4}  hat+ = {:.4}",
            kernel_hat(t, &kp),
            kernel_hat(t, &kp.with_sign(Sign::Plus))
        );
    }
    Ok(())
}
