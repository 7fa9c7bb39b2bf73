//! Randomized quasi-Monte Carlo on `[-1, 1]^d`.
//!
//! Points come from the Kronecker sequence with generator `1/phi_d^k`,
//! where `phi_d` is the positive root of `x^(d+1) = x + 1`. Each batch uses
//! an independent uniform shift modulo one (Cranley-Patterson rotation), so
//! batch means are i.i.d. and unbiased and their spread gives the standard
//! error. All randomness derives from a single seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::quadrature::QuadValue;

/// Number of independently shifted batches.
pub const BATCHES: usize = 64;

fn generator(dim: usize) -> Vec<f64> {
    // Newton iteration for x^(d+1) = x + 1, starting above the root.
    let mut phi = 2.0f64;
    for _ in 0..64 {
        let f = phi.powi(dim as i32 + 1) - phi - 1.0;
        let df = (dim as f64 + 1.0) * phi.powi(dim as i32) - 1.0;
        phi -= f / df;
    }
    (1..=dim).map(|k| phi.powi(-(k as i32)).fract()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<V = f64> {
    pub mean: V,
    pub std_error: f64,
    pub samples: usize,
}

/// Estimate `int_{[-1,1]^dim} f` with `samples` points split into
/// [`BATCHES`] shifted batches. Deterministic given `seed`.
pub fn integrate_cube<V, F>(f: F, dim: usize, samples: usize, seed: u64) -> Estimate<V>
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    let per_batch = samples.div_ceil(BATCHES).max(1);
    let alpha = generator(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<Vec<f64>> = (0..BATCHES)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let volume = 2f64.powi(dim as i32);
    let batch_means: Vec<V> = shifts
        .par_iter()
        .map(|shift| {
            let mut x = vec![0.0; dim];
            let mut acc = V::default();
            for i in 1..=per_batch {
                for k in 0..dim {
                    let u = (shift[k] + alpha[k] * i as f64).fract();
                    x[k] = 2.0 * u - 1.0;
                }
                acc = acc + f(&x);
            }
            acc * (volume / per_batch as f64)
        })
        .collect();
    let m = BATCHES as f64;
    let mean = batch_means.iter().fold(V::default(), |s, &b| s + b) * (1.0 / m);
    let var = batch_means.iter().map(|&b| (b - mean).magnitude().powi(2)).sum::<f64>() / (m - 1.0);
    Estimate {
        mean,
        std_error: (var / m).sqrt(),
        samples: per_batch * BATCHES,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_for_one_dimension_is_golden() {
        let g = generator(1);
        assert!((g[0] - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_integral() {
        // int_{[-1,1]^3} (x^2 + y z + 1) = 8/3 + 0 + 8
        let e = integrate_cube(|x: &[f64]| x[0] * x[0] + x[1] * x[2] + 1.0, 3, 64_000, 5);
        assert!((e.mean - (8.0 / 3.0 + 8.0)).abs() < 5.0 * e.std_error + 1e-3);
        assert!(e.std_error < 1e-2);
    }

    #[test]
    fn reproducible_given_seed() {
        let f = |x: &[f64]| (x[0] * 3.0).cos() * x[1].exp();
        let a = integrate_cube(f, 2, 10_000, 9);
        let b = integrate_cube(f, 2, 10_000, 9);
        assert_eq!(a, b);
        let c = integrate_cube(f, 2, 10_000, 10);
        assert_ne!(a.mean, c.mean);
    }
}
