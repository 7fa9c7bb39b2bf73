//! Globally adaptive Gauss-Kronrod (15/31) quadrature for real and complex
//! integrands, plus an iterated tensor-product driver for boxes.
//!
//! The error estimate of a panel is `|K31 - G15|`, which over-estimates the
//! error of the returned Kronrod value for smooth integrands.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait QuadValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 16] = [
    0.998_002_298_693_397_060_285_172_840_152_271,
    0.987_992_518_020_485_428_489_565_718_586_613,
    0.967_739_075_679_139_134_257_347_978_784_337,
    0.937_273_392_400_705_904_307_758_947_710_209,
    0.897_264_532_344_081_900_882_509_656_454_496,
    0.848_206_583_410_427_216_200_648_320_774_217,
    0.790_418_501_442_465_932_967_649_294_817_947,
    0.724_417_731_360_170_047_416_186_054_613_938,
    0.650_996_741_297_416_970_533_735_895_313_275,
    0.570_972_172_608_538_847_537_226_737_253_911,
    0.485_081_863_640_239_680_693_655_740_232_351,
    0.394_151_347_077_563_369_897_207_370_981_045,
    0.299_180_007_153_168_812_166_780_024_266_389,
    0.201_194_093_997_434_522_300_628_303_394_596,
    0.101_142_066_918_717_499_027_074_231_447_392,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 8] = [
    0.030_753_241_996_117_268_354_628_393_577_204,
    0.070_366_047_488_108_124_709_267_416_450_667,
    0.107_159_220_467_171_935_011_869_546_685_869,
    0.139_570_677_926_154_314_447_804_794_511_028,
    0.166_269_205_816_993_933_553_200_860_481_209,
    0.186_161_000_015_562_211_026_800_561_866_423,
    0.198_431_485_327_111_576_456_118_326_443_839,
    0.202_578_241_925_561_272_880_620_199_967_519,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 16] = [
    0.005_377_479_872_923_348_987_792_051_430_128,
    0.015_007_947_329_316_122_538_374_763_075_807,
    0.025_460_847_326_715_320_186_874_001_019_653,
    0.035_346_360_791_375_846_222_037_948_478_360,
    0.044_589_751_324_764_876_608_227_299_373_280,
    0.053_481_524_690_928_087_265_343_147_239_430,
    0.062_009_567_800_670_640_285_139_230_960_803,
    0.069_854_121_318_728_258_709_520_077_099_147,
    0.076_849_680_757_720_378_894_432_777_482_659,
    0.083_080_502_823_133_021_038_289_247_286_104,
    0.088_564_443_056_211_770_647_275_443_693_774,
    0.093_126_598_170_825_321_225_486_872_747_346,
    0.096_642_726_983_623_678_505_179_907_627_589,
    0.099_173_598_721_791_959_332_393_173_484_603,
    0.100_769_845_523_875_595_044_946_662_617_570,
    0.101_330_007_014_791_549_017_374_792_767_493,
];

/// One Gauss-Kronrod 15/31 panel: `(kronrod value, |kronrod - gauss|)`.
pub fn gk31<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> (V, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[15];
    let mut gauss = fc * WG[7];
    for j in 0..15 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod = kronrod + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).magnitude())
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper limit on panels kept in the adaptive queue.
    pub max_panels: usize,
    /// Uniform panels to start from (useful for oscillatory integrands).
    pub initial_panels: usize,
}

impl QuadOptions {
    pub fn abs(tol: f64) -> Self {
        QuadOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            max_panels: 20_000,
            initial_panels: 1,
        }
    }

    pub fn with_initial_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    pub fn with_max_panels(mut self, panels: usize) -> Self {
        self.max_panels = panels;
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<V> {
    pub value: V,
    pub abs_error: f64,
    pub panels: usize,
    pub converged: bool,
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive integration that always returns its best estimate, flagging
/// whether the tolerance was met.
pub fn integrate_best_effort<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> QuadResult<V> {
    let mut heap = BinaryHeap::new();
    let k = opts.initial_panels.max(1);
    let width = (b - a) / k as f64;
    for i in 0..k {
        let lo = a + width * i as f64;
        let hi = if i + 1 == k { b } else { a + width * (i + 1) as f64 };
        let (value, err) = gk31(&mut f, lo, hi);
        heap.push(Panel { a: lo, b: hi, value, err });
    }
    loop {
        let (total, err) = heap.iter().fold((V::default(), 0.0), |(s, e), p| (s + p.value, e + p.err));
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if err <= target || heap.len() >= opts.max_panels {
            return QuadResult {
                value: total,
                abs_error: err,
                panels: heap.len(),
                converged: err <= target,
            };
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            heap.push(worst);
            let (total, err) = heap.iter().fold((V::default(), 0.0), |(s, e), p| (s + p.value, e + p.err));
            return QuadResult {
                value: total,
                abs_error: err,
                panels: heap.len(),
                converged: err <= target,
            };
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, err) = gk31(&mut f, lo, hi);
            heap.push(Panel { a: lo, b: hi, value, err });
        }
    }
}

/// Adaptive integration; `ToleranceNotMet` when the panel budget runs out.
pub fn integrate<V: QuadValue, F: FnMut(f64) -> V>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult<V>> {
    let r = integrate_best_effort(f, a, b, opts);
    if r.converged {
        Ok(r)
    } else {
        Err(Error::ToleranceNotMet(format!(
            "estimated error {:.3e} above tolerance after {} panels",
            r.abs_error, r.panels
        )))
    }
}

/// Iterated adaptive integration over the box `[lo, hi]^dim`.
///
/// Each level integrates the level below with a tolerance scaled by the
/// box side; the reported error adds the outer estimate to the worst inner
/// error times the outer length.
pub fn integrate_box<V: QuadValue, F: Fn(&[f64]) -> V + Sync>(
    f: &F,
    dim: usize,
    lo: f64,
    hi: f64,
    opts: &QuadOptions,
) -> QuadResult<V> {
    let mut x = vec![0.0; dim];
    nested(f, &mut x, 0, lo, hi, opts)
}

fn nested<V: QuadValue, F: Fn(&[f64]) -> V>(
    f: &F,
    x: &mut Vec<f64>,
    level: usize,
    lo: f64,
    hi: f64,
    opts: &QuadOptions,
) -> QuadResult<V> {
    let dim = x.len();
    if level + 1 == dim {
        return integrate_best_effort(
            |t| {
                x[level] = t;
                f(x)
            },
            lo,
            hi,
            opts,
        );
    }
    let side = hi - lo;
    let inner_opts = QuadOptions {
        abs_tol: opts.abs_tol / (2.0 * side),
        rel_tol: opts.rel_tol,
        ..*opts
    };
    let mut worst_inner = 0.0f64;
    let mut all_converged = true;
    let outer = {
        let xs = std::cell::RefCell::new(x.clone());
        let r = integrate_best_effort(
            |t| {
                let mut xs = xs.borrow_mut();
                xs[level] = t;
                let inner = nested(f, &mut xs, level + 1, lo, hi, &inner_opts);
                worst_inner = worst_inner.max(inner.abs_error);
                all_converged &= inner.converged;
                inner.value
            },
            lo,
            hi,
            &QuadOptions {
                abs_tol: opts.abs_tol / 2.0,
                ..*opts
            },
        );
        r
    };
    let err = outer.abs_error + worst_inner * side;
    QuadResult {
        value: outer.value,
        abs_error: err,
        panels: outer.panels,
        converged: outer.converged && all_converged && err <= opts.abs_tol.max(opts.rel_tol * outer.value.magnitude()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, &QuadOptions::abs(1e-12)).unwrap();
        // [x^6/6 - x^3 + x] from -1 to 2
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_complex() {
        // int_{-1}^{1} e(3x) dx = sin(6 pi) / (3 pi) = 0; int_0^1 e(x/4) = (e(1/4) - 1) / (2 pi i / 4)
        let e = |t: f64| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t);
        let r = integrate(|x| e(3.0 * x), -1.0, 1.0, &QuadOptions::abs(1e-12)).unwrap();
        assert!(r.value.norm() < 1e-12);
        let r = integrate(|x| e(0.25 * x), 0.0, 1.0, &QuadOptions::abs(1e-13)).unwrap();
        let exact = (e(0.25) - 1.0) / Complex64::new(0.0, 2.0 * std::f64::consts::PI * 0.25);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn box_integral_of_product() {
        let r = integrate_box(&|x: &[f64]| x[0] * x[0] * (1.0 + x[1]), 2, 0.0, 1.0, &QuadOptions::abs(1e-10));
        assert!(r.converged);
        assert!((r.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn tolerance_not_met_is_reported() {
        let opts = QuadOptions::abs(1e-14).with_max_panels(2);
        let r = integrate(|x: f64| (1.0 / (x + 1e-9)).sin(), 0.0, 1.0, &opts);
        assert!(matches!(r, Err(Error::ToleranceNotMet(_))));
    }
}
