//! Exponential sums and integrals attached to a cubic form: complete sums
//! modulo `q`, the generating sums `g`, the oscillatory integrals `I` and
//! `I_u`, a Poisson-summation residual and the approximation functional
//! `F(alpha; P)`.

mod complete;
mod generating;
mod irrationality;
mod oscillatory;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use complete::{
    complete_sum, complete_sum_crt, complete_sum_with_budget, sbound_check, ModCubic, SboundReport, SboundRow,
    COMPLETE_SUM_BUDGET,
};
pub use generating::{sum_g, sum_g_with_budget, G_SUM_BUDGET};
pub use irrationality::{irrationality_f, irrationality_f_lambda, FValue};
pub use oscillatory::{
    osc_integral_i, osc_integral_iu, osc_integral_mc, poisson_residual, PoissonReport, IU_MC_SAMPLE_CAP,
};

/// `e(t) = exp(2 pi i t)`.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (2.0 * std::f64::consts::PI * t).sin_cos();
    Complex64::new(c, s)
}

/// A complex value with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpSumValue {
    pub value: Complex64,
    pub abs_error: f64,
}

impl ExpSumValue {
    pub fn new(value: Complex64, abs_error: f64) -> Self {
        ExpSumValue { value, abs_error }
    }

    pub fn exact(value: Complex64) -> Self {
        ExpSumValue { value, abs_error: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        self.value.norm()
    }
}

impl Serialize for ExpSumValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ExpSumValue", 3)?;
        st.serialize_field("re", &self.value.re)?;
        st.serialize_field("im", &self.value.im)?;
        st.serialize_field("abs_error", &self.abs_error)?;
        st.end()
    }
}

/// Compensated (Neumaier) complex accumulator.
#[derive(Clone, Copy, Default)]
pub(crate) struct Accumulator {
    sum: Complex64,
    comp: Complex64,
}

impl Accumulator {
    #[inline]
    pub fn add(&mut self, v: Complex64) {
        self.sum.re = neumaier(self.sum.re, v.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, v.im, &mut self.comp.im);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

#[inline]
fn neumaier(sum: f64, v: f64, comp: &mut f64) -> f64 {
    let t = sum + v;
    if sum.abs() >= v.abs() {
        *comp += (sum - t) + v;
    } else {
        *comp += (v - t) + sum;
    }
    t
}
