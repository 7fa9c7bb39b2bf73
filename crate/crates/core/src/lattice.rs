//! Integer zeros of a cubic form in a box and the counting functions
//! `N_w(P)` (smooth weight) and the unweighted count.
//!
//! Zero detection is exact integer arithmetic. Enumeration splits the first
//! coordinate into slabs processed in parallel; results are concatenated in
//! slab order and sorted, so output never depends on the worker count.

use std::collections::HashMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{CompiledCubic, CubicForm, LinearSystem};

/// Smooth weight `exp(-sum 1/(1 - x_j^2))` on the open unit cube, zero
/// outside.
pub fn weight_w(x: &[f64]) -> f64 {
    if x.iter().any(|v| v.abs() >= 1.0) {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| 1.0 / (1.0 - v * v)).sum();
    (-s).exp()
}

/// One-dimensional factor of `weight_w`.
#[inline]
pub fn weight_1d(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// Indicator of `|t| < eta`.
#[inline]
pub fn indicator_u(t: f64, eta: f64) -> bool {
    t.abs() < eta
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Direct,
    MeetInMiddle,
}

/// Limits for enumeration.
#[derive(Clone, Copy, Debug)]
pub struct EnumBudget {
    /// Maximum number of box points a direct scan may visit.
    pub max_points: f64,
    /// Maximum half-table size for meet-in-the-middle; larger tables fall
    /// back to a direct scan.
    pub table_cap: usize,
}

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget {
            max_points: 2.0e10,
            table_cap: 50_000_000,
        }
    }
}

/// A variable partition `(A, B)` with `C(x) = C_A(x_A) + C_B(x_B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveSplit {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Balanced additive split from the interaction components of `C`.
pub fn detect_split(c: &CubicForm) -> Option<AdditiveSplit> {
    let mut comps = c.additive_components();
    if comps.len() < 2 {
        return None;
    }
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for comp in comps {
        if left.len() <= right.len() {
            left.extend(comp);
        } else {
            right.extend(comp);
        }
    }
    left.sort_unstable();
    right.sort_unstable();
    Some(AdditiveSplit { left, right })
}

fn box_size(dim: usize, bound: i64) -> f64 {
    ((2 * bound + 1) as f64).powi(dim as i32)
}

/// Visit every point of `[-bound, bound]^dim` in lexicographic order.
fn for_each_in_box(dim: usize, bound: i64, mut f: impl FnMut(&[i64])) {
    if dim == 0 {
        f(&[]);
        return;
    }
    let mut x = vec![-bound; dim];
    loop {
        f(&x);
        let mut i = dim;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if x[i] < bound {
                x[i] += 1;
                break;
            }
            x[i] = -bound;
        }
    }
}

struct Evaluator {
    compiled: CompiledCubic,
    fast: bool,
    form: CubicForm,
}

impl Evaluator {
    fn new(form: &CubicForm, bound: i64) -> Self {
        let compiled = form.compile();
        let fast = compiled.fits(bound.max(1));
        Evaluator {
            compiled,
            fast,
            form: form.clone(),
        }
    }

    #[inline]
    fn value(&self, x: &[i64]) -> Option<i128> {
        if self.fast {
            Some(self.compiled.eval_i128(x))
        } else {
            None
        }
    }

    #[inline]
    fn is_zero(&self, x: &[i64]) -> bool {
        match self.value(x) {
            Some(v) => v == 0,
            None => self.form.eval(x).map(|v| v.is_zero()).unwrap_or(false),
        }
    }
}

fn direct_zeros(c: &CubicForm, bound: i64) -> Vec<Vec<i64>> {
    let n = c.n();
    let ev = Evaluator::new(c, bound);
    let slabs: Vec<Vec<Vec<i64>>> = (-bound..=bound)
        .into_par_iter()
        .map(|x0| {
            let mut found = Vec::new();
            let mut x = vec![0i64; n];
            x[0] = x0;
            for_each_in_box(n - 1, bound, |rest| {
                x[1..].copy_from_slice(rest);
                if ev.is_zero(&x) {
                    found.push(x.clone());
                }
            });
            found
        })
        .collect();
    slabs.into_iter().flatten().collect()
}

fn mim_zeros(c: &CubicForm, split: &AdditiveSplit, bound: i64) -> Option<Vec<Vec<i64>>> {
    let left_form = c.restrict(&split.left);
    let right_form = c.restrict(&split.right);
    for f in [&left_form, &right_form].into_iter().flatten() {
        if !f.compile().fits(bound.max(1)) {
            return None;
        }
    }
    let left_c = left_form.as_ref().map(|f| f.compile());
    let right_c = right_form.as_ref().map(|f| f.compile());
    let mut table: HashMap<i128, Vec<Vec<i64>>> = HashMap::new();
    for_each_in_box(split.left.len(), bound, |xa| {
        let v = left_c.as_ref().map(|f| f.eval_i128(xa)).unwrap_or(0);
        table.entry(v).or_default().push(xa.to_vec());
    });
    let n = c.n();
    let rdim = split.right.len();
    let slabs: Vec<Vec<Vec<i64>>> = (-bound..=bound)
        .into_par_iter()
        .map(|first| {
            let mut found = Vec::new();
            let mut xb = vec![0i64; rdim];
            xb[0] = first;
            for_each_in_box(rdim - 1, bound, |rest| {
                xb[1..].copy_from_slice(rest);
                let v = right_c.as_ref().map(|f| f.eval_i128(&xb)).unwrap_or(0);
                if let Some(list) = table.get(&(-v)) {
                    for xa in list {
                        let mut x = vec![0i64; n];
                        for (k, &var) in split.left.iter().enumerate() {
                            x[var] = xa[k];
                        }
                        for (k, &var) in split.right.iter().enumerate() {
                            x[var] = xb[k];
                        }
                        found.push(x);
                    }
                }
            });
            found
        })
        .collect();
    Some(slabs.into_iter().flatten().collect())
}

/// Every `x` with `|x| <= bound` (sup norm) and `C(x) = 0`, sorted
/// lexicographically, plus the number of box points examined.
pub fn zeros_in_box(
    c: &CubicForm,
    bound: i64,
    strategy: Strategy,
    budget: &EnumBudget,
) -> Result<(Vec<Vec<i64>>, u64)> {
    if bound < 0 {
        return Ok((Vec::new(), 0));
    }
    let n = c.n();
    let mut zeros;
    let examined;
    match strategy {
        Strategy::Direct => {
            let size = box_size(n, bound);
            if size > budget.max_points {
                return Err(Error::resource("direct enumeration points", size, budget.max_points));
            }
            zeros = direct_zeros(c, bound);
            examined = size as u64;
        }
        Strategy::MeetInMiddle => {
            let split = detect_split(c).ok_or(Error::SplitUnavailable)?;
            let table = box_size(split.left.len(), bound);
            let fallback = table > budget.table_cap as f64;
            match (!fallback).then(|| mim_zeros(c, &split, bound)).flatten() {
                Some(z) => {
                    zeros = z;
                    examined = (table + box_size(split.right.len(), bound)) as u64;
                }
                None => {
                    let size = box_size(n, bound);
                    if size > budget.max_points {
                        return Err(Error::resource("direct enumeration points", size, budget.max_points));
                    }
                    zeros = direct_zeros(c, bound);
                    examined = size as u64;
                }
            }
        }
    }
    zeros.sort_unstable();
    Ok((zeros, examined))
}

/// Zeros with `|x| <= P`.
pub fn enumerate_zeros(c: &CubicForm, p: f64, strategy: Strategy) -> Result<Vec<Vec<i64>>> {
    Ok(zeros_in_box(c, p.floor() as i64, strategy, &EnumBudget::default())?.0)
}

/// Box bound used for the weighted count: `w(x/P)` vanishes for `|x| >= P`.
pub fn weighted_bound(p: f64) -> i64 {
    p.ceil() as i64 - 1
}

/// Box bound used for the unweighted count, `|x| <= P`.
pub fn unweighted_bound(p: f64) -> i64 {
    p.floor() as i64
}

#[derive(Clone, Debug)]
pub struct CountQuery {
    pub form: CubicForm,
    pub linsys: Option<LinearSystem>,
    pub tau: Vec<f64>,
    pub eta: f64,
    pub p: f64,
    pub weighted: bool,
    pub strategy: Strategy,
    pub keep_solutions: bool,
    pub budget: EnumBudget,
}

impl CountQuery {
    pub fn new(form: CubicForm, p: f64) -> Self {
        CountQuery {
            form,
            linsys: None,
            tau: Vec::new(),
            eta: 1.0,
            p,
            weighted: false,
            strategy: Strategy::Direct,
            keep_solutions: false,
            budget: EnumBudget::default(),
        }
    }

    pub fn with_constraints(mut self, linsys: LinearSystem, tau: Vec<f64>, eta: f64) -> Self {
        self.linsys = Some(linsys);
        self.tau = tau;
        self.eta = eta;
        self
    }

    pub fn weighted(mut self, weighted: bool) -> Self {
        self.weighted = weighted;
        self
    }

    pub fn strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn keep_solutions(mut self, keep: bool) -> Self {
        self.keep_solutions = keep;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::InvalidInput("eta must be positive".into()));
        }
        if !(self.p >= 1.0) {
            return Err(Error::InvalidInput("P must be at least 1".into()));
        }
        let r = self.linsys.as_ref().map(|s| s.r()).unwrap_or(0);
        Error::check_dim(r, self.tau.len())?;
        if let Some(s) = &self.linsys {
            Error::check_dim(self.form.n(), s.n())?;
        }
        Ok(())
    }

    /// Whether `|L_i(x) - tau_i| < eta` for all `i`.
    pub fn satisfies_constraints(&self, x: &[i64]) -> bool {
        match &self.linsys {
            None => true,
            Some(s) => s
                .eval(x)
                .map(|l| l.iter().zip(&self.tau).all(|(li, ti)| indicator_u(li - ti, self.eta)))
                .unwrap_or(false),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CountValue {
    Exact(u64),
    Weighted(f64),
}

impl CountValue {
    pub fn as_f64(&self) -> f64 {
        match *self {
            CountValue::Exact(v) => v as f64,
            CountValue::Weighted(v) => v,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CountResult {
    pub value: CountValue,
    pub points_examined: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solutions: Option<Vec<Vec<i64>>>,
}

/// `N_w(P)` when weighted, otherwise the number of zeros with `|x| <= P`,
/// both subject to the linear-form constraints.
pub fn count(q: &CountQuery) -> Result<CountResult> {
    q.validate()?;
    let bound = if q.weighted {
        weighted_bound(q.p)
    } else {
        unweighted_bound(q.p)
    };
    let (zeros, examined) = zeros_in_box(&q.form, bound, q.strategy, &q.budget)?;
    let kept: Vec<Vec<i64>> = zeros.into_iter().filter(|x| q.satisfies_constraints(x)).collect();
    let value = if q.weighted {
        let mut scaled = vec![0.0; q.form.n()];
        let mut total = 0.0;
        for x in &kept {
            for (s, &xi) in scaled.iter_mut().zip(x) {
                *s = xi as f64 / q.p;
            }
            total += weight_w(&scaled);
        }
        CountValue::Weighted(total)
    } else {
        CountValue::Exact(kept.len() as u64)
    };
    Ok(CountResult {
        value,
        points_examined: examined,
        solutions: q.keep_solutions.then_some(kept),
    })
}
