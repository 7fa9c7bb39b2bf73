//! End-to-end comparison of the weighted count `N_w(P)` with the predicted
//! main term `(2 eta)^r S chi_w P^(n-r-3)`, driven by a JSON config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::forms::io::{
    check_form_value, check_linsys_value, decomposition_from_value, format_rational, read_json, Diagnostic,
};
use crate::forms::{h_bounds, verify_h_decomposition, CubicForm, HBounds, HDecomposition, LinearSystem, SpaceSearch};
use crate::kernels::{KernelParams, Sign, TPolicy};
use crate::lattice::{count, detect_split, CountQuery, EnumBudget, Strategy};
use crate::sintegral::{chi_w_schedule, ChiRow};
use crate::sseries::singular_series_truncated;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyChoice {
    #[default]
    Auto,
    Direct,
    MeetInMiddle,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_series_q")]
    pub series_q: u64,
    #[serde(default = "default_chi_samples")]
    pub chi_samples: usize,
    #[serde(default = "default_chi_schedule")]
    pub chi_schedule: Vec<f64>,
    #[serde(default = "default_max_points")]
    pub max_points: f64,
}

fn default_series_q() -> u64 {
    30
}
fn default_chi_samples() -> usize {
    200_000
}
fn default_chi_schedule() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0]
}
fn default_max_points() -> f64 {
    EnumBudget::default().max_points
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            series_q: default_series_q(),
            chi_samples: default_chi_samples(),
            chi_schedule: default_chi_schedule(),
            max_points: default_max_points(),
        }
    }
}

/// Experiment description. File paths are resolved against the directory
/// of the config file.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub form: PathBuf,
    #[serde(default)]
    pub linsys: Option<PathBuf>,
    #[serde(default)]
    pub decomp: Option<PathBuf>,
    #[serde(default)]
    pub tau: Vec<f64>,
    pub eta: f64,
    #[serde(default, rename = "P")]
    pub p: Option<f64>,
    #[serde(default, rename = "P_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default = "default_policy")]
    pub kernel_policy: String,
    #[serde(default)]
    pub strategy: StrategyChoice,
    #[serde(default = "default_true")]
    pub weighted: bool,
}

fn default_policy() -> String {
    "log".into()
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn grid(&self) -> Vec<f64> {
        if self.p_grid.is_empty() {
            self.p.into_iter().collect()
        } else {
            self.p_grid.clone()
        }
    }
}

/// Everything a run needs, with files loaded.
#[derive(Clone, Debug)]
pub struct LoadedExperiment {
    pub config: ExperimentConfig,
    pub raw: Value,
    pub form: CubicForm,
    pub linsys: Option<LinearSystem>,
    pub decomp: Option<HDecomposition>,
    pub policy: TPolicy,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn prefixed(file: &str, diags: Vec<Diagnostic>) -> impl Iterator<Item = Diagnostic> + '_ {
    diags
        .into_iter()
        .map(move |d| Diagnostic::new(format!("{file}:{}", d.location), d.message))
}

fn check_config(raw: &Value, base: &Path) -> (Option<LoadedExperiment>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let cfg: ExperimentConfig = match serde_json::from_value(raw.clone()) {
        Ok(c) => c,
        Err(e) => {
            diags.push(Diagnostic::new("/", e.to_string()));
            return (None, diags);
        }
    };
    if !(cfg.eta > 0.0) {
        diags.push(Diagnostic::new("/eta", "eta must be positive"));
    }
    let grid = cfg.grid();
    if grid.is_empty() {
        diags.push(Diagnostic::new("/P_grid", "either P or P_grid is required"));
    }
    for (i, p) in grid.iter().enumerate() {
        if !(*p >= 1.0 && p.is_finite()) {
            diags.push(Diagnostic::new(format!("/P_grid/{i}"), "P must be at least 1"));
        }
    }
    let b = &cfg.budgets;
    if b.series_q == 0 {
        diags.push(Diagnostic::new("/budgets/series_q", "must be at least 1"));
    }
    if b.chi_samples < 1000 {
        diags.push(Diagnostic::new("/budgets/chi_samples", "at least 1000 samples are required"));
    }
    if b.chi_schedule.len() < 3 || b.chi_schedule.windows(2).any(|w| !(w[1] > w[0])) || b.chi_schedule[0] <= 0.0 {
        diags.push(Diagnostic::new("/budgets/chi_schedule", "need at least 3 increasing positive entries"));
    }
    let policy = match TPolicy::parse(&cfg.kernel_policy) {
        Ok(p) => Some(p),
        Err(e) => {
            diags.push(Diagnostic::new("/kernel_policy", e.to_string()));
            None
        }
    };

    let form_path = resolve(base, &cfg.form);
    let form = match read_json(&form_path) {
        Ok(v) => {
            let (f, d) = check_form_value(&v);
            diags.extend(prefixed(&cfg.form.display().to_string(), d));
            f.map(|f| f.form)
        }
        Err(e) => {
            diags.push(Diagnostic::new("/form", e.to_string()));
            None
        }
    };
    let mut linsys = None;
    if let Some(lp) = &cfg.linsys {
        match read_json(&resolve(base, lp)) {
            Ok(v) => {
                let (l, d) = check_linsys_value(&v);
                diags.extend(prefixed(&lp.display().to_string(), d));
                linsys = l;
            }
            Err(e) => diags.push(Diagnostic::new("/linsys", e.to_string())),
        }
    }
    let r = linsys.as_ref().map(|l| l.r()).unwrap_or(0);
    if cfg.tau.len() != r {
        diags.push(Diagnostic::new("/tau", format!("expected {r} entries, got {}", cfg.tau.len())));
    }
    if let (Some(f), Some(l)) = (&form, &linsys) {
        if f.n() != l.n() {
            diags.push(Diagnostic::new("/linsys", format!("n = {} does not match the form's n = {}", l.n(), f.n())));
        }
    }
    let mut decomp = None;
    if let Some(dp) = &cfg.decomp {
        match read_json(&resolve(base, dp)).and_then(|v| decomposition_from_value(&v)) {
            Ok(d) => {
                if let Some(f) = &form {
                    if !verify_h_decomposition(f, &d) {
                        diags.push(Diagnostic::new("/decomp", "decomposition does not expand to the form"));
                    }
                }
                decomp = Some(d);
            }
            Err(e) => diags.push(Diagnostic::new("/decomp", e.to_string())),
        }
    }
    if let Some(f) = &form {
        if cfg.strategy == StrategyChoice::MeetInMiddle && detect_split(f).is_none() {
            diags.push(Diagnostic::new("/strategy", "the form has no additive split"));
        }
    }
    if !diags.is_empty() {
        return (None, diags);
    }
    let loaded = LoadedExperiment {
        config: cfg,
        raw: raw.clone(),
        form: form.unwrap(),
        linsys,
        decomp,
        policy: policy.unwrap(),
    };
    (Some(loaded), diags)
}

/// Schema and invariant problems of a config file, with locations. Empty
/// means the config is runnable.
pub fn validate_config(path: &Path) -> Vec<Diagnostic> {
    match read_json(path) {
        Ok(v) => check_config(&v, path.parent().unwrap_or(Path::new("."))).1,
        Err(e) => vec![Diagnostic::new(path.display().to_string(), e.to_string())],
    }
}

pub fn load_experiment(path: &Path) -> Result<LoadedExperiment> {
    let raw = read_json(path)?;
    match check_config(&raw, path.parent().unwrap_or(Path::new("."))) {
        (Some(l), _) => Ok(l),
        (None, d) => Err(Error::Config(
            d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "),
        )),
    }
}

/// A reported number: exact, or with an error bar.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bar: Option<f64>,
    pub exact: bool,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Quantity {
            value,
            error_bar: None,
            exact: true,
        }
    }

    pub fn approx(value: f64, error_bar: f64) -> Self {
        Quantity {
            value,
            error_bar: Some(error_bar),
            exact: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Holds,
    Fails,
    Undetermined,
}

impl Flag {
    /// Status of `h > threshold` given `lower <= h <= upper`.
    fn h_exceeds(bounds: &HBounds, threshold: usize) -> Flag {
        if bounds.lower > threshold {
            Flag::Holds
        } else if bounds.upper <= threshold {
            Flag::Fails
        } else {
            Flag::Undetermined
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Hypotheses {
    pub n: usize,
    pub r: usize,
    pub h_lower: usize,
    pub h_upper: usize,
    /// `h > 16 + 8r`.
    pub asymptotic_formula: Flag,
    /// `n > 16 + 9r`.
    pub solubility: Flag,
    /// `h > 16`.
    pub equidistribution: Flag,
    /// Whether the linear forms were declared to have no rational
    /// combination; never checked.
    pub irrationality_assumed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesSummary {
    #[serde(rename = "Q")]
    pub big_q: u64,
    pub partial_sum: Quantity,
    pub partial_exact: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSummary {
    pub estimate: Quantity,
    pub converged: bool,
    pub samples: usize,
    pub seed: u64,
    pub table: Vec<ChiRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticRow {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "N_w")]
    pub n_w: Quantity,
    pub zeros_counted: usize,
    pub strategy: Strategy,
    pub main_term: Quantity,
    pub ratio: Quantity,
    pub kernel_rho: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: Value,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub hypotheses: Hypotheses,
    pub singular_series: SeriesSummary,
    pub singular_integral: ChiSummary,
    pub exponent: i64,
    pub rows: Vec<AsymptoticRow>,
    pub notes: Vec<String>,
    pub timings: BTreeMap<&'static str, f64>,
}

impl ExperimentReport {
    /// The report without wall-clock timings; identical across reruns.
    pub fn deterministic_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(m) = &mut v {
            m.remove("timings");
        }
        v
    }
}

fn choose_strategy(choice: StrategyChoice, c: &CubicForm) -> Strategy {
    match choice {
        StrategyChoice::Direct => Strategy::Direct,
        StrategyChoice::MeetInMiddle => Strategy::MeetInMiddle,
        StrategyChoice::Auto => {
            if detect_split(c).is_some() {
                Strategy::MeetInMiddle
            } else {
                Strategy::Direct
            }
        }
    }
}

pub fn run_asymptotic_experiment(exp: &LoadedExperiment) -> Result<ExperimentReport> {
    let cfg = &exp.config;
    let c = &exp.form;
    let n = c.n();
    let r = exp.linsys.as_ref().map(|l| l.r()).unwrap_or(0);
    let mut timings = BTreeMap::new();
    let mut notes = Vec::new();

    let t0 = Instant::now();
    let hb = h_bounds(c, exp.decomp.as_ref(), &SpaceSearch::default())?;
    timings.insert("h_bounds", t0.elapsed().as_secs_f64());
    let hypotheses = Hypotheses {
        n,
        r,
        h_lower: hb.lower,
        h_upper: hb.upper,
        asymptotic_formula: Flag::h_exceeds(&hb, 16 + 8 * r),
        solubility: if n > 16 + 9 * r { Flag::Holds } else { Flag::Fails },
        equidistribution: Flag::h_exceeds(&hb, 16),
        irrationality_assumed: exp.linsys.as_ref().map(|l| l.assume_irrational()).unwrap_or(false),
    };
    if hypotheses.asymptotic_formula != Flag::Holds {
        notes.push(format!(
            "h > 16 + 8r = {} is not certified (h in [{}, {}]); the ratio need not tend to 1",
            16 + 8 * r,
            hb.lower,
            hb.upper
        ));
    }

    let t0 = Instant::now();
    let series = singular_series_truncated(c, cfg.budgets.series_q)?;
    timings.insert("singular_series", t0.elapsed().as_secs_f64());
    let s_value = series.partial_exact.to_f64().unwrap_or(series.partial_sum);

    let t0 = Instant::now();
    let chi = chi_w_schedule(
        c,
        exp.linsys.as_ref(),
        &cfg.budgets.chi_schedule,
        cfg.budgets.chi_samples,
        cfg.seed,
    )?;
    timings.insert("singular_integral", t0.elapsed().as_secs_f64());
    if !chi.converged {
        notes.push("the Schmidt schedule did not converge; chi_w is the last I_L".into());
    }
    if r > 0 && n < r + 4 {
        notes.push(format!("n = {n} < r + 4 = {}: chi_w is expected to be infinite", r + 4));
    }

    let exponent = n as i64 - r as i64 - 3;
    let strategy = choose_strategy(cfg.strategy, c);
    let budget = EnumBudget {
        max_points: cfg.budgets.max_points,
        ..EnumBudget::default()
    };
    let t0 = Instant::now();
    let mut rows = Vec::new();
    for p in cfg.grid() {
        let mut q = CountQuery::new(c.clone(), p)
            .weighted(cfg.weighted)
            .strategy(strategy)
            .keep_solutions(true);
        q.budget = budget;
        if let Some(l) = &exp.linsys {
            q = q.with_constraints(l.clone(), cfg.tau.clone(), cfg.eta);
        }
        let res = count(&q)?;
        let n_w = res.value.as_f64();
        let scale = (2.0 * cfg.eta).powi(r as i32) * p.powi(exponent as i32);
        let main = scale * s_value * chi.value;
        let main_err = (scale * s_value * chi.error_bar).abs();
        let ratio = n_w / main;
        let ratio_err = (ratio * chi.error_bar / chi.value).abs();
        let rho = KernelParams::from_p(cfg.eta, p, exp.policy, Sign::Plus)?.rho;
        rows.push(AsymptoticRow {
            p,
            n_w: Quantity::exact(n_w),
            zeros_counted: res.solutions.map(|s| s.len()).unwrap_or(0),
            strategy,
            main_term: Quantity::approx(main, main_err),
            ratio: Quantity::approx(ratio, ratio_err),
            kernel_rho: rho,
        });
    }
    timings.insert("counting", t0.elapsed().as_secs_f64());

    let mut versions = BTreeMap::new();
    versions.insert("cubiclab", env!("CARGO_PKG_VERSION"));
    versions.insert("report_format", "1");
    Ok(ExperimentReport {
        config: exp.raw.clone(),
        versions,
        hypotheses,
        singular_series: SeriesSummary {
            big_q: series.big_q,
            partial_sum: Quantity::exact(s_value),
            partial_exact: format_rational(&series.partial_exact),
        },
        singular_integral: ChiSummary {
            estimate: Quantity::approx(chi.value, chi.error_bar),
            converged: chi.converged,
            samples: cfg.budgets.chi_samples,
            seed: cfg.seed,
            table: chi.table,
        },
        exponent,
        rows,
        notes,
        timings,
    })
}
