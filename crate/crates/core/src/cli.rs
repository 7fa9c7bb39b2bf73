//! Command-line front end. Every subcommand loads its inputs, calls one
//! library operation and prints the result as JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::construct::solve_system;
use crate::equidist::{equidist_experiment, weyl_sum};
use crate::error::{Error, Result};
use crate::experiment::{load_experiment, run_asymptotic_experiment, validate_config};
use crate::expsums::{complete_sum, complete_sum_crt, sum_g};
use crate::forms::io::{load_decomposition, load_form, load_linsys};
use crate::forms::{h_bounds, verify_h_decomposition, CubicForm, LinearSystem, SpaceSearch};
use crate::kernels::{default_grid, sandwich_check, KernelParams, Sign, TPolicy};
use crate::lattice::{count, detect_split, CountQuery, Strategy};
use crate::sintegral::{chi_w_oscillatory, chi_w_schedule, OscBox};
use crate::sseries::{local_density, positivity_report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ResourceLimit { .. } => EXIT_BUDGET,
        Error::NotConverged(_) | Error::ToleranceNotMet(_) => EXIT_CONVERGENCE,
        Error::Config(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::InvalidInput(_)
        | Error::DimensionMismatch { .. }
        | Error::SplitUnavailable => EXIT_CONFIG,
        Error::InconsistentBounds { .. } | Error::SandwichViolation { .. } | Error::EmptyZeroSet => 1,
    }
}

#[derive(Parser, Debug)]
#[command(name = "cubiclab", version, about = "Integer zeros of cubic forms under linear inequalities")]
struct Cli {
    /// Worker threads (default: CUBICLAB_WORKERS, else all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count zeros in a box, optionally weighted and constrained.
    Count(CountArgs),
    /// Complete and generating exponential sums.
    #[command(subcommand)]
    Expsum(ExpsumCommand),
    /// Truncated singular series, local densities and p-adic certificates.
    Sseries(SseriesArgs),
    /// Singular integral by Schmidt's limit, optionally the oscillatory form.
    Sintegral(SintegralArgs),
    /// Smoothing kernels.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Normalized Weyl sum of `L(x) mod 1` over zeros.
    Weyl(WeylArgs),
    /// Discrepancy and Weyl sums over a P grid.
    Equidist(EquidistArgs),
    /// Search for a zero with `|L(x) - tau| < eta` in the kernel lattice.
    Construct(ConstructArgs),
    /// Compare `N_w(P)` with the predicted main term.
    Asymptotic(AsymptoticArgs),
    /// Check an experiment config.
    Validate { path: PathBuf },
    /// Certified bounds on the h-invariant.
    Hbounds(HboundsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Auto,
    Direct,
    #[value(alias = "meet-in-middle")]
    Mim,
}

impl StrategyArg {
    fn resolve(self, c: &CubicForm) -> Strategy {
        match self {
            StrategyArg::Direct => Strategy::Direct,
            StrategyArg::Mim => Strategy::MeetInMiddle,
            StrategyArg::Auto if detect_split(c).is_some() => Strategy::MeetInMiddle,
            StrategyArg::Auto => Strategy::Direct,
        }
    }
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long)]
    form: PathBuf,
    #[arg(long)]
    linsys: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tau: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long = "P")]
    p: f64,
    #[arg(long)]
    weighted: bool,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    /// Write the counted zeros as CSV.
    #[arg(long)]
    dump_solutions: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ExpsumCommand {
    /// `S_{q,a,avec}`.
    Complete {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        avec: Vec<i64>,
        /// Evaluate through the prime-power factorization.
        #[arg(long)]
        crt: bool,
    },
    /// `g(alpha0, lambda)` over the box `|x| < P`.
    G {
        #[arg(long)]
        form: PathBuf,
        #[arg(long = "P")]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha0: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Vec<f64>,
        #[arg(long)]
        weighted: bool,
    },
}

#[derive(Args, Debug)]
struct SseriesArgs {
    #[arg(long)]
    form: PathBuf,
    #[arg(long = "Q", default_value_t = 50)]
    big_q: u64,
    #[arg(long, default_value_t = 13)]
    pmax: u64,
    /// Largest `k` for the local densities mod `p^k`.
    #[arg(long, default_value_t = 3)]
    depth: u32,
    /// Largest exponent tried for p-adic certificates.
    #[arg(long, default_value_t = 6)]
    mmax: u32,
    #[arg(long, default_value_t = 0.0)]
    psi: f64,
}

#[derive(Args, Debug)]
struct SintegralArgs {
    #[arg(long)]
    form: PathBuf,
    #[arg(long)]
    linsys: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    schedule: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Also integrate the oscillatory representation.
    #[arg(long)]
    oscillatory: bool,
    #[arg(long, default_value_t = 20.0)]
    beta0: f64,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum KernelCommand {
    /// Closed-form versus numerical transforms and the sandwich inequality.
    Check {
        #[arg(long)]
        eta: f64,
        #[arg(long = "P", default_value_t = 100.0)]
        p: f64,
        #[arg(long, default_value = "log")]
        policy: String,
        /// Use this `rho` instead of the policy's.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
struct WeylArgs {
    #[arg(long)]
    form: PathBuf,
    #[arg(long)]
    linsys: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Vec<i64>,
    #[arg(long = "P")]
    p: f64,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
}

#[derive(Args, Debug)]
struct EquidistArgs {
    #[arg(long)]
    form: PathBuf,
    #[arg(long)]
    linsys: PathBuf,
    #[arg(long = "Pgrid", value_delimiter = ',')]
    p_grid: Vec<f64>,
    /// Frequency vectors separated by `;`, components by `,`.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    kset: String,
    #[arg(long, default_value_t = crate::equidist::DEFAULT_BOXES)]
    boxes: usize,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    /// Write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long)]
    form: PathBuf,
    #[arg(long)]
    decomp: PathBuf,
    #[arg(long)]
    linsys: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tau: Vec<f64>,
    #[arg(long)]
    eta: f64,
    #[arg(long = "Y", default_value_t = 500)]
    y: i64,
}

#[derive(Args, Debug)]
struct AsymptoticArgs {
    #[arg(long)]
    config: PathBuf,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HboundsArgs {
    #[arg(long)]
    form: PathBuf,
    #[arg(long)]
    decomp: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    height: i64,
}

fn emit(out: &mut dyn Write, v: &impl Serialize) -> Result<()> {
    let s = serde_json::to_string_pretty(v)?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn form(path: &std::path::Path) -> Result<CubicForm> {
    Ok(load_form(path)?.form)
}

fn parse_kset(s: &str) -> Result<Vec<Vec<i64>>> {
    s.split(';')
        .map(|k| {
            k.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::Config(format!("bad frequency component {v:?} in {s:?}")))
                })
                .collect()
        })
        .collect()
}

fn workers() -> Option<usize> {
    std::env::var("CUBICLAB_WORKERS").ok().and_then(|v| v.parse().ok()).filter(|&n| n > 0)
}

/// Runs the CLI on `args` (including the program name), writing results to
/// `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            if e.use_stderr() {
                eprint!("{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers.or_else(workers) {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| dispatch(cli.command, &mut buf));
    if let Err(e) = out.write_all(&buf).and_then(|_| out.flush()) {
        eprintln!("error: {e}");
        return 1;
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Count(a) => cmd_count(a, out),
        Command::Expsum(ExpsumCommand::Complete {
            form: f,
            q,
            a,
            avec,
            crt,
        }) => {
            let c = form(&f)?;
            let v = if crt {
                complete_sum_crt(&c, q, a, &avec)?
            } else {
                complete_sum(&c, q, a, &avec)?
            };
            emit(out, &v)?;
            Ok(EXIT_OK)
        }
        Command::Expsum(ExpsumCommand::G {
            form: f,
            p,
            alpha0,
            lambda,
            weighted,
        }) => {
            let c = form(&f)?;
            emit(out, &sum_g(&c, p, alpha0, &lambda, weighted)?)?;
            Ok(EXIT_OK)
        }
        Command::Sseries(a) => cmd_sseries(a, out),
        Command::Sintegral(a) => cmd_sintegral(a, out),
        Command::Kernel(KernelCommand::Check {
            eta,
            p,
            policy,
            rho,
            grid,
            tol,
        }) => {
            let kp = match rho {
                Some(rho) => KernelParams::new(eta, rho, Sign::Plus)?,
                None => KernelParams::from_p(eta, p, TPolicy::parse(&policy)?, Sign::Plus)?,
            };
            let report = sandwich_check(&kp, &default_grid(eta, grid), tol)?;
            emit(out, &report)?;
            Ok(EXIT_OK)
        }
        Command::Weyl(a) => {
            let c = form(&a.form)?;
            let l = load_linsys(&a.linsys)?;
            let s = a.strategy.resolve(&c);
            emit(out, &weyl_sum(&c, &l, &a.k, a.p, s)?)?;
            Ok(EXIT_OK)
        }
        Command::Equidist(a) => {
            let c = form(&a.form)?;
            let l = load_linsys(&a.linsys)?;
            let kset = parse_kset(&a.kset)?;
            let t = equidist_experiment(&c, &l, &a.p_grid, &kset, a.boxes, a.seed, a.strategy.resolve(&c))?;
            if let Some(path) = &a.out {
                std::fs::write(path, t.to_csv())?;
            }
            emit(out, &t)?;
            Ok(EXIT_OK)
        }
        Command::Construct(a) => cmd_construct(a, out),
        Command::Asymptotic(a) => {
            let exp = load_experiment(&a.config)?;
            let report = run_asymptotic_experiment(&exp)?;
            if let Some(path) = &a.out {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
            emit(out, &report)?;
            Ok(EXIT_OK)
        }
        Command::Validate { path } => {
            let diags = validate_config(&path);
            emit(out, &json!({ "clean": diags.is_empty(), "diagnostics": diags }))?;
            Ok(if diags.is_empty() { EXIT_OK } else { EXIT_CONFIG })
        }
        Command::Hbounds(a) => {
            let c = form(&a.form)?;
            let d = a.decomp.as_deref().map(load_decomposition).transpose()?;
            emit(out, &h_bounds(&c, d.as_ref(), &SpaceSearch::with_height(a.height))?)?;
            Ok(EXIT_OK)
        }
    }
}

fn cmd_count(a: CountArgs, out: &mut dyn Write) -> Result<i32> {
    let c = form(&a.form)?;
    let strategy = a.strategy.resolve(&c);
    let mut q = CountQuery::new(c, a.p)
        .weighted(a.weighted)
        .strategy(strategy)
        .keep_solutions(a.dump_solutions.is_some());
    if let Some(lp) = &a.linsys {
        q = q.with_constraints(load_linsys(lp)?, a.tau.clone(), a.eta);
    }
    let t0 = Instant::now();
    let res = count(&q)?;
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    if let (Some(path), Some(sols)) = (&a.dump_solutions, &res.solutions) {
        let mut csv = String::new();
        for x in sols {
            let row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            writeln!(csv, "{}", row.join(",")).unwrap();
        }
        std::fs::write(path, csv)?;
    }
    emit(
        out,
        &json!({
            "value": res.value,
            "points_examined": res.points_examined,
            "strategy": strategy,
            "wall_ms": wall_ms,
        }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_sseries(a: SseriesArgs, out: &mut dyn Write) -> Result<i32> {
    let c = form(&a.form)?;
    let report = positivity_report(&c, a.pmax, a.mmax, a.big_q, a.psi)?;
    let mut local = Vec::new();
    let mut skipped = Vec::new();
    for p in (2..=a.pmax).filter(|&p| crate::arith::is_prime(p)) {
        for k in 1..=a.depth {
            match local_density(&c, p, k) {
                Ok(d) => local.push(serde_json::to_value(&d)?),
                Err(Error::ResourceLimit { .. }) => {
                    skipped.push(json!({ "p": p, "k": k }));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }
    emit(
        out,
        &json!({
            "partial_sum": report.series.partial_sum,
            "partial_exact": crate::forms::io::format_rational(&report.series.partial_exact),
            "per_q": report.series.terms,
            "local": local,
            "local_skipped_over_budget": skipped,
            "certificates": report.certificates,
            "all_certified": report.all_certified,
            "h_lower": report.h_lower,
            "sbound_constant": report.sbound_constant,
            "sbound_qmax": report.sbound_qmax,
            "tail_heuristic": report.tail_heuristic,
            "tail_note": report.tail_note,
        }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_sintegral(a: SintegralArgs, out: &mut dyn Write) -> Result<i32> {
    let c = form(&a.form)?;
    let l: Option<LinearSystem> = a.linsys.as_deref().map(load_linsys).transpose()?;
    let est = chi_w_schedule(&c, l.as_ref(), &a.schedule, a.samples, a.seed)?;
    let mut v = serde_json::to_value(&est)?;
    if a.oscillatory {
        let osc = chi_w_oscillatory(
            &c,
            l.as_ref(),
            OscBox {
                beta0: a.beta0,
                alpha: a.alpha,
            },
            a.tol,
        )?;
        v["oscillatory"] = serde_json::to_value(&osc)?;
    }
    emit(out, &v)?;
    if est.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: not converged: differences along the L schedule do not decrease");
        Ok(EXIT_CONVERGENCE)
    }
}

fn cmd_construct(a: ConstructArgs, out: &mut dyn Write) -> Result<i32> {
    let c = form(&a.form)?;
    let d = load_decomposition(&a.decomp)?;
    let l = load_linsys(&a.linsys)?;
    let sol = solve_system(&c, &d, &l, &a.tau, a.eta, a.y)?;
    let unchecked = ["algebraic independence of the linear-form coefficients"];
    let v: Value = match sol {
        None => json!({
            "found": false,
            "message": "not found within bound",
            "Y": a.y,
            "unchecked_assumptions": unchecked,
        }),
        Some(s) => {
            // Re-check with the counting module's constraint test and exact evaluation.
            let q = CountQuery::new(c.clone(), 1.0).with_constraints(l.clone(), a.tau.clone(), a.eta);
            let cubic_value = c.eval(&s.x)?;
            json!({
                "found": true,
                "x": s.x,
                "y": s.y,
                "shell": s.shell,
                "kernel_basis": s.basis,
                "verification": {
                    "decomposition_verified": verify_h_decomposition(&c, &d),
                    "cubic_value": cubic_value.to_string(),
                    "linear_values": s.linear_values,
                    "max_deviation": s.max_deviation,
                    "constraints_hold": q.satisfies_constraints(&s.x),
                },
                "unchecked_assumptions": unchecked,
            })
        }
    };
    emit(out, &v)?;
    Ok(EXIT_OK)
}
