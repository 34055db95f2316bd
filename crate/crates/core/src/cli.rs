//! Command-line front end. JSON for single reports, CSV for sweeps.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 bad usage or input.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bounds::{self, c_ls, pq_cls};
use crate::error::{Error, Result};
use crate::format::{fmt_f64, json_document, Metadata};
use crate::hypercube::{BooleanFunction, FamilySpec, PermutationGenerators, DEFAULT_MAX_ARITY};
use crate::measure::{self, Bias, CubeFunction};
use crate::montecarlo::{self, connectivity_oracle, FamilyOracle, Oracle, Sampler, TableOracle};
use crate::suites::{self, SuiteConfig};
use crate::threshold::{self, ClosedFormCurve, ExactCurve, MeasureCurve};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SHARP_THRESHOLD_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sharp-threshold",
    version,
    about = "Influences, thresholds and sharp-threshold bounds on the biased hypercube"
)]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Largest arity allowed in exact (tabulated) mode.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ARITY)]
    max_arity: usize,
    /// Worker threads [default: $SHARP_THRESHOLD_WORKERS or 1].
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Influences, Russo derivative, energy and the max-influence bound of one function.
    Analyze(AnalyzeArgs),
    /// Tabulates mu, its derivative and c_ls along a p-grid (CSV).
    Sweep(SweepArgs),
    /// Threshold location and width, with the width bounds for symmetric sets.
    Threshold(ThresholdArgs),
    /// Runs a named verification suite.
    Verify(VerifyArgs),
    /// Monte Carlo estimates for oracle-defined functions.
    Mc {
        #[command(subcommand)]
        command: McCommand,
    },
}

#[derive(Debug, Clone, Args)]
struct FunctionArgs {
    /// Built-in family: dictator, and, or, majority, parity, tribes, cyclic_run.
    #[arg(long, conflicts_with = "table")]
    family: Option<String>,
    /// Packed table `n=<arity>:hex=<digits>`.
    #[arg(long)]
    table: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Coordinate of a dictator (1-based).
    #[arg(long)]
    i: Option<usize>,
    /// Tribe size.
    #[arg(long)]
    k: Option<usize>,
    /// Number of tribes.
    #[arg(long)]
    m: Option<usize>,
    /// Run length of cyclic_run.
    #[arg(long)]
    len: Option<usize>,
    /// Symmetry generators in cycle notation, e.g. "(1 2),(1 2 3 4)".
    #[arg(long)]
    gens: Option<String>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long)]
    p: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepFunc {
    Cls,
    Pqcls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Tabulate only c_ls or p(1-p) c_ls.
    #[arg(long, value_enum)]
    func: Option<SweepFunc>,
    #[command(flatten)]
    function: FunctionArgs,
    /// `start:stop:step`, inclusive.
    #[arg(long)]
    grid: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long)]
    eps: f64,
    /// Bisection tolerance.
    #[arg(long, default_value_t = threshold::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n_max: Option<u64>,
    /// Also fail on findings that disagree with a stated claim.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct McFunctionArgs {
    /// A built-in family, or `connectivity` (with --m vertices).
    #[arg(long, conflicts_with = "table")]
    family: Option<String>,
    #[arg(long)]
    table: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    len: Option<usize>,
    /// Dictator coordinate when --family dictator.
    #[arg(long = "dictator-i")]
    dictator_i: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum McCommand {
    /// Estimates mu_p.
    Mu {
        #[command(flatten)]
        function: McFunctionArgs,
        #[arg(long)]
        p: f64,
    },
    /// Estimates the influence of coordinate i.
    Influence {
        #[command(flatten)]
        function: McFunctionArgs,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Coordinate (1-based).
        #[arg(long)]
        i: usize,
    },
    /// Estimates p(alpha) by sequential bisection.
    Threshold {
        #[command(flatten)]
        function: McFunctionArgs,
        #[arg(long)]
        alpha: f64,
        /// Width of the final p-bracket.
        #[arg(long, default_value_t = 1e-3)]
        tol_p: f64,
        /// Largest sample count per bisection step.
        #[arg(long, default_value_t = montecarlo::DEFAULT_SAMPLE_CAP)]
        cap: u64,
    },
}

/// Parses arguments, runs, writes output, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((text, ok)) => {
            if let Err(e) = emit(&cli, &text) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
            if ok {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn workers(cli: &Cli) -> Result<usize> {
    if let Some(w) = cli.workers {
        return Ok(w.max(1));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|w| w.max(1))
            .map_err(|_| Error::InvalidArgument(format!("{WORKERS_ENV}={v} is not a count"))),
        Err(_) => Ok(1),
    }
}

/// Returns the rendered output and whether every asserted check passed.
fn execute(cli: &Cli) -> Result<(String, bool)> {
    match &cli.command {
        Command::Analyze(a) => analyze(cli, a),
        Command::Sweep(a) => sweep(cli, a),
        Command::Threshold(a) => threshold_cmd(cli, a),
        Command::Verify(a) => verify(cli, a),
        Command::Mc { command } => mc(cli, command),
    }
}

struct Resolved {
    table: BooleanFunction,
    family: Option<FamilySpec>,
    gens: Option<PermutationGenerators>,
}

fn family_spec(f: &FunctionArgs) -> Result<Option<FamilySpec>> {
    f.family
        .as_deref()
        .map(|name| FamilySpec::from_parts(name, f.n, f.i, f.k, f.m, f.len))
        .transpose()
}

fn cap_hint(e: Error) -> Error {
    match e {
        Error::ArityCap { n, cap } => Error::InvalidArgument(format!(
            "arity {n} exceeds the exact-mode cap {cap}; raise --max-arity or use the `mc` commands"
        )),
        other => other,
    }
}

fn resolve(cli: &Cli, f: &FunctionArgs) -> Result<Resolved> {
    let family = family_spec(f)?;
    let table = match (&family, &f.table) {
        (Some(spec), None) => spec.instance_capped(cli.max_arity).map_err(cap_hint)?,
        (None, Some(hex)) => {
            BooleanFunction::parse_hex_capped(hex, cli.max_arity).map_err(cap_hint)?
        }
        _ => {
            return Err(Error::InvalidArgument(
                "give exactly one of --family or --table".into(),
            ))
        }
    };
    let gens = match &f.gens {
        Some(g) => Some(PermutationGenerators::parse(table.arity(), g)?),
        None => family.and_then(|s| s.symmetry_generators()),
    };
    Ok(Resolved {
        table,
        family,
        gens,
    })
}

fn describe(r: &Resolved) -> String {
    r.family
        .map_or_else(|| r.table.to_hex_string(), |s| s.to_string())
}

fn num(x: f64) -> Value {
    json!(fmt_f64(x))
}

fn analyze(cli: &Cli, a: &AnalyzeArgs) -> Result<(String, bool)> {
    let r = resolve(cli, &a.function)?;
    let p = Bias::new(a.p)?;
    let f = &r.table;
    let g = CubeFunction::from_boolean(f);
    let inf = measure::influences(f, p);
    let mut meta = Metadata::new("analyze");
    meta.push("function", describe(&r));
    meta.push("p", fmt_f64(p.p()));
    let mut body = json!({
        "n": f.arity(),
        "table": f.to_hex_string(),
        "p": num(p.p()),
        "mu": num(measure::expectation(&g, p)),
        "variance": num(measure::variance(&g, p)),
        "influences": inf.values().iter().map(|&v| num(v)).collect::<Vec<_>>(),
        "total_influence": num(inf.total()),
        "max_influence": num(inf.max()),
        "russo_derivative": num(measure::derivative_of_expectation(&g, p)),
        "energy": num(measure::energy(&g, p)),
        "entropy": num(measure::entropy(&g, p)?),
        "c_ls": num(c_ls(p)),
    });
    let mut ok = true;
    if f.arity() >= 2 {
        let t = bounds::thm42_check(f, p)?;
        ok &= t.report.pass;
        body["max_influence_bound"] = t.report.to_json();
    }
    Ok((json_document(&meta, body), ok))
}

/// Inclusive `start:stop:step` grid, rounded to 12 decimals.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("grid `{s}` is not start:stop:step"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidArgument(format!(
            "grid `{s}` must have step > 0 and start <= stop"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect();
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(format!(
                "grid `{s}` is not strictly increasing"
            )));
        }
    }
    if let Some(&bad_p) = grid.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::InvalidBias(bad_p));
    }
    Ok(grid)
}

pub const SWEEP_HEADER: &str = "p,mu,dmu_dp,c_ls,pq_cls,thm41_rhs,pass";

fn sweep(cli: &Cli, a: &SweepArgs) -> Result<(String, bool)> {
    let grid = parse_grid(&a.grid)?;
    let has_function = a.function.family.is_some() || a.function.table.is_some();
    let resolved = match (a.func, has_function) {
        (Some(_), true) => {
            return Err(Error::InvalidArgument(
                "--func cannot be combined with a function".into(),
            ))
        }
        (None, false) => {
            return Err(Error::InvalidArgument(
                "give --func, --family or --table".into(),
            ))
        }
        (Some(_), false) => None,
        (None, true) => Some(resolve(cli, &a.function)?),
    };
    let mut meta = Metadata::new("sweep");
    meta.push("grid", &a.grid);
    if let Some(func) = a.func {
        meta.push("func", format!("{func:?}").to_lowercase());
    }
    let symmetric = match &resolved {
        Some(r) => {
            meta.push("function", describe(r));
            r.table.arity() >= 2
                && r.table.is_monotone()
                && !r.table.is_constant()
                && bounds::check_symmetric_monotone(&r.table, r.gens.as_ref()).is_ok()
        }
        None => false,
    };
    let curve = resolved.as_ref().map(|r| ExactCurve::unchecked(&r.table));
    let s = resolved
        .as_ref()
        .filter(|r| r.table.arity() >= 2)
        .map(|r| bounds::s_of_n(r.table.arity() as u64))
        .transpose()?;
    let mut ok = true;
    let mut rows = Vec::with_capacity(grid.len());
    for &x in &grid {
        let p = Bias::new(x)?;
        let mut row = Row {
            p: x,
            mu: None,
            dmu: None,
            c_ls: c_ls(p),
            pq_cls: pq_cls(p),
            rhs: None,
            pass: None,
        };
        if let (Some(curve), Some(r)) = (&curve, &resolved) {
            let mu = curve.mu(p);
            row.mu = Some(mu);
            row.dmu = Some(measure::influences(&r.table, p).total());
            if let Some(s) = &s {
                row.rhs = Some(s.value / (p.variance() * c_ls(p)) * mu * (1.0 - mu));
            }
            if symmetric {
                let rep = bounds::thm41_check(&r.table, p, r.gens.as_ref())?;
                ok &= rep.pass;
                row.pass = Some(rep.pass);
            }
        }
        rows.push(row);
    }
    let text = match a.format {
        Format::Csv => {
            let mut out = meta.csv_preamble();
            out.push_str(SWEEP_HEADER);
            out.push('\n');
            for r in &rows {
                out.push_str(&r.csv());
                out.push('\n');
            }
            out
        }
        Format::Json => json_document(
            &meta,
            json!({ "rows": rows.iter().map(Row::json).collect::<Vec<_>>() }),
        ),
    };
    Ok((text, ok))
}

struct Row {
    p: f64,
    mu: Option<f64>,
    dmu: Option<f64>,
    c_ls: f64,
    pq_cls: f64,
    rhs: Option<f64>,
    pass: Option<bool>,
}

impl Row {
    fn csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            fmt_f64(self.p),
            opt(self.mu),
            opt(self.dmu),
            fmt_f64(self.c_ls),
            fmt_f64(self.pq_cls),
            opt(self.rhs),
            self.pass.map(|b| b.to_string()).unwrap_or_default()
        )
    }

    fn json(&self) -> Value {
        json!({
            "p": num(self.p),
            "mu": self.mu.map(num),
            "dmu_dp": self.dmu.map(num),
            "c_ls": num(self.c_ls),
            "pq_cls": num(self.pq_cls),
            "thm41_rhs": self.rhs.map(num),
            "pass": self.pass,
        })
    }
}

fn threshold_cmd(cli: &Cli, a: &ThresholdArgs) -> Result<(String, bool)> {
    let mut meta = Metadata::new("threshold");
    meta.push("eps", fmt_f64(a.eps));
    meta.push("tol", fmt_f64(a.tol));
    let family = family_spec(&a.function)?;
    // closed forms let the width be computed past the exact-mode cap
    if let Some(spec) = family.filter(|s| s.arity() > cli.max_arity) {
        let curve = ClosedFormCurve::new(spec).map_err(|_| {
            Error::InvalidArgument(format!(
                "arity {} exceeds the exact-mode cap {} and `{spec}` has no closed form; use `mc threshold`",
                spec.arity(),
                cli.max_arity
            ))
        })?;
        meta.push("function", spec);
        meta.push("mode", "closed_form");
        let t = threshold::threshold_width(&curve, a.eps, a.tol)?;
        let mut body = json!({ "n": spec.arity(), "threshold": threshold_json(&t) });
        let bounds = match spec.symmetry_generators() {
            Some(_) if spec.arity() >= 2 => bounds::cor43_from_curve(&curve, a.eps, a.tol),
            Some(_) => Err(Error::ArityTooSmall {
                n: spec.arity(),
                min: 2,
            }),
            None => Err(Error::NoSymmetry),
        };
        let ok = attach_bounds(&mut body, bounds)?;
        return Ok((json_document(&meta, body), ok));
    }
    let r = resolve(cli, &a.function)?;
    meta.push("function", describe(&r));
    let curve = ExactCurve::new(&r.table)?;
    let t = threshold::threshold_width(&curve, a.eps, a.tol)?;
    let mut body = json!({ "n": r.table.arity(), "threshold": threshold_json(&t) });
    let ok = attach_bounds(
        &mut body,
        bounds::cor43_check(&r.table, a.eps, r.gens.as_ref(), a.tol),
    )?;
    Ok((json_document(&meta, body), ok))
}

/// Adds the width bounds to `body`, or the reason they are not asserted.
fn attach_bounds(body: &mut Value, bounds: Result<bounds::Cor43Report>) -> Result<bool> {
    match bounds {
        Ok(c) => {
            body["sup_pq_cls"] = num(c.sup_pq_cls);
            body["width_sup_bound"] = c.r18.to_json();
            body["width_sup_bound_quarter"] = c.r18_quarter.to_json();
            body["width_log_odds_bound"] = c.r19.to_json();
            Ok(c.r18.pass && c.r19.pass)
        }
        Err(
            e @ (Error::NoSymmetry
            | Error::NotInvariant
            | Error::NotTransitive
            | Error::ArityTooSmall { .. }),
        ) => {
            body["bounds"] = json!(format!("not asserted: {e}"));
            Ok(true)
        }
        Err(e) => Err(e),
    }
}

fn threshold_json(t: &threshold::ThresholdResult) -> Value {
    json!({
        "eps": num(t.eps),
        "p_lo": num(t.p_lo),
        "p_hi": num(t.p_hi),
        "width": num(t.width),
        "iterations": t.iterations,
    })
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<(String, bool)> {
    let config = SuiteConfig {
        trials: a.trials,
        seed: a.seed,
        p: a.p,
        n_max: a.n_max,
        workers: workers(cli)?,
    };
    let outcome = suites::run_suite(&a.suite, &config)?;
    let mut meta = Metadata::new("verify").seed(a.seed);
    meta.push("suite", &a.suite);
    if let Some(t) = a.trials {
        meta.push("trials", t);
    }
    if let Some(p) = a.p {
        meta.push("p", fmt_f64(p));
    }
    if let Some(n) = a.n_max {
        meta.push("n_max", n);
    }
    if a.strict {
        meta.push("strict", true);
    }
    let ok = outcome.pass() && !(a.strict && !outcome.discrepancies.is_empty());
    Ok((json_document(&meta, outcome.to_json()), ok))
}

fn oracle(cli: &Cli, f: &McFunctionArgs) -> Result<Box<dyn Oracle>> {
    match (&f.family, &f.table) {
        (Some(name), None) if name == "connectivity" => {
            let m =
                f.m.ok_or_else(|| Error::BadFamily("family `connectivity` needs `m`".into()))?;
            Ok(Box::new(connectivity_oracle(m)?))
        }
        (Some(name), None) => Ok(Box::new(FamilyOracle::new(FamilySpec::from_parts(
            name,
            f.n,
            f.dictator_i,
            f.k,
            f.m,
            f.len,
        )?)?)),
        (None, Some(hex)) => Ok(Box::new(TableOracle::new(
            BooleanFunction::parse_hex_capped(hex, cli.max_arity).map_err(cap_hint)?,
        ))),
        _ => Err(Error::InvalidArgument(
            "give exactly one of --family or --table".into(),
        )),
    }
}

fn mc(cli: &Cli, command: &McCommand) -> Result<(String, bool)> {
    let w = workers(cli)?;
    let (name, f) = match command {
        McCommand::Mu { function, .. } => ("mc mu", function),
        McCommand::Influence { function, .. } => ("mc influence", function),
        McCommand::Threshold { function, .. } => ("mc threshold", function),
    };
    let o = oracle(cli, f)?;
    let sampler = Sampler::new(f.seed).workers(w);
    let mut meta = Metadata::new(name).seed(f.seed);
    meta.push("function", o.describe());
    meta.push("samples", f.samples);
    meta.push("workers", w);
    let body = match command {
        McCommand::Mu { p, .. } => {
            meta.push("p", fmt_f64(*p));
            let e = montecarlo::estimate_mu(o.as_ref(), Bias::new(*p)?, f.samples, sampler)?;
            json!({ "n": o.arity(), "estimate": e })
        }
        McCommand::Influence { p, i, .. } => {
            meta.push("p", fmt_f64(*p));
            meta.push("i", i);
            let e =
                montecarlo::estimate_influence(o.as_ref(), Bias::new(*p)?, *i, f.samples, sampler)?;
            json!({ "n": o.arity(), "estimate": e })
        }
        McCommand::Threshold {
            alpha, tol_p, cap, ..
        } => {
            meta.push("alpha", fmt_f64(*alpha));
            meta.push("tol_p", fmt_f64(*tol_p));
            meta.push("cap", cap);
            let t =
                montecarlo::mc_p_of_alpha(o.as_ref(), *alpha, f.samples, *tol_p, *cap, sampler)?;
            json!({ "n": o.arity(), "threshold": t })
        }
    };
    Ok((json_document(&meta, body), true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("0.01:0.99:0.01").unwrap();
        assert_eq!(g.len(), 99);
        assert_eq!(g[29], 0.3);
        assert_eq!(*g.last().unwrap(), 0.99);
        assert!(parse_grid("0:1:0.5").is_err());
        assert!(parse_grid("0.5:0.1:0.1").is_err());
        assert!(parse_grid("0.1:0.5").is_err());
        assert!(parse_grid("0.1:0.5:0").is_err());
    }
}
