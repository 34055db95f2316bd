//! Named verification suites run by `verify` and by the acceptance tests.
//!
//! Random instances are drawn from ChaCha8 seeded with the suite seed;
//! trial `t` uses stream `t`, so every trial can be replayed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bounds::{self, c_ls, EXACT_TOL, SOLVER_TOL};
use crate::error::{Error, Result};
use crate::hypercube::{BooleanFunction, FamilySpec};
use crate::martingale::{self, IncrementSign};
use crate::measure::{self, Bias, CubeFunction};
use crate::report::BoundReport;
use crate::threshold::{self, mu_of_p};

pub const SUITES: [&str; 11] = [
    "russo",
    "moment",
    "adjoint",
    "lsi",
    "poincare",
    "martingale",
    "thm42",
    "thm41",
    "cor43",
    "sn-claims",
    "exhaustive-n4",
];

pub const BIASES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
pub const RUSSO_BIASES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const FD_STEP: f64 = 1e-6;
pub const FD_TOL: f64 = 1e-5;
pub const COR43_EPS: [f64; 4] = [0.05, 0.1, 0.25, 0.4];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// Random instances per bias (or per arity); `None` uses the suite default.
    pub trials: Option<usize>,
    pub seed: u64,
    /// Restricts the suite to one bias where that makes sense.
    pub p: Option<f64>,
    pub n_max: Option<u64>,
    pub workers: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: None,
            seed: 42,
            p: None,
            n_max: None,
            workers: 1,
        }
    }
}

impl SuiteConfig {
    fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn biases_or(&self, default: &[f64]) -> Result<Vec<Bias>> {
        match self.p {
            Some(p) => Ok(vec![Bias::new(p)?]),
            None => default.iter().map(|&p| Bias::new(p)).collect(),
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// The result of one suite: one summary line per check kind, every failing
/// record, and findings that are reported but never fail the suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub suite: String,
    pub checks: usize,
    pub summaries: Vec<BoundReport>,
    pub failures: Vec<BoundReport>,
    pub findings: Vec<(String, String)>,
    /// Keys of findings that disagree with a stated claim.
    pub discrepancies: Vec<String>,
}

/// Failure records kept verbatim; the rest are only counted.
const MAX_FAILURE_RECORDS: usize = 50;

impl SuiteOutcome {
    fn new(suite: &str) -> Self {
        SuiteOutcome {
            suite: suite.to_string(),
            checks: 0,
            summaries: Vec::new(),
            failures: Vec::new(),
            findings: Vec::new(),
            discrepancies: Vec::new(),
        }
    }

    /// Records a group of reports under one summary line.
    fn group(&mut self, label: &str, reports: Vec<BoundReport>) {
        self.checks += reports.len();
        for r in &reports {
            if !r.pass && self.failures.len() < MAX_FAILURE_RECORDS {
                self.failures.push(r.clone());
            }
        }
        if let Some(summary) = BoundReport::worst_of(label, reports) {
            self.summaries.push(summary);
        }
    }

    fn finding(&mut self, key: impl Into<String>, value: impl ToString) {
        self.findings.push((key.into(), value.to_string()));
    }

    fn discrepancy(&mut self, key: &str, value: impl ToString, flagged: bool) {
        self.finding(key, value);
        if flagged {
            self.discrepancies.push(key.to_string());
        }
    }

    pub fn failure_count(&self) -> usize {
        self.summaries
            .iter()
            .filter_map(|s| s.context_value("failures"))
            .map(|v| v.parse::<usize>().unwrap_or(0))
            .sum()
    }

    pub fn pass(&self) -> bool {
        self.summaries.iter().all(|s| s.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "pass": self.pass(),
            "checks": self.checks,
            "failures": self.failure_count(),
            "summaries": self.summaries.iter().map(BoundReport::to_json).collect::<Vec<_>>(),
            "failure_records": self.failures.iter().map(BoundReport::to_json).collect::<Vec<_>>(),
            "findings": self.findings.iter().map(|(k, v)| json!({"key": k, "value": v})).collect::<Vec<_>>(),
            "discrepancies": self.discrepancies,
        })
    }
}

pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<SuiteOutcome> {
    let run = || match name {
        "russo" => russo(config),
        "moment" => moment(config),
        "adjoint" => adjoint(config),
        "lsi" => lsi(config),
        "poincare" => poincare(config),
        "martingale" => martingale_suite(config),
        "thm42" => thm42(config),
        "thm41" => thm41(config),
        "cor43" => cor43(config),
        "sn-claims" => sn_claims(config),
        "exhaustive-n4" => exhaustive_n4(config),
        other => Err(Error::InvalidArgument(format!(
            "unknown suite '{other}'; expected one of {}",
            SUITES.join(", ")
        ))),
    };
    if config.workers > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(run)
    } else {
        run()
    }
}

/// A uniformly random table on `n` coordinates.
pub fn random_boolean(n: usize, rng: &mut impl Rng) -> BooleanFunction {
    let words = ((1usize << n).div_ceil(64)).max(1);
    BooleanFunction::from_words(n, (0..words).map(|_| rng.random()).collect())
        .expect("n within cap")
}

/// The up-closure of one to six random points, each coordinate present
/// with a probability drawn per point.
pub fn random_monotone(n: usize, rng: &mut impl Rng) -> BooleanFunction {
    let count = rng.random_range(1..=6);
    let generators: Vec<usize> = (0..count)
        .map(|_| {
            let density: f64 = rng.random_range(0.1..0.9);
            (0..n)
                .filter(|_| rng.random_bool(density))
                .fold(0, |x, i| x | 1 << i)
        })
        .collect();
    BooleanFunction::from_fn(n, |x| generators.iter().any(|&g| g & !x == 0)).expect("n within cap")
}

/// Values uniform in `[-1, 1]`.
pub fn random_real(n: usize, rng: &mut impl Rng) -> CubeFunction {
    CubeFunction::new(
        n,
        (0..1usize << n)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect(),
    )
    .expect("length matches")
}

/// Runs `trial(t, rng)` for `t` in `0..count` on stream `offset + t`, in
/// parallel, preserving order.
fn per_trial<T: Send>(
    config: &SuiteConfig,
    offset: u64,
    count: usize,
    trial: impl Fn(usize, &mut ChaCha8Rng) -> T + Sync,
) -> Vec<T> {
    (0..count)
        .into_par_iter()
        .map(|t| trial(t, &mut config.rng(offset + t as u64)))
        .collect()
}

fn central_difference(f: &BooleanFunction, p: f64) -> f64 {
    let up = mu_of_p(f, Bias::new(p + FD_STEP).unwrap());
    let down = mu_of_p(f, Bias::new(p - FD_STEP).unwrap());
    (up - down) / (2.0 * FD_STEP)
}

fn russo(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let biases = config.biases_or(&RUSSO_BIASES)?;
    let trials = config.trials_or(200);
    let mut out = SuiteOutcome::new("russo");
    let check = |label: &str, analytic: f64, f: &BooleanFunction, n: usize, p: Bias, t: usize| {
        let fd = central_difference(f, p.p());
        BoundReport::at_most(
            label,
            (analytic - fd).abs() / analytic.abs().max(1.0),
            FD_TOL,
            0.0,
        )
        .with("trial", t)
        .with("n", n)
        .with_f64("p", p.p())
        .with_f64("analytic", analytic)
        .with_f64("finite_difference", fd)
        .with("table", f.to_hex_string())
    };
    let monotone = per_trial(config, 0, trials, |t, rng| {
        let n = rng.random_range(1..=10);
        let f = random_monotone(n, rng);
        biases
            .iter()
            .map(|&p| {
                check(
                    "sum_influences_vs_fd",
                    measure::influences(&f, p).total(),
                    &f,
                    n,
                    p,
                    t,
                )
            })
            .collect::<Vec<_>>()
    });
    out.group(
        "sum_influences_vs_fd",
        monotone.into_iter().flatten().collect(),
    );
    let arbitrary = per_trial(config, 1 << 20, trials, |t, rng| {
        let n = rng.random_range(1..=10);
        let f = random_boolean(n, rng);
        let g = CubeFunction::from_boolean(&f);
        biases
            .iter()
            .map(|&p| {
                check(
                    "derivative_vs_fd",
                    measure::derivative_of_expectation(&g, p),
                    &f,
                    n,
                    p,
                    t,
                )
            })
            .collect::<Vec<_>>()
    });
    out.group(
        "derivative_vs_fd",
        arbitrary.into_iter().flatten().collect(),
    );
    Ok(out)
}

fn moment(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let biases = config.biases_or(&BIASES)?;
    let trials = config.trials_or(100);
    let mut out = SuiteOutcome::new("moment");
    let reports = per_trial(config, 0, trials, |t, rng| {
        let n = rng.random_range(1..=8);
        let f = CubeFunction::from_boolean(&random_boolean(n, rng));
        let mut rs = Vec::new();
        for &p in &biases {
            for i in 1..=n {
                for alpha in [1.0, 2.0] {
                    let (lhs, rhs) = measure::moment_ratio(&f, p, i, alpha).unwrap();
                    rs.push(
                        BoundReport::equal("moment_identity", lhs, rhs, EXACT_TOL)
                            .with("trial", t)
                            .with("i", i)
                            .with_f64("alpha", alpha)
                            .with_f64("p", p.p()),
                    );
                }
            }
        }
        rs
    });
    out.group("moment_identity", reports.into_iter().flatten().collect());
    Ok(out)
}

fn adjoint(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let biases = config.biases_or(&BIASES)?;
    let trials = config.trials_or(100);
    let mut out = SuiteOutcome::new("adjoint");
    let reports = per_trial(config, 0, trials, |t, rng| {
        let n = rng.random_range(1..=8);
        let f = random_real(n, rng);
        let g = random_real(n, rng);
        let mut rs = Vec::new();
        for &p in &biases {
            for i in 1..=n {
                let dg = measure::delta(&g, p, i).unwrap();
                let df = measure::delta(&f, p, i).unwrap();
                let lhs = measure::inner(&f, &dg, p).unwrap();
                let rhs = measure::inner(&df, &dg, p).unwrap();
                rs.push(
                    BoundReport::equal("adjointness", lhs, rhs, EXACT_TOL)
                        .with("trial", t)
                        .with("i", i)
                        .with_f64("p", p.p()),
                );
                let case_form = measure::delta_via_gradient(&g, p, i).unwrap();
                rs.push(
                    BoundReport::equal(
                        "delta_case_form",
                        dg.max_abs_diff(&case_form),
                        0.0,
                        EXACT_TOL,
                    )
                    .with("trial", t)
                    .with("i", i)
                    .with_f64("p", p.p()),
                );
            }
        }
        rs
    });
    let (adj, case): (Vec<_>, Vec<_>) = reports
        .into_iter()
        .flatten()
        .partition(|r| r.label == "adjointness");
    out.group("adjointness", adj);
    out.group("delta_case_form", case);
    Ok(out)
}

fn lsi(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let biases = config.biases_or(&BIASES)?;
    let trials = config.trials_or(500);
    let mut out = SuiteOutcome::new("lsi");
    let mut squared = Vec::new();
    let mut literal_violations = 0usize;
    let mut literal_checks = 0usize;
    for (b, &p) in biases.iter().enumerate() {
        let rows = per_trial(config, (b as u64) << 24, trials, |t, rng| {
            let n = rng.random_range(1..=8);
            let g = random_real(n, rng);
            let r = bounds::lsi_check(&g, p).with("trial", t);
            // the unsquared form, for nonnegative g only
            let literal = bounds::lsi_literal_check(&g.map(f64::abs), p).unwrap();
            (r, literal.pass)
        });
        for (r, literal_pass) in rows {
            squared.push(r);
            literal_checks += 1;
            literal_violations += usize::from(!literal_pass);
        }
    }
    out.group("lsi_squared", squared);
    let tightness = biases
        .iter()
        .map(|&p| {
            let t = bounds::lsi_tightness_two_point(p);
            BoundReport::at_most("two_point_tightness", t.c_ls - t.ratio, 1e-3, 0.0)
                .with_f64("p", p.p())
                .with_f64("ratio", t.ratio)
                .with_f64("c_ls", t.c_ls)
                .with_f64("at", t.at)
        })
        .collect();
    out.group("two_point_tightness", tightness);
    let overshoot = biases
        .iter()
        .map(|&p| {
            let t = bounds::lsi_tightness_two_point(p);
            BoundReport::at_most("two_point_below_constant", t.ratio, t.c_ls, EXACT_TOL)
                .with_f64("p", p.p())
        })
        .collect();
    out.group("two_point_below_constant", overshoot);
    out.finding("unsquared_form_checks", literal_checks);
    out.discrepancy(
        "unsquared_form_violations",
        literal_violations,
        literal_violations > 0,
    );
    Ok(out)
}

fn poincare(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let biases = config.biases_or(&BIASES)?;
    let trials = config.trials_or(500);
    let mut out = SuiteOutcome::new("poincare");
    let mut reports = Vec::new();
    for (b, &p) in biases.iter().enumerate() {
        reports.extend(per_trial(config, (b as u64) << 24, trials, |t, rng| {
            let n = rng.random_range(1..=8);
            bounds::poincare_check(&random_real(n, rng), p).with("trial", t)
        }));
    }
    out.group("poincare", reports);
    Ok(out)
}

fn martingale_suite(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let biases = config.biases_or(&BIASES)?;
    let trials = config.trials_or(100);
    let mut out = SuiteOutcome::new("martingale");
    let rows = per_trial(config, 0, trials, |t, rng| {
        let n = rng.random_range(1..=8);
        let f = random_real(n, rng);
        let p = biases[rng.random_range(0..biases.len())];
        let d = martingale::decompose(&f, p);
        let tag = |r: BoundReport| r.with("trial", t).with("n", n);
        let telescoping = tag(BoundReport::equal(
            "telescoping",
            d.reconstruct().max_abs_diff(&f),
            0.0,
            EXACT_TOL,
        ));
        let adapted = tag(BoundReport::equal(
            "adapted",
            if d.is_adapted(EXACT_TOL) { 0.0 } else { 1.0 },
            0.0,
            0.0,
        ));
        let orthogonality = tag(martingale::check_orthogonality(&d, p));
        let pythagoras = tag(martingale::check_pythagoras(&f, &d, p));
        let energy = tag(martingale::check_energy_decomposition(&f, &d, p));
        let contraction =
            BoundReport::worst_of("contractions", martingale::check_contractions(&f, &d, p))
                .map(tag)
                .expect("n >= 1");
        let representation = martingale::check_increment_representation(&f, &d, p);
        let rep = tag(representation.report.clone());
        (
            [
                telescoping,
                adapted,
                orthogonality,
                pythagoras,
                energy,
                contraction,
                rep,
            ],
            representation.sign,
        )
    });
    let mut groups: Vec<Vec<BoundReport>> = vec![Vec::new(); 7];
    let mut signs = [0usize; 4];
    for (reports, sign) in rows {
        for (k, r) in reports.into_iter().enumerate() {
            groups[k].push(r);
        }
        signs[match sign {
            IncrementSign::Plus => 0,
            IncrementSign::Minus => 1,
            IncrementSign::Both => 2,
            IncrementSign::Neither => 3,
        }] += 1;
    }
    let labels = [
        "telescoping",
        "adapted",
        "orthogonality",
        "pythagoras",
        "energy_decomposition",
        "contractions",
        "increment_representation",
    ];
    for (label, reports) in labels.iter().zip(groups) {
        out.group(label, reports);
    }
    out.finding("increment_sign_plus", signs[0]);
    out.finding("increment_sign_minus", signs[1]);
    out.finding("increment_sign_both", signs[2]);
    out.finding("increment_sign_neither", signs[3]);
    Ok(out)
}

fn thm42(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let biases = config.biases_or(&[0.25, 0.5, 0.75])?;
    let trials = config.trials_or(1000);
    let max_n = config.n_max.unwrap_or(12).clamp(5, 20) as usize;
    let mut out = SuiteOutcome::new("thm42");
    let mut reports = Vec::new();
    for n in 5..=max_n {
        let rows = per_trial(config, (n as u64) << 24, trials, |t, rng| {
            let f = random_boolean(n, rng);
            biases
                .iter()
                .map(|&p| bounds::thm42_check(&f, p).unwrap().report.with("trial", t))
                .collect::<Vec<_>>()
        });
        reports.extend(rows.into_iter().flatten());
    }
    out.group("max_influence_lower_bound", reports);
    Ok(out)
}

/// Every function on four coordinates, at each bias.
fn exhaustive_n4(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let biases = config.biases_or(&[0.25, 0.5])?;
    let mut out = SuiteOutcome::new("exhaustive-n4");
    for &p in &biases {
        let reports: Vec<BoundReport> = (0u64..1 << 16)
            .into_par_iter()
            .map(|table| {
                let f = BooleanFunction::from_words(4, vec![table]).unwrap();
                bounds::thm42_check(&f, p)
                    .unwrap()
                    .report
                    .with("table", f.to_hex_string())
            })
            .collect();
        let passed = reports.iter().filter(|r| r.pass).count();
        out.finding(
            format!("passed_at_p={}", p.p()),
            format!("{passed}/{}", reports.len()),
        );
        out.group("max_influence_lower_bound", reports);
    }
    Ok(out)
}

/// The symmetric monotone families the width bounds are checked on.
pub fn symmetric_families(max_n: usize) -> Vec<FamilySpec> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        out.push(FamilySpec::OrAll { n });
    }
    for n in (3..=max_n.min(15)).step_by(2) {
        out.push(FamilySpec::Majority { n });
    }
    for k in 1..=max_n {
        for m in 1..=max_n / k {
            if k * m >= 2 {
                out.push(FamilySpec::Tribes { k, m });
            }
        }
    }
    for n in 2..=max_n {
        for len in 1..=n {
            out.push(FamilySpec::CyclicRun { n, len });
        }
    }
    out
}

/// 0.05, 0.10, ..., 0.95.
pub fn nineteen_point_grid() -> Vec<Bias> {
    (1..20)
        .map(|k| Bias::new(k as f64 / 20.0).unwrap())
        .collect()
}

fn thm41(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let max_n = config.n_max.unwrap_or(16).clamp(2, 20) as usize;
    let grid = match config.p {
        Some(p) => vec![Bias::new(p)?],
        None => nineteen_point_grid(),
    };
    let mut out = SuiteOutcome::new("thm41");
    let families = symmetric_families(max_n);
    let rows: Vec<Result<Vec<BoundReport>>> = families
        .par_iter()
        .map(|spec| {
            let a = spec.instance()?;
            let gens = spec.symmetry_generators();
            Ok(bounds::thm41_grid(&a, &grid, gens.as_ref())?
                .into_iter()
                .map(|r| retolerance(r, SOLVER_TOL).with("family", spec))
                .collect())
        })
        .collect();
    let mut reports = Vec::new();
    for r in rows {
        reports.extend(r?);
    }
    out.finding("families", families.len());
    out.group("russo_derivative_lower_bound", reports);
    Ok(out)
}

/// The same comparison judged at a different tolerance.
fn retolerance(r: BoundReport, tol: f64) -> BoundReport {
    let mut r = r;
    r.tolerance = tol;
    r.pass = r.slack >= -tol;
    r
}

fn cor43(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let max_n = config.n_max.unwrap_or(16).clamp(2, 20) as usize;
    let mut out = SuiteOutcome::new("cor43");
    let families = symmetric_families(max_n);
    let rows: Vec<Result<Vec<(BoundReport, BoundReport, bool)>>> = families
        .par_iter()
        .map(|spec| {
            let a = spec.instance()?;
            let gens = spec.symmetry_generators();
            COR43_EPS
                .iter()
                .map(|&eps| {
                    let r = bounds::cor43_check(&a, eps, gens.as_ref(), threshold::DEFAULT_TOL)?;
                    Ok((
                        r.r18.with("family", spec),
                        r.r19.with("family", spec),
                        r.r18_quarter.pass,
                    ))
                })
                .collect()
        })
        .collect();
    let (mut r18, mut r19) = (Vec::new(), Vec::new());
    let mut quarter_violations = 0usize;
    for row in rows {
        for (a, b, quarter_pass) in row? {
            r18.push(a);
            r19.push(b);
            quarter_violations += usize::from(!quarter_pass);
        }
    }
    out.finding("families", families.len());
    out.discrepancy(
        "quarter_sup_bound_violations",
        format!("{quarter_violations}/{}", r18.len()),
        quarter_violations > 0,
    );
    out.group("width_sup_bound", r18);
    out.group("width_log_odds_bound", r19);
    out.group("pq_cls_le_half", vec![bounds::pq_cls_half_check()]);
    Ok(out)
}

/// Scans and spot values of `s(n)` and `c_ls`. The crossover of the two
/// branches of `s(n)` is compared with 275 and reported as a finding.
fn sn_claims(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let n_max = config
        .n_max
        .unwrap_or(1_000_000)
        .max(bounds::CLAIMED_CROSSOVER);
    let mut out = SuiteOutcome::new("sn-claims");
    let half = c_ls(Bias::half());
    out.group(
        "c_ls_half_exact",
        vec![BoundReport::equal("c_ls_half_exact", half, 2.0, 0.0)],
    );
    out.group("pq_cls_le_half", vec![bounds::pq_cls_half_check()]);
    let strict = bounds::pq_cls_grid()
        .into_iter()
        .filter(|p| p.p() != 0.5)
        .map(|p| {
            BoundReport::at_most("pq_cls_strict_off_half", bounds::pq_cls(p), 0.5, 0.0)
                .with_f64("p", p.p())
        });
    let strict: Vec<BoundReport> = strict
        .map(|r| {
            let mut r = r;
            r.pass = r.slack > 0.0;
            r
        })
        .collect();
    out.group("pq_cls_strict_off_half", strict);
    out.group("s_positive", vec![bounds::claim_scan_s_positive(n_max)?]);
    let crossover = bounds::claim_scan_crossover(n_max)?;
    out.finding(
        "crossover_first_n",
        crossover
            .first_n
            .map_or_else(|| "none".to_string(), |v| v.to_string()),
    );
    out.finding("crossover_claimed", bounds::CLAIMED_CROSSOVER);
    out.discrepancy(
        "crossover_discrepancy",
        !crossover.matches_claim,
        !crossover.matches_claim,
    );
    Ok(out)
}
