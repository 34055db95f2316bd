//! Inverting `p -> mu_p(A)` for monotone sets, threshold widths, the
//! integrated form of a derivative lower bound, and the closed forms for
//! the "at least one 1" set and tribes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{BooleanFunction, FamilySpec};
use crate::measure::Bias;
use crate::report::BoundReport;

/// Default bracket-width tolerance of the bisection.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A nondecreasing map `p -> mu_p(A)`.
pub trait MeasureCurve {
    fn arity(&self) -> usize;
    fn mu(&self, p: Bias) -> f64;
    fn dmu_dp(&self, p: Bias) -> f64;
    fn describe(&self) -> String;
}

/// `mu_p(A)` for a tabulated set, evaluated through its weight profile.
#[derive(Debug, Clone)]
pub struct ExactCurve {
    n: usize,
    profile: Vec<u64>,
    label: String,
}

impl ExactCurve {
    /// Requires `a` to be nontrivial and monotone.
    pub fn new(a: &BooleanFunction) -> Result<Self> {
        if a.is_constant() {
            return Err(Error::TrivialSet);
        }
        if !a.is_monotone() {
            return Err(Error::NotMonotone);
        }
        Ok(Self::unchecked(a))
    }

    /// Skips the monotonicity check; only for evaluating `mu`.
    pub fn unchecked(a: &BooleanFunction) -> Self {
        ExactCurve {
            n: a.arity(),
            profile: a.weight_profile(),
            label: a.to_hex_string(),
        }
    }
}

impl MeasureCurve for ExactCurve {
    fn arity(&self) -> usize {
        self.n
    }

    fn mu(&self, p: Bias) -> f64 {
        let n = self.n as i32;
        self.profile
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| c as f64 * p.p().powi(w as i32) * p.q().powi(n - w as i32))
            .sum()
    }

    fn dmu_dp(&self, p: Bias) -> f64 {
        let n = self.n as i32;
        let (pp, qq) = (p.p(), p.q());
        self.profile
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| {
                let w = w as i32;
                let up = if w > 0 {
                    w as f64 * pp.powi(w - 1) * qq.powi(n - w)
                } else {
                    0.0
                };
                let down = if w < n {
                    (n - w) as f64 * pp.powi(w) * qq.powi(n - w - 1)
                } else {
                    0.0
                };
                c as f64 * (up - down)
            })
            .sum()
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Closed-form `mu_p` for families that admit one; usable at any arity.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormCurve {
    spec: FamilySpec,
}

impl ClosedFormCurve {
    pub fn new(spec: FamilySpec) -> Result<Self> {
        spec.validate()?;
        if !spec.has_closed_form() {
            return Err(Error::NoClosedForm(spec.to_string()));
        }
        Ok(ClosedFormCurve { spec })
    }
}

/// `(1 - p)^n` computed through `log1p`.
fn pow_complement(p: f64, n: f64) -> f64 {
    (n * (-p).ln_1p()).exp()
}

impl MeasureCurve for ClosedFormCurve {
    fn arity(&self) -> usize {
        self.spec.arity()
    }

    fn mu(&self, p: Bias) -> f64 {
        let x = p.p();
        match self.spec {
            FamilySpec::Dictator { .. } => x,
            FamilySpec::AndAll { n } => x.powi(n as i32),
            FamilySpec::OrAll { n } => -(n as f64 * (-x).ln_1p()).exp_m1(),
            FamilySpec::Tribes { k, m } => -(m as f64 * (-x.powi(k as i32)).ln_1p()).exp_m1(),
            _ => unreachable!("checked at construction"),
        }
    }

    fn dmu_dp(&self, p: Bias) -> f64 {
        let x = p.p();
        match self.spec {
            FamilySpec::Dictator { .. } => 1.0,
            FamilySpec::AndAll { n } => n as f64 * x.powi(n as i32 - 1),
            FamilySpec::OrAll { n } => n as f64 * pow_complement(x, n as f64 - 1.0),
            FamilySpec::Tribes { k, m } => {
                let pk = x.powi(k as i32);
                (m * k) as f64 * x.powi(k as i32 - 1) * pow_complement(pk, m as f64 - 1.0)
            }
            _ => unreachable!("checked at construction"),
        }
    }

    fn describe(&self) -> String {
        self.spec.to_string()
    }
}

/// `mu_p(A)`.
pub fn mu_of_p(a: &BooleanFunction, p: Bias) -> f64 {
    ExactCurve::unchecked(a).mu(p)
}

/// A bisection result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inverse {
    pub p: f64,
    pub residual: f64,
    pub iterations: u32,
}

/// Solves `mu_p = alpha` by bisection on `[tol, 1 - tol]`, stopping once
/// the residual or the bracket width is at most `tol`.
pub fn p_of_alpha(curve: &(impl MeasureCurve + ?Sized), alpha: f64, tol: f64) -> Result<Inverse> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidLevel(alpha));
    }
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must lie in (0, 1/2)"
        )));
    }
    let (mut lo, mut hi) = (tol, 1.0 - tol);
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let value = curve.mu(Bias::new(mid).expect("bracket inside (0,1)"));
        iterations += 1;
        let residual = (value - alpha).abs();
        if residual <= tol || hi - lo <= tol || iterations >= 200 {
            return Ok(Inverse {
                p: mid,
                residual,
                iterations,
            });
        }
        if value < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub eps: f64,
    /// `p(eps)`
    pub p_lo: f64,
    /// `p(1 - eps)`
    pub p_hi: f64,
    pub width: f64,
    pub iterations: [u32; 2],
}

/// `p(1 - eps) - p(eps)` for `eps` in (0, 1/2).
pub fn threshold_width(
    curve: &(impl MeasureCurve + ?Sized),
    eps: f64,
    tol: f64,
) -> Result<ThresholdResult> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidLevel(eps));
    }
    let lo = p_of_alpha(curve, eps, tol)?;
    let hi = p_of_alpha(curve, 1.0 - eps, tol)?;
    Ok(ThresholdResult {
        eps,
        p_lo: lo.p,
        p_hi: hi.p,
        width: hi.p - lo.p,
        iterations: [lo.iterations, hi.iterations],
    })
}

/// Points in the grid scan that seeds [`sup_on_interval`].
pub const SUP_GRID_POINTS: usize = 1024;

/// Supremum of `g` on `[lo, hi]`: a uniform grid scan, then golden-section
/// search on the two cells around the best grid point. The refined value
/// is kept only if it does not fall below the grid value.
pub fn sup_on_interval(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return g(lo);
    }
    let step = (hi - lo) / (SUP_GRID_POINTS - 1) as f64;
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..SUP_GRID_POINTS {
        let x = if k == SUP_GRID_POINTS - 1 {
            hi
        } else {
            lo + k as f64 * step
        };
        let v = g(x);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let center = lo + best_k as f64 * step;
    let (mut a, mut b) = ((center - step).max(lo), (center + step).min(hi));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut refined = f64::NEG_INFINITY;
    for _ in 0..100 {
        let x1 = b - inv_phi * (b - a);
        let x2 = a + inv_phi * (b - a);
        let (v1, v2) = (g(x1), g(x2));
        refined = refined.max(v1).max(v2);
        if v1 >= v2 {
            b = x2;
        } else {
            a = x1;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    if refined >= best {
        refined
    } else {
        best
    }
}

/// Checks `d mu/dp >= (a / g(p)) mu (1 - mu)` on `p_grid`; when it holds,
/// checks the integrated bound
/// `p(beta) - p(alpha) <= (1/a) sup_[p(alpha), p(beta)] g * log(beta (1-alpha) / (alpha (1-beta)))`
/// for every pair `alpha <= beta` of `alpha_grid`.
pub fn lemma21_check(
    curve: &(impl MeasureCurve + ?Sized),
    a: f64,
    g: &dyn Fn(f64) -> f64,
    alpha_grid: &[f64],
    p_grid: &[f64],
    tol: f64,
) -> Result<BoundReport> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rate a = {a} must be positive"
        )));
    }
    for &p in p_grid {
        let bias = Bias::new(p)?;
        let mu = curve.mu(bias);
        let lhs = curve.dmu_dp(bias);
        let rhs = a / g(p) * mu * (1.0 - mu);
        if lhs < rhs - 1e-12 {
            return Err(Error::PremiseFailed {
                p,
                slack: lhs - rhs,
            });
        }
    }
    let inverses = alpha_grid
        .iter()
        .map(|&alpha| p_of_alpha(curve, alpha, tol).map(|inv| inv.p))
        .collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::new();
    for (i, &alpha) in alpha_grid.iter().enumerate() {
        for (j, &beta) in alpha_grid.iter().enumerate() {
            if alpha > beta {
                continue;
            }
            let (p_a, p_b) = (inverses[i], inverses[j]);
            let lhs = p_b - p_a;
            let odds = (beta * (1.0 - alpha) / (alpha * (1.0 - beta))).ln();
            let rhs = if odds == 0.0 {
                0.0
            } else {
                sup_on_interval(g, p_a.min(p_b), p_a.max(p_b)) * odds / a
            };
            reports.push(
                BoundReport::at_most("integrated_bound", lhs, rhs, 1e-9)
                    .with_f64("alpha", alpha)
                    .with_f64("beta", beta),
            );
        }
    }
    Ok(BoundReport::worst_of("integrated_bound", reports)
        .unwrap_or_else(|| BoundReport::at_most("integrated_bound", 0.0, 0.0, 1e-9))
        .with("set", curve.describe())
        .with_f64("a", a))
}

/// The finite-n value of
/// `mu'(p(n)) / log n * p(n) log(1/p(n)) / ((1-eps) log(1/(1-eps)))`
/// for the "at least one 1" set, with `p(n)` solving `mu_p = eps`.
pub fn bn_ratio_diagnostic(n: u64, eps: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::ArityTooSmall {
            n: n as usize,
            min: 2,
        });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidLevel(eps));
    }
    let nf = n as f64;
    let p = bn_inverse(n, eps);
    let derivative = nf * pow_complement(p, nf - 1.0);
    let tail = (1.0 - eps) * (1.0 / (1.0 - eps)).ln();
    Ok(derivative / nf.ln() * p * (1.0 / p).ln() / tail)
}

/// `1 - (1 - alpha)^(1/n)`, the exact inverse for the "at least one 1" set.
pub fn bn_inverse(n: u64, alpha: f64) -> f64 {
    -((-alpha).ln_1p() / n as f64).exp_m1()
}

/// `log 2 (log log(1/(1-eps)) - log log(1/eps))`, negative for eps < 1/2.
pub fn tribes_asymptotic_constant(eps: f64) -> f64 {
    std::f64::consts::LN_2 * ((1.0 / (1.0 - eps)).ln().ln() - (1.0 / eps).ln().ln())
}

/// `mu_{1/2}` of tribes with blocks of `k` and `m` blocks.
pub fn tribes_mu_half(k: usize, m: usize) -> f64 {
    1.0 - (1.0 - 0.5f64.powi(k as i32)).powi(m as i32)
}

/// The block count `m` that puts `mu_{1/2}` closest to 1/2.
pub fn balanced_tribe_count(k: usize) -> usize {
    let exact = std::f64::consts::LN_2 / -(-(0.5f64.powi(k as i32))).ln_1p();
    let lo = (exact.floor() as usize).max(1);
    let hi = lo + 1;
    if (tribes_mu_half(k, lo) - 0.5).abs() <= (tribes_mu_half(k, hi) - 0.5).abs() {
        lo
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TribesRow {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub mu_half: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub width: f64,
    pub width_log_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TribesTrend {
    pub eps: f64,
    pub asymptotic_constant: f64,
    pub rows: Vec<TribesRow>,
}

/// Widths of tribes from the closed form, for each `(k, m)` in the schedule.
pub fn tribes_width_comparison(
    schedule: &[(usize, usize)],
    eps: f64,
    tol: f64,
) -> Result<TribesTrend> {
    let rows = schedule
        .iter()
        .map(|&(k, m)| {
            let curve = ClosedFormCurve::new(FamilySpec::Tribes { k, m })?;
            let t = threshold_width(&curve, eps, tol)?;
            let n = k * m;
            Ok(TribesRow {
                k,
                m,
                n,
                mu_half: tribes_mu_half(k, m),
                p_lo: t.p_lo,
                p_hi: t.p_hi,
                width: t.width,
                width_log_n: t.width * (n as f64).ln(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TribesTrend {
        eps,
        asymptotic_constant: tribes_asymptotic_constant(eps),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bias(p: f64) -> Bias {
        Bias::new(p).unwrap()
    }

    #[test]
    fn mu_examples() {
        let p = bias(0.37);
        for n in 1..8 {
            let b = FamilySpec::OrAll { n }.instance().unwrap();
            assert!((mu_of_p(&b, p) - (1.0 - 0.63f64.powi(n as i32))).abs() < 1e-15);
        }
        let t = FamilySpec::Tribes { k: 2, m: 2 }.instance().unwrap();
        assert!((mu_of_p(&t, bias(0.5)) - 7.0 / 16.0).abs() < 1e-15);
        let empty = BooleanFunction::constant(3, false).unwrap();
        assert_eq!(mu_of_p(&empty, p), 0.0);
    }

    #[test]
    fn exact_and_closed_forms_agree() {
        for spec in [
            FamilySpec::OrAll { n: 6 },
            FamilySpec::AndAll { n: 4 },
            FamilySpec::Dictator { n: 3, i: 2 },
            FamilySpec::Tribes { k: 3, m: 2 },
        ] {
            let exact = ExactCurve::new(&spec.instance().unwrap()).unwrap();
            let closed = ClosedFormCurve::new(spec).unwrap();
            for k in 1..20 {
                let p = bias(k as f64 / 20.0);
                assert!((exact.mu(p) - closed.mu(p)).abs() < 1e-14, "{spec} {p}");
                assert!(
                    (exact.dmu_dp(p) - closed.dmu_dp(p)).abs() < 1e-12,
                    "{spec} {p}"
                );
            }
        }
        assert!(ClosedFormCurve::new(FamilySpec::Majority { n: 3 }).is_err());
    }

    #[test]
    fn inverse_examples() {
        let b10 = ExactCurve::new(&FamilySpec::OrAll { n: 10 }.instance().unwrap()).unwrap();
        let inv = p_of_alpha(&b10, 0.1, DEFAULT_TOL).unwrap();
        assert!((inv.p - bn_inverse(10, 0.1)).abs() < 1e-9);
        assert!((inv.p - 0.010_480_7).abs() < 1e-7);
        let d = ExactCurve::new(&FamilySpec::Dictator { n: 1, i: 1 }.instance().unwrap()).unwrap();
        assert!((p_of_alpha(&d, 0.3, DEFAULT_TOL).unwrap().p - 0.3).abs() < 1e-11);
        let empty = BooleanFunction::constant(2, false).unwrap();
        assert_eq!(ExactCurve::new(&empty).unwrap_err(), Error::TrivialSet);
        let parity = FamilySpec::Parity { n: 2 }.instance().unwrap();
        assert_eq!(ExactCurve::new(&parity).unwrap_err(), Error::NotMonotone);
        assert!(p_of_alpha(&d, 1.0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn width_examples() {
        let d = ExactCurve::new(&FamilySpec::Dictator { n: 1, i: 1 }.instance().unwrap()).unwrap();
        let t = threshold_width(&d, 0.1, DEFAULT_TOL).unwrap();
        assert!((t.width - 0.8).abs() < 1e-11);
        let b10 = ExactCurve::new(&FamilySpec::OrAll { n: 10 }.instance().unwrap()).unwrap();
        let t = threshold_width(&b10, 0.1, DEFAULT_TOL).unwrap();
        let closed = bn_inverse(10, 0.9) - bn_inverse(10, 0.1);
        assert!((t.width - closed).abs() < 1e-9);
        assert!((t.width - 0.195_19).abs() < 1e-5);
        assert_eq!(t.width, t.p_hi - t.p_lo);
        let maj = ExactCurve::new(&FamilySpec::Majority { n: 9 }.instance().unwrap()).unwrap();
        let t = threshold_width(&maj, 0.25, DEFAULT_TOL).unwrap();
        assert!((t.p_lo + t.p_hi - 1.0).abs() < 1e-9);
        assert!(threshold_width(&maj, 0.5, DEFAULT_TOL).is_err());
    }

    #[test]
    fn sup_finds_interior_and_endpoint_maxima() {
        let bump = |x: f64| -(x - 0.3141).powi(2);
        assert!(sup_on_interval(&bump, 0.0, 1.0).abs() < 1e-15);
        let rising = |x: f64| x;
        assert_eq!(sup_on_interval(&rising, 0.2, 0.7), 0.7);
        assert_eq!(sup_on_interval(&rising, 0.4, 0.4), 0.4);
    }

    #[test]
    fn lemma21_examples() {
        let d = ExactCurve::new(&FamilySpec::Dictator { n: 1, i: 1 }.instance().unwrap()).unwrap();
        let grid = [0.1, 0.25, 0.5, 0.75, 0.9];
        let p_grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
        let r = lemma21_check(&d, 1.0, &|_| 1.0, &grid, &p_grid, DEFAULT_TOL).unwrap();
        assert!(r.pass);
        // degenerate pairs alpha = beta contribute 0 <= 0
        let r = lemma21_check(&d, 1.0, &|_| 1.0, &[0.4], &p_grid, DEFAULT_TOL).unwrap();
        assert!(r.pass && r.lhs == 0.0 && r.rhs == 0.0);
        // a rate far too large breaks the premise
        assert!(matches!(
            lemma21_check(&d, 100.0, &|_| 1.0, &grid, &p_grid, DEFAULT_TOL),
            Err(Error::PremiseFailed { .. })
        ));
    }

    #[test]
    fn bn_ratio_trend() {
        for eps in [0.1, 0.3] {
            let a = bn_ratio_diagnostic(100_000, eps).unwrap();
            let b = bn_ratio_diagnostic(1_000_000, eps).unwrap();
            assert!((b - 1.0).abs() < (a - 1.0).abs());
        }
        assert!(bn_ratio_diagnostic(10, 0.1).unwrap().is_finite());
        assert!(bn_ratio_diagnostic(1, 0.1).is_err());
    }

    #[test]
    fn tribes_helpers() {
        assert_eq!(balanced_tribe_count(3), 5);
        assert_eq!(balanced_tribe_count(4), 11);
        assert!((tribes_mu_half(2, 2) - 7.0 / 16.0).abs() < 1e-15);
        let c = tribes_asymptotic_constant(0.1);
        assert!(c < 0.0);
        assert!(tribes_asymptotic_constant(0.4).abs() < c.abs());
        let trend = tribes_width_comparison(&[(2, 2)], 0.1, DEFAULT_TOL).unwrap();
        assert!(trend.rows[0].width > 0.0 && trend.rows[0].width < 1.0);
    }
}
