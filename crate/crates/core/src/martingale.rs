//! Doob martingale along the coordinate filtration `x_1, x_1 x_2, ...`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{coordinate_mean, delta, expectation, inner, variance, Bias, CubeFunction};
use crate::report::BoundReport;

/// Tolerance for the exact identities of this module.
pub const IDENTITY_TOL: f64 = 1e-12;

/// `E[f | x_1, ..., x_j]`: averages out coordinates `j+1..n`.
pub fn conditional_expectation(f: &CubeFunction, p: Bias, j: usize) -> Result<CubeFunction> {
    let n = f.arity();
    if j > n {
        return Err(Error::PrefixOutOfRange { j, n });
    }
    let mut cur = f.clone();
    for k in (j + 1..=n).rev() {
        cur = coordinate_mean(&cur, p, k)?;
    }
    Ok(cur)
}

#[derive(Debug, Clone)]
pub struct MartingaleDecomposition {
    n: usize,
    increments: Vec<CubeFunction>,
    base_mean: f64,
}

impl MartingaleDecomposition {
    pub fn arity(&self) -> usize {
        self.n
    }

    /// `V_1 .. V_n`; `increments()[j - 1]` is `V_j`.
    pub fn increments(&self) -> &[CubeFunction] {
        &self.increments
    }

    pub fn increment(&self, j: usize) -> &CubeFunction {
        &self.increments[j - 1]
    }

    pub fn base_mean(&self) -> f64 {
        self.base_mean
    }

    /// `E[f] + sum_j V_j`.
    pub fn reconstruct(&self) -> CubeFunction {
        let mut values = vec![self.base_mean; 1 << self.n];
        for v in &self.increments {
            for (slot, &x) in values.iter_mut().zip(v.values()) {
                *slot += x;
            }
        }
        CubeFunction::new(self.n, values).expect("sum of finite values")
    }

    /// True when each `V_j` is constant along coordinates `j+1..n`.
    pub fn is_adapted(&self, tol: f64) -> bool {
        self.increments
            .iter()
            .enumerate()
            .all(|(k, v)| (k + 1..self.n).all(|i| v.is_constant_along(i, tol)))
    }
}

pub fn decompose(f: &CubeFunction, p: Bias) -> MartingaleDecomposition {
    let n = f.arity();
    // levels[j] = E[f | x_1..x_j], built from j = n downward
    let mut levels = Vec::with_capacity(n + 1);
    levels.push(f.clone());
    for k in (1..=n).rev() {
        let next = coordinate_mean(levels.last().unwrap(), p, k).expect("coordinate in range");
        levels.push(next);
    }
    levels.reverse();
    let increments = (1..=n)
        .map(|j| levels[j].zip_with(&levels[j - 1], |a, b| a - b).unwrap())
        .collect();
    MartingaleDecomposition {
        n,
        increments,
        base_mean: expectation(f, p),
    }
}

/// Largest `|E[V_j V_k]|` and `|E[(mean_i V_j)(mean_i V_k)]|` over `j != k`
/// and every coordinate `i`.
pub fn check_orthogonality(d: &MartingaleDecomposition, p: Bias) -> BoundReport {
    let n = d.n;
    let mut worst_plain = 0.0f64;
    for j in 0..n {
        for k in j + 1..n {
            let c = inner(&d.increments[j], &d.increments[k], p).unwrap();
            worst_plain = worst_plain.max(c.abs());
        }
    }
    let mut worst_fiber = 0.0f64;
    for i in 1..=n {
        let means: Vec<CubeFunction> = d
            .increments
            .iter()
            .map(|v| coordinate_mean(v, p, i).unwrap())
            .collect();
        for j in 0..n {
            for k in j + 1..n {
                let c = inner(&means[j], &means[k], p).unwrap();
                worst_fiber = worst_fiber.max(c.abs());
            }
        }
    }
    BoundReport::equal(
        "martingale_orthogonality",
        worst_plain.max(worst_fiber),
        0.0,
        IDENTITY_TOL,
    )
    .with("n", n)
    .with_f64("p", p.p())
    .with_f64("max_cross_moment", worst_plain)
    .with_f64("max_fiber_cross_moment", worst_fiber)
}

/// `sum_j E[V_j delta_i V_j] = E[f delta_i f]` for every coordinate `i`.
pub fn check_energy_decomposition(
    f: &CubeFunction,
    d: &MartingaleDecomposition,
    p: Bias,
) -> BoundReport {
    let reports = (1..=f.arity()).map(|i| {
        let lhs: f64 = d
            .increments
            .iter()
            .map(|v| inner(v, &delta(v, p, i).unwrap(), p).unwrap())
            .sum();
        let rhs = inner(f, &delta(f, p, i).unwrap(), p).unwrap();
        BoundReport::equal(format!("energy_decomposition_i{i}"), lhs, rhs, IDENTITY_TOL)
            .with("i", i)
    });
    BoundReport::worst_of("martingale_energy_decomposition", reports)
        .unwrap_or_else(|| {
            BoundReport::equal("martingale_energy_decomposition", 0.0, 0.0, IDENTITY_TOL)
        })
        .with_f64("p", p.p())
}

/// Which sign makes `V_j = sign * E[delta_j f | x_1..x_j]` hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IncrementSign {
    Plus,
    Minus,
    /// Every increment vanishes, so both signs fit.
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationReport {
    pub sign: IncrementSign,
    pub residual_plus: f64,
    pub residual_minus: f64,
    pub report: BoundReport,
}

/// Compares `E[delta_j f | x_1..x_j]` with `+V_j` and with `-V_j`.
pub fn check_increment_representation(
    f: &CubeFunction,
    d: &MartingaleDecomposition,
    p: Bias,
) -> RepresentationReport {
    let mut residual_plus = 0.0f64;
    let mut residual_minus = 0.0f64;
    for j in 1..=f.arity() {
        let projected = conditional_expectation(&delta(f, p, j).unwrap(), p, j).unwrap();
        let v = d.increment(j);
        for x in 0..f.len() {
            residual_plus = residual_plus.max((projected.get(x) - v.get(x)).abs());
            residual_minus = residual_minus.max((projected.get(x) + v.get(x)).abs());
        }
    }
    let sign = match (
        residual_plus <= IDENTITY_TOL,
        residual_minus <= IDENTITY_TOL,
    ) {
        (true, true) => IncrementSign::Both,
        (true, false) => IncrementSign::Plus,
        (false, true) => IncrementSign::Minus,
        (false, false) => IncrementSign::Neither,
    };
    let best = residual_plus.min(residual_minus);
    let label = match sign {
        IncrementSign::Minus => "increment_representation_minus",
        _ => "increment_representation_plus",
    };
    let report = BoundReport::equal(label, best, 0.0, IDENTITY_TOL)
        .with("sign", format!("{sign:?}").to_lowercase())
        .with_f64("residual_plus", residual_plus)
        .with_f64("residual_minus", residual_minus)
        .with_f64("p", p.p());
    RepresentationReport {
        sign,
        residual_plus,
        residual_minus,
        report,
    }
}

/// `sum_j ||V_j||^2 = Var(f)`.
pub fn check_pythagoras(f: &CubeFunction, d: &MartingaleDecomposition, p: Bias) -> BoundReport {
    let lhs: f64 = d.increments.iter().map(|v| inner(v, v, p).unwrap()).sum();
    BoundReport::equal("martingale_pythagoras", lhs, variance(f, p), IDENTITY_TOL)
        .with_f64("p", p.p())
}

/// `E[V_j^2] <= E[(delta_j f)^2]` and `E|V_j| <= E|delta_j f|` for every `j`.
pub fn check_contractions(
    f: &CubeFunction,
    d: &MartingaleDecomposition,
    p: Bias,
) -> Vec<BoundReport> {
    let mut out = Vec::with_capacity(2 * f.arity());
    for j in 1..=f.arity() {
        let v = d.increment(j);
        let dj = delta(f, p, j).unwrap();
        out.push(
            BoundReport::at_most(
                format!("l2_contraction_j{j}"),
                inner(v, v, p).unwrap(),
                inner(&dj, &dj, p).unwrap(),
                IDENTITY_TOL,
            )
            .with("j", j),
        );
        out.push(
            BoundReport::at_most(
                format!("l1_contraction_j{j}"),
                expectation(&v.map(f64::abs), p),
                expectation(&dj.map(f64::abs), p),
                IDENTITY_TOL,
            )
            .with("j", j),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::FamilySpec;

    fn bias(p: f64) -> Bias {
        Bias::new(p).unwrap()
    }

    fn cube(f: FamilySpec) -> CubeFunction {
        CubeFunction::from_boolean(&f.instance().unwrap())
    }

    #[test]
    fn conditional_expectation_endpoints() {
        let p = bias(0.3);
        let f = cube(FamilySpec::Tribes { k: 2, m: 2 });
        assert_eq!(conditional_expectation(&f, p, 4).unwrap(), f);
        let e0 = conditional_expectation(&f, p, 0).unwrap();
        let mean = expectation(&f, p);
        assert!(e0.values().iter().all(|v| (v - mean).abs() < 1e-15));
        assert!(matches!(
            conditional_expectation(&f, p, 5),
            Err(Error::PrefixOutOfRange { j: 5, n: 4 })
        ));
    }

    #[test]
    fn conditional_expectation_or2() {
        let f = cube(FamilySpec::OrAll { n: 2 });
        let e1 = conditional_expectation(&f, bias(0.5), 1).unwrap();
        assert_eq!(e1.values(), &[0.5, 1.0, 0.5, 1.0]);
    }

    #[test]
    fn decompose_examples() {
        let p = bias(0.3);
        let c = CubeFunction::constant(3, 4.0);
        let d = decompose(&c, p);
        assert!(d
            .increments()
            .iter()
            .all(|v| v.values().iter().all(|x| x.abs() < 1e-15)));

        let dict = cube(FamilySpec::Dictator { n: 3, i: 1 });
        let d = decompose(&dict, p);
        for x in 0..8 {
            assert!((d.increment(1).get(x) - ((x & 1) as f64 - 0.3)).abs() < 1e-15);
        }
        assert!(d.increments()[1..]
            .iter()
            .all(|v| v.values().iter().all(|x| x.abs() < 1e-15)));

        let or2 = cube(FamilySpec::OrAll { n: 2 });
        let d = decompose(&or2, bias(0.5));
        assert_eq!(d.increment(1).values(), &[-0.25, 0.25, -0.25, 0.25]);
        // V_2 lives on the x_1 = 0 fiber
        assert_eq!(d.increment(2).values(), &[-0.5, 0.0, 0.5, 0.0]);
        assert!(d.is_adapted(1e-15));
        assert!(d.reconstruct().max_abs_diff(&or2) < 1e-15);
    }

    #[test]
    fn orthogonality_examples() {
        let dict = cube(FamilySpec::Dictator { n: 4, i: 1 });
        let r = check_orthogonality(&decompose(&dict, bias(0.3)), bias(0.3));
        assert!(r.pass);
        assert_eq!(r.lhs, 0.0);
        let or3 = cube(FamilySpec::OrAll { n: 3 });
        assert!(check_orthogonality(&decompose(&or3, bias(0.3)), bias(0.3)).pass);
    }

    #[test]
    fn energy_decomposition_examples() {
        for (f, p) in [
            (CubeFunction::constant(3, 1.0), 0.4),
            (cube(FamilySpec::OrAll { n: 3 }), 0.5),
            (cube(FamilySpec::Tribes { k: 2, m: 2 }), 0.3),
        ] {
            let p = bias(p);
            let d = decompose(&f, p);
            assert!(check_energy_decomposition(&f, &d, p).pass);
        }
    }

    #[test]
    fn representation_sign() {
        let p = bias(0.3);
        let dict = cube(FamilySpec::Dictator { n: 2, i: 1 });
        let rep = check_increment_representation(&dict, &decompose(&dict, p), p);
        assert_eq!(rep.sign, IncrementSign::Plus);
        assert!(rep.report.pass);

        let c = CubeFunction::constant(2, 3.0);
        let rep = check_increment_representation(&c, &decompose(&c, p), p);
        assert_eq!(rep.sign, IncrementSign::Both);

        let or2 = cube(FamilySpec::OrAll { n: 2 });
        let rep = check_increment_representation(&or2, &decompose(&or2, bias(0.5)), bias(0.5));
        assert_eq!(rep.sign, IncrementSign::Plus);
        assert!(rep.residual_minus > 0.1);
    }

    #[test]
    fn pythagoras_and_contractions() {
        let p = bias(0.35);
        let f = cube(FamilySpec::Majority { n: 5 });
        let d = decompose(&f, p);
        assert!(check_pythagoras(&f, &d, p).pass);
        assert!(check_contractions(&f, &d, p).iter().all(|r| r.pass));
    }
}
