//! The biased product measure on the hypercube and the pointwise operators
//! built on it: expectation, variance, entropy, the discrete gradient, the
//! centering operator `delta_i`, energy and influences.
//!
//! All logarithms are natural.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::BooleanFunction;

/// The success probability `p` of each coordinate, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Bias(f64);

impl Bias {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(Bias(p))
        } else {
            Err(Error::InvalidBias(p))
        }
    }

    pub fn half() -> Self {
        Bias(0.5)
    }

    #[inline]
    pub fn p(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn q(self) -> f64 {
        1.0 - self.0
    }

    /// `p (1 - p)`.
    #[inline]
    pub fn variance(self) -> f64 {
        self.0 * (1.0 - self.0)
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `table[w] = p^w (1-p)^(n-w)`, the mass of any point of weight `w`.
#[derive(Debug, Clone)]
pub struct WeightTable {
    by_weight: Vec<f64>,
}

impl WeightTable {
    pub fn new(n: usize, p: Bias) -> Self {
        let by_weight = (0..=n)
            .map(|w| p.p().powi(w as i32) * p.q().powi((n - w) as i32))
            .collect();
        WeightTable { by_weight }
    }

    #[inline]
    pub fn weight(&self, x: usize) -> f64 {
        self.by_weight[x.count_ones() as usize]
    }

    #[inline]
    pub fn by_weight(&self, w: usize) -> f64 {
        self.by_weight[w]
    }
}

pub fn measure_weight(n: usize, p: Bias, x: usize) -> f64 {
    let w = x.count_ones() as i32;
    p.p().powi(w) * p.q().powi(n as i32 - w)
}

/// A real function on `{0,1}^n`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFunction {
    n: usize,
    values: Vec<f64>,
}

impl CubeFunction {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                n,
                expected,
                got: values.len(),
            });
        }
        if let Some(point) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { point });
        }
        Ok(CubeFunction { n, values })
    }

    pub fn from_fn(n: usize, rule: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new(n, (0..1usize << n).map(rule).collect())
    }

    pub fn constant(n: usize, c: f64) -> Self {
        CubeFunction {
            n,
            values: vec![c; 1 << n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn from_boolean(f: &BooleanFunction) -> Self {
        CubeFunction {
            n: f.arity(),
            values: (0..f.len())
                .map(|x| if f.get(x) { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> CubeFunction {
        CubeFunction {
            n: self.n,
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &CubeFunction,
        op: impl Fn(f64, f64) -> f64,
    ) -> Result<CubeFunction> {
        check_same_arity(self, other)?;
        Ok(CubeFunction {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// True when the value never changes along coordinate `i` (0-based).
    pub fn is_constant_along(&self, i: usize, tol: f64) -> bool {
        let bit = 1usize << i;
        (0..self.len())
            .filter(|x| x & bit == 0)
            .all(|x| (self.values[x] - self.values[x | bit]).abs() <= tol)
    }

    pub fn max_abs_diff(&self, other: &CubeFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_same_arity(a: &CubeFunction, b: &CubeFunction) -> Result<()> {
    if a.n != b.n {
        return Err(Error::ArityMismatch {
            expected: a.n,
            got: b.n,
        });
    }
    Ok(())
}

fn check_coordinate(n: usize, i: usize) -> Result<usize> {
    if i == 0 || i > n {
        return Err(Error::CoordinateOutOfRange { index: i, n });
    }
    Ok(i - 1)
}

pub fn expectation(g: &CubeFunction, p: Bias) -> f64 {
    let weights = WeightTable::new(g.n, p);
    g.values
        .iter()
        .enumerate()
        .map(|(x, &v)| weights.weight(x) * v)
        .sum()
}

/// `E[g h]`.
pub fn inner(g: &CubeFunction, h: &CubeFunction, p: Bias) -> Result<f64> {
    check_same_arity(g, h)?;
    let weights = WeightTable::new(g.n, p);
    Ok(g.values
        .iter()
        .zip(&h.values)
        .enumerate()
        .map(|(x, (&a, &b))| weights.weight(x) * a * b)
        .sum())
}

/// Two-pass variance up to `n = 20`; above that `E[g^2] - E[g]^2`.
/// Always clamped at zero.
pub fn variance(g: &CubeFunction, p: Bias) -> f64 {
    if g.values.iter().all(|&v| v == g.values[0]) {
        return 0.0;
    }
    let weights = WeightTable::new(g.n, p);
    let mean = expectation(g, p);
    let var = if g.n <= 20 {
        g.values
            .iter()
            .enumerate()
            .map(|(x, &v)| weights.weight(x) * (v - mean) * (v - mean))
            .sum::<f64>()
    } else {
        let second: f64 = g
            .values
            .iter()
            .enumerate()
            .map(|(x, &v)| weights.weight(x) * v * v)
            .sum();
        second - mean * mean
    };
    var.max(0.0)
}

fn x_log_x(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// `Ent(g) = E[g log g] - E[g] log E[g]` with `0 log 0 = 0`.
pub fn entropy(g: &CubeFunction, p: Bias) -> Result<f64> {
    if let Some(point) = g.values.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeValue {
            point,
            value: g.values[point],
        });
    }
    if g.values.iter().all(|&v| v == g.values[0]) {
        return Ok(0.0);
    }
    let weights = WeightTable::new(g.n, p);
    let mut mean = 0.0;
    let mut integral = 0.0;
    for (x, &v) in g.values.iter().enumerate() {
        let w = weights.weight(x);
        mean += w * v;
        integral += w * x_log_x(v);
    }
    Ok((integral - x_log_x(mean)).max(0.0))
}

/// `grad_i g(x) = g(x with x_i = 1) - g(x with x_i = 0)`.
pub fn grad(g: &CubeFunction, i: usize) -> Result<CubeFunction> {
    let bit = 1usize << check_coordinate(g.n, i)?;
    let values = (0..g.len())
        .map(|x| g.values[x | bit] - g.values[x & !bit])
        .collect();
    Ok(CubeFunction { n: g.n, values })
}

/// Integrates out coordinate `i` against the one-dimensional Bernoulli(p)
/// law, leaving the other coordinates fixed.
pub fn coordinate_mean(g: &CubeFunction, p: Bias, i: usize) -> Result<CubeFunction> {
    let bit = 1usize << check_coordinate(g.n, i)?;
    let values = (0..g.len())
        .map(|x| p.q() * g.values[x & !bit] + p.p() * g.values[x | bit])
        .collect();
    Ok(CubeFunction { n: g.n, values })
}

/// `delta_i g = g - (mean of g over coordinate i)`.
pub fn delta(g: &CubeFunction, p: Bias, i: usize) -> Result<CubeFunction> {
    let mean = coordinate_mean(g, p, i)?;
    g.zip_with(&mean, |a, b| a - b)
}

/// The same operator as [`delta`], written through the gradient:
/// `(1-p) grad_i g` where `x_i = 1` and `-p grad_i g` where `x_i = 0`.
pub fn delta_via_gradient(g: &CubeFunction, p: Bias, i: usize) -> Result<CubeFunction> {
    let bit = 1usize << check_coordinate(g.n, i)?;
    let gradient = grad(g, i)?;
    let values = (0..g.len())
        .map(|x| {
            if x & bit != 0 {
                p.q() * gradient.values[x]
            } else {
                -p.p() * gradient.values[x]
            }
        })
        .collect();
    Ok(CubeFunction { n: g.n, values })
}

/// Energy of one coordinate, `E[(delta_i g)^2]`.
pub fn coordinate_energy(g: &CubeFunction, p: Bias, i: usize) -> Result<f64> {
    let d = delta(g, p, i)?;
    inner(&d, &d, p)
}

/// The Dirichlet form `E[-g L g] = sum_i E[(delta_i g)^2]`.
pub fn energy(g: &CubeFunction, p: Bias) -> f64 {
    (1..=g.n)
        .map(|i| coordinate_energy(g, p, i).expect("coordinate in range"))
        .sum()
}

/// Both sides of `E|delta_i f|^a = (p (1-p)^a + (1-p) p^a) E|grad_i f|^a`.
pub fn moment_ratio(f: &CubeFunction, p: Bias, i: usize, alpha: f64) -> Result<(f64, f64)> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "moment exponent {alpha} must be >= 0"
        )));
    }
    let d = delta(f, p, i)?;
    let g = grad(f, i)?;
    let lhs = expectation(&d.map(|v| v.abs().powf(alpha)), p);
    let factor = p.p() * p.q().powf(alpha) + p.q() * p.p().powf(alpha);
    let rhs = factor * expectation(&g.map(|v| v.abs().powf(alpha)), p);
    Ok((lhs, rhs))
}

/// Per-coordinate influences, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct InfluenceVector(Vec<f64>);

impl InfluenceVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// 1-based index of the largest influence (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = k;
            }
        }
        best + 1
    }
}

/// Mass under the `(n-1)`-dimensional measure of the fibers along `i` on
/// which `f` is not constant.
pub fn influence(f: &BooleanFunction, p: Bias, i: usize) -> Result<f64> {
    let n = f.arity();
    let bit = 1usize << check_coordinate(n, i)?;
    let weights = WeightTable::new(n - 1, p);
    let mut total = 0.0;
    for x in 0..f.len() {
        if x & bit == 0 && f.get(x) != f.get(x | bit) {
            total += weights.weight(x);
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

pub fn influences(f: &BooleanFunction, p: Bias) -> InfluenceVector {
    let n = f.arity();
    let weights = WeightTable::new(n - 1, p);
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate() {
        let bit = 1usize << k;
        let mut total = 0.0;
        for x in 0..f.len() {
            if x & bit == 0 && f.get(x) != f.get(x | bit) {
                total += weights.weight(x);
            }
        }
        *slot = total.clamp(0.0, 1.0);
    }
    InfluenceVector(out)
}

/// `sum_i E[grad_i g]`, the derivative in `p` of `E_p[g]`.
pub fn derivative_of_expectation(g: &CubeFunction, p: Bias) -> f64 {
    let weights = WeightTable::new(g.n, p);
    (0..g.n)
        .map(|k| {
            let bit = 1usize << k;
            (0..g.len())
                .map(|x| weights.weight(x) * (g.values[x | bit] - g.values[x & !bit]))
                .sum::<f64>()
        })
        .sum()
}

/// Returns `(d/dp E[f], energy(f) / (p (1-p)))` for a monotone Boolean `f`.
pub fn energy_derivative_identity(f: &BooleanFunction, p: Bias) -> Result<(f64, f64)> {
    if !f.is_monotone() {
        return Err(Error::NotMonotone);
    }
    let g = CubeFunction::from_boolean(f);
    Ok((
        derivative_of_expectation(&g, p),
        energy(&g, p) / p.variance(),
    ))
}
