//! Independent differentiation oracles.
//!
//! Two routes that share nothing with the set-partition code in
//! [`crate::power`]:
//!
//! * central finite differences over every axis combination, refined by
//!   Richardson extrapolation;
//! * nested forward-mode dual numbers pushed through plain polynomial
//!   evaluation and a real power.
//!
//! [`compare`] turns an analytic tensor and an oracle tensor into a
//! [`ComparisonReport`].

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{Direction, PolynomialMetric};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Finest finite-difference step for first derivatives, relative to
    /// `1 + ‖y‖`. Coarser Richardson levels double it.
    pub base_step: f64,
    /// Each further derivative order multiplies the step by this factor.
    pub step_growth: f64,
    /// Number of step doublings combined by Richardson extrapolation.
    pub richardson_levels: usize,
    /// Step for derivatives of `A^p`, relative to the estimated distance to
    /// the null set of `A` (see [`fd_power_tensor`]).
    pub power_step: f64,
    /// Relative tolerances for finite differences, orders 1 through 4.
    pub fd_tolerances: [f64; 4],
    /// Relative tolerance for dual-number comparisons.
    pub dual_tolerance: f64,
    /// Entries with `|oracle| <= zero_floor (1 + max|oracle|)` are compared
    /// absolutely against that floor. Both oracles lose relative accuracy on
    /// entries that cancel to a small fraction of the largest one.
    pub zero_floor: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            base_step: 1e-3,
            step_growth: 1.3,
            richardson_levels: 3,
            power_step: 0.0125,
            fd_tolerances: [1e-8, 1e-7, 1e-5, 1e-4],
            dual_tolerance: 1e-10,
            zero_floor: 1e-3,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let monotone = self.fd_tolerances.windows(2).all(|w| w[0] <= w[1]);
        if !(self.base_step > 0.0)
            || !(self.power_step > 0.0)
            || !(self.step_growth > 0.0)
            || self.richardson_levels == 0
            || !monotone
            || self.fd_tolerances.iter().any(|t| !(*t > 0.0))
            || !(self.dual_tolerance > 0.0)
        {
            return Err(Error::InvalidMetric(format!("invalid oracle configuration {self:?}")));
        }
        Ok(())
    }

    pub fn fd_tolerance(&self, order: usize) -> f64 {
        self.fd_tolerances[order.clamp(1, 4) - 1]
    }

    /// Step used for an `order`-th derivative at `y`.
    pub fn step(&self, y: &Direction, order: usize) -> f64 {
        self.base_step * (1.0 + y.norm()) * self.step_growth.powi(order as i32 - 1)
    }

    fn step_at_scale(&self, relative: f64, scale: f64, order: usize) -> f64 {
        relative * scale * self.step_growth.powi(order as i32 - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdEstimate {
    pub tensor: Tensor,
    /// Largest change between the last two extrapolation levels.
    pub error_indicator: f64,
}

/// Central-difference estimate of the `order`-th derivative tensor of `f`.
pub fn fd_tensor(
    f: &dyn Fn(&[f64]) -> f64,
    y: &Direction,
    order: usize,
    config: &OracleConfig,
) -> Result<FdEstimate> {
    config.validate()?;
    fd_with_step(f, y, order, config, config.step(y, order))
}

/// Finite-difference derivative tensor of `A^{num/den}` (odd-root sign
/// convention). For fractional or negative powers the steps scale with
/// `min(|A|/‖∇A‖, (|A|/‖∇²A‖)^{1/2})`, an estimate of the distance from `y`
/// to the null set of `A`, so the stencil stays where the power is smooth. Nonnegative
/// integer powers are polynomials and use `1 + ‖y‖` instead.
pub fn fd_power_tensor(
    metric: &PolynomialMetric,
    num: i64,
    den: i64,
    y: &Direction,
    order: usize,
    config: &OracleConfig,
) -> Result<FdEstimate> {
    config.validate()?;
    if den <= 0 {
        return Err(Error::InvalidMetric("exponent denominator must be positive".into()));
    }
    let a0 = metric.eval(y)?;
    let polynomial = num >= 0 && num % den == 0;
    let distance = if polynomial {
        1.0 + y.norm()
    } else {
        if a0 == 0.0 {
            return Err(Error::ZeroBase(a0));
        }
        let first = a0.abs() / dual_tensor(metric, 1, 1, y, 1)?.norm();
        let hessian = dual_tensor(metric, 1, 1, y, 2)?.norm();
        if hessian > 0.0 {
            first.min((a0.abs() / hessian).sqrt())
        } else {
            first
        }
    };
    let f = |v: &[f64]| metric.eval_unchecked(v).root_power(num, den);
    fd_with_step(&f, y, order, config, config.step_at_scale(config.power_step, distance, order))
}

fn fd_with_step(f: &dyn Fn(&[f64]) -> f64, y: &Direction, order: usize, config: &OracleConfig, h0: f64) -> Result<FdEstimate> {
    if order == 0 || order > 4 {
        return Err(Error::UnsupportedOrder(order));
    }
    let levels = config.richardson_levels;
    if !(h0 > 1e-8 * (1.0 + y.norm())) {
        return Err(Error::StepUnderflow { step: h0 });
    }
    let n = y.dim();
    let mut indicator = 0.0_f64;
    let tensor = Tensor::symmetric_from_fn(n, order, |idx| {
        let raw: Vec<f64> = (0..=levels)
            .map(|l| central_difference(f, y.as_slice(), idx, h0 * 2f64.powi((levels - l) as i32)))
            .collect();
        let (best, change) = richardson(raw);
        indicator = indicator.max(change);
        best
    });
    Ok(FdEstimate {
        tensor,
        error_indicator: indicator,
    })
}

/// Composition of one central difference per slot of `idx`.
fn central_difference(f: &dyn Fn(&[f64]) -> f64, y: &[f64], idx: &[usize], h: f64) -> f64 {
    let r = idx.len();
    let mut point = y.to_vec();
    let mut acc = 0.0;
    for mask in 0..(1u32 << r) {
        point.copy_from_slice(y);
        let mut sign = 1.0;
        for (k, &axis) in idx.iter().enumerate() {
            if mask & (1 << k) != 0 {
                point[axis] -= h;
                sign = -sign;
            } else {
                point[axis] += h;
            }
        }
        acc += sign * f(&point);
    }
    acc / (2.0 * h).powi(r as i32)
}

/// Richardson table over an `h²` error expansion; returns the most refined
/// value and its change from the previous level.
fn richardson(mut column: Vec<f64>) -> (f64, f64) {
    let mut change = 0.0;
    let mut factor = 1.0;
    while column.len() > 1 {
        factor *= 4.0;
        let next: Vec<f64> = column
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        change = (next[next.len() - 1] - column[column.len() - 1]).abs();
        column = next;
    }
    (column[0], change)
}

/// Raw (non-extrapolated) central difference at step `h`; exposed for
/// checking the extrapolation itself.
pub fn fd_tensor_single_step(f: &dyn Fn(&[f64]) -> f64, y: &Direction, order: usize, h: f64) -> Tensor {
    Tensor::symmetric_from_fn(y.dim(), order, |idx| central_difference(f, y.as_slice(), idx, h))
}

/// Arithmetic needed by the nested dual-number oracle.
trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn constant(v: f64) -> Self;
    /// Variable with value `v`, perturbed along the active levels.
    fn seed(v: f64, active: &[bool]) -> Self;
    /// `self^(num/den)` with the odd-root sign convention.
    fn root_power(self, num: i64, den: i64) -> Self;
    /// Coefficient of the product of all perturbations.
    fn top(self) -> f64;
    fn real(self) -> f64;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn seed(v: f64, _active: &[bool]) -> Self {
        v
    }
    fn root_power(self, num: i64, den: i64) -> Self {
        let mag = self.abs().powf(num as f64 / den as f64);
        if self < 0.0 && num.rem_euclid(2) == 1 {
            -mag
        } else {
            mag
        }
    }
    fn top(self) -> f64 {
        self
    }
    fn real(self) -> f64 {
        self
    }
}

/// `re + ε·eps` with `ε² = 0`; nesting gives mixed higher derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual<T> {
    re: T,
    eps: T,
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, eps: self.eps + o.eps }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, eps: self.eps - o.eps }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual {
            re: self.re * o.re,
            eps: self.re * o.eps + self.eps * o.re,
        }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: -self.eps }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(v: f64) -> Self {
        Dual { re: T::constant(v), eps: T::constant(0.0) }
    }
    fn seed(v: f64, active: &[bool]) -> Self {
        Dual {
            re: T::seed(v, &active[1..]),
            eps: T::constant(if active[0] { 1.0 } else { 0.0 }),
        }
    }
    fn root_power(self, num: i64, den: i64) -> Self {
        // d(x^p) = p x^(p-1) dx
        let p = T::constant(num as f64 / den as f64);
        Dual {
            re: self.re.root_power(num, den),
            eps: p * self.re.root_power(num - den, den) * self.eps,
        }
    }
    fn top(self) -> f64 {
        self.eps.top()
    }
    fn real(self) -> f64 {
        self.re.real()
    }
}

type D1 = Dual<f64>;
type D2 = Dual<D1>;
type D3 = Dual<D2>;
type D4 = Dual<D3>;

/// `A^{num/den}` and its derivatives, evaluated over a generic scalar.
fn composite<T: Scalar>(metric: &PolynomialMetric, y: &[f64], idx: &[usize], num: i64, den: i64) -> (f64, f64) {
    let r = idx.len();
    let vars: Vec<T> = (0..y.len())
        .map(|v| {
            // level l perturbs variable idx[r-1-l]; the outermost dual is level 0
            let active: Vec<bool> = (0..r).map(|l| idx[l] == v).collect();
            T::seed(y[v], &active)
        })
        .collect();
    let mut a = T::constant(0.0);
    for (mono, c) in metric.terms() {
        let prod = mono.iter().fold(T::constant(c), |acc, &i| acc * vars[i]);
        a = a + prod;
    }
    (a.real(), a.root_power(num, den).top())
}

/// Derivative tensor of `A^p`, `p = num/den`, by nested dual numbers.
pub fn dual_tensor(metric: &PolynomialMetric, num: i64, den: i64, y: &Direction, order: usize) -> Result<Tensor> {
    if order > 4 {
        return Err(Error::UnsupportedOrder(order));
    }
    if y.dim() != metric.n() {
        return Err(Error::DimensionMismatch { expected: metric.n(), got: y.dim() });
    }
    if den <= 0 {
        return Err(Error::InvalidMetric("exponent denominator must be positive".into()));
    }
    let ys = y.as_slice();
    let a0 = metric.terms().map(|(mono, c)| c * mono.iter().map(|&i| ys[i]).product::<f64>()).sum::<f64>();
    if a0 == 0.0 {
        return Err(Error::ZeroBase(a0));
    }
    if a0 < 0.0 && den % 2 == 0 {
        return Err(Error::DegenerateDomain {
            classification: crate::metric::Classification::OutOfDomain,
            a_value: a0,
        });
    }
    if order == 0 {
        return Ok(Tensor::scalar(composite::<f64>(metric, ys, &[], num, den).1));
    }
    let eval = |idx: &[usize]| match idx.len() {
        1 => composite::<D1>(metric, ys, idx, num, den).1,
        2 => composite::<D2>(metric, ys, idx, num, den).1,
        3 => composite::<D3>(metric, ys, idx, num, den).1,
        _ => composite::<D4>(metric, ys, idx, num, den).1,
    };
    Ok(Tensor::symmetric_from_fn(metric.n(), order, eval))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleMethod {
    FiniteDifference,
    DualNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub max_abs_error: f64,
    /// Largest normalized error `|a − o| / max(|o|, floor)`.
    pub max_rel_error: f64,
    /// 1-based multi-index of the entry with the largest normalized error.
    pub worst_index: Vec<usize>,
    pub pass: bool,
    pub method: OracleMethod,
    pub tolerance: f64,
}

/// Entry-wise relative comparison with an absolute floor for near-zero
/// oracle entries.
///
/// The normalized error of an entry is `|a − o| / max(|o|, floor)` with
/// `floor = zero_floor (1 + max|o|)`, and the comparison passes when every
/// normalized error is at most `tolerance`. Ties in the worst entry resolve
/// to the first index in row-major order.
pub fn compare(
    analytic: &Tensor,
    oracle: &Tensor,
    tolerance: f64,
    zero_floor: f64,
    method: OracleMethod,
) -> Result<ComparisonReport> {
    if !analytic.same_shape(oracle) {
        return Err(Error::ShapeMismatch(format!(
            "order {} (n={}) vs order {} (n={})",
            analytic.order(),
            analytic.n(),
            oracle.order(),
            oracle.n()
        )));
    }
    let floor = zero_floor * (1.0 + oracle.max_abs());
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut worst = 0usize;
    let mut worst_score = -1.0;
    let mut pass = true;
    for (k, (&a, &o)) in analytic.data().iter().zip(oracle.data()).enumerate() {
        let diff = (a - o).abs();
        let score = diff / o.abs().max(floor);
        max_abs = max_abs.max(diff);
        if !(score <= tolerance) {
            pass = false;
        }
        let score = if score.is_nan() { f64::INFINITY } else { score };
        max_rel = max_rel.max(score);
        if score > worst_score {
            worst_score = score;
            worst = k;
        }
    }
    let worst_index = if analytic.order() == 0 {
        Vec::new()
    } else {
        analytic.unflatten(worst).into_iter().map(|i| i + 1).collect()
    };
    Ok(ComparisonReport {
        max_abs_error: max_abs,
        max_rel_error: max_rel,
        worst_index,
        pass,
        method,
        tolerance,
    })
}

/// Least-squares weights of `error ≈ Σ_s w_s class_s` over the given class
/// tensors, with the share of the error norm each explains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassAttribution {
    pub weights: Vec<f64>,
    /// `‖w_s class_s‖ / Σ_t ‖w_t class_t‖`.
    pub shares: Vec<f64>,
    /// Relative residual of the fit.
    pub residual: f64,
    /// Position of the class with the largest share.
    pub dominant: usize,
}

pub fn attribute_classes(error: &Tensor, classes: &[Tensor]) -> ClassAttribution {
    let k = classes.len();
    let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| dot(&classes[i], &classes[j]));
    let rhs = nalgebra::DVector::from_fn(k, |i, _| dot(&classes[i], error));
    let weights: Vec<f64> = gram
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map(|w| w.iter().copied().collect())
        .unwrap_or_else(|_| vec![0.0; k]);
    let mut fit = Tensor::zeros(error.n(), error.order());
    for (w, c) in weights.iter().zip(classes) {
        fit = fit.add(&c.scaled(*w));
    }
    let residual = error.sub(&fit).norm() / error.norm().max(f64::MIN_POSITIVE);
    let norms: Vec<f64> = weights.iter().zip(classes).map(|(w, c)| (w * c.norm()).abs()).collect();
    let total: f64 = norms.iter().sum();
    let shares: Vec<f64> = norms.iter().map(|v| if total > 0.0 { v / total } else { 0.0 }).collect();
    let dominant = shares
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, &s)| if s > best.1 { (i, s) } else { best })
        .0;
    ClassAttribution {
        weights,
        shares,
        residual,
        dominant,
    }
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricTag {
    Bg3,
    Bg4,
}

impl MetricTag {
    pub fn dim(self) -> usize {
        match self {
            MetricTag::Bg3 => 3,
            MetricTag::Bg4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricTag::Bg3 => "bg3",
            MetricTag::Bg4 => "bg4",
        }
    }

    pub fn metric(self) -> PolynomialMetric {
        match self {
            MetricTag::Bg3 => crate::metric::make_bg3(),
            MetricTag::Bg4 => crate::metric::make_bg4(),
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "bg3" => Some(MetricTag::Bg3),
            "bg4" => Some(MetricTag::Bg4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fixture {
    pub tensor: Tensor,
    /// Set when the printed formula is known to be wrong.
    pub erratum: Option<&'static str>,
}

/// Printed closed forms evaluated verbatim at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenSet {
    pub tag: MetricTag,
    pub entries: BTreeMap<&'static str, Fixture>,
}

impl GoldenSet {
    pub fn get(&self, name: &str) -> &Tensor {
        &self.entries[name].tensor
    }

    pub fn scalar(&self, name: &str) -> f64 {
        self.entries[name].tensor.data()[0]
    }

    fn put(&mut self, name: &'static str, tensor: Tensor) {
        self.entries.insert(name, Fixture { tensor, erratum: None });
    }

    fn put_erratum(&mut self, name: &'static str, tensor: Tensor, note: &'static str) {
        self.entries.insert(name, Fixture { tensor, erratum: Some(note) });
    }
}

/// Evaluates the printed closed forms for a builtin metric at `y`.
///
/// Fails with [`Error::HyperplaneSingularity`] when `y` has a zero component,
/// since several of the forms divide by `y^i`.
pub fn golden_fixtures(tag: MetricTag, y: &Direction) -> Result<GoldenSet> {
    if y.dim() != tag.dim() {
        return Err(Error::DimensionMismatch { expected: tag.dim(), got: y.dim() });
    }
    if let Some(i) = y.as_slice().iter().position(|&v| v == 0.0) {
        return Err(Error::HyperplaneSingularity { index: i + 1 });
    }
    let mut set = GoldenSet { tag, entries: BTreeMap::new() };
    match tag {
        MetricTag::Bg3 => bg3_fixtures(y.as_slice(), &mut set),
        MetricTag::Bg4 => bg4_fixtures(y.as_slice(), &mut set),
    }
    Ok(set)
}

fn mat(rows: Vec<Vec<f64>>) -> Tensor {
    let n = rows.len();
    Tensor::from_vec(n, 2, rows.into_iter().flatten().collect()).expect("square fixture")
}

fn vec1(v: Vec<f64>) -> Tensor {
    let n = v.len();
    Tensor::from_vec(n, 1, v).expect("vector fixture")
}

fn outer_sum(a: &Tensor, b: &Tensor) -> Tensor {
    // A_jk A_m + A_km A_j + A_mj A_k
    let n = b.n();
    Tensor::from_fn(n, 3, |ix| {
        let (j, k, m) = (ix[0], ix[1], ix[2]);
        a.get(&[j, k]) * b.get(&[m]) + a.get(&[k, m]) * b.get(&[j]) + a.get(&[m, j]) * b.get(&[k])
    })
}

fn triple(b: &Tensor) -> Tensor {
    let n = b.n();
    Tensor::from_fn(n, 3, |ix| b.get(&[ix[0]]) * b.get(&[ix[1]]) * b.get(&[ix[2]]))
}

/// `g^jk = c1 A^{jk} + c2 A^j A^k`, `A^j = A^{jw} A_w`.
fn printed_inverse(a_inv: &Tensor, a_i: &Tensor, c1: f64, c2: impl Fn(f64) -> f64) -> Tensor {
    let n = a_i.n();
    let up: Vec<f64> = (0..n).map(|j| (0..n).map(|w| a_inv.get(&[j, w]) * a_i.get(&[w])).sum()).collect();
    let s: f64 = (0..n).map(|u| up[u] * a_i.get(&[u])).sum();
    let k = c2(s);
    Tensor::from_fn(n, 2, |ix| c1 * a_inv.get(ix) + k * up[ix[0]] * up[ix[1]])
}

fn bg3_fixtures(y: &[f64], set: &mut GoldenSet) {
    let (y1, y2, y3) = (y[0], y[1], y[2]);
    let s1 = y1 + y2 + y3;
    let s2 = y1 * y1 + y2 * y2 + y3 * y3;
    let s3 = y1.powi(3) + y2.powi(3) + y3.powi(3);
    let p3 = y1 * y2 * y3;
    let a = 2.0 * s3 - s1 * s2 + 2.0 * p3;
    set.put("A", Tensor::scalar(a));

    let a_i = vec1(y.iter().map(|&v| 6.0 * v * v - s2 - 2.0 * v * s1 + 2.0 * p3 / v).collect());
    set.put("A_i", a_i.clone());
    set.put(
        "A_ij_closed",
        Tensor::from_fn(3, 2, |ix| {
            let (yi, yj) = (y[ix[0]], y[ix[1]]);
            let mut v = -2.0 * yi - 2.0 * yj + 2.0 * p3 / (yi * yj);
            if ix[0] == ix[1] {
                v += 12.0 * yi - 2.0 * s1 - 2.0 * p3 / (yi * yi);
            }
            v
        }),
    );
    let a_ij = mat(vec![
        vec![6.0 * y1 - 2.0 * y2 - 2.0 * y3, -2.0 * y1 - 2.0 * y2 + 2.0 * y3, -2.0 * y1 + 2.0 * y2 - 2.0 * y3],
        vec![-2.0 * y1 - 2.0 * y2 + 2.0 * y3, -2.0 * y1 + 6.0 * y2 - 2.0 * y3, 2.0 * y1 - 2.0 * y2 - 2.0 * y3],
        vec![-2.0 * y1 + 2.0 * y2 - 2.0 * y3, 2.0 * y1 - 2.0 * y2 - 2.0 * y3, -2.0 * y1 - 2.0 * y2 + 6.0 * y3],
    ]);
    set.put("A_ij", a_ij.clone());

    let d = -4.0 * y1.powi(3) - 4.0 * y2.powi(3) - 4.0 * y3.powi(3)
        + 4.0 * y1 * y1 * y2
        + 4.0 * y1 * y1 * y3
        + 4.0 * y1 * y2 * y2
        + 4.0 * y1 * y3 * y3
        + 4.0 * y2 * y2 * y3
        + 4.0 * y2 * y3 * y3
        - 8.0 * p3;
    set.put("D", Tensor::scalar(d));
    set.put("D_symmetric", Tensor::scalar(-8.0 * s3 + 4.0 * s1 * s2 - 8.0 * p3));
    set.put("det_A_ij", Tensor::scalar(-8.0 * d));

    let a_star = mat(vec![
        vec![2.0 * y2 * y2 - 4.0 * y2 * y3 + 2.0 * y3 * y3, s2 - 2.0 * y1 * y3 - 2.0 * y2 * y3, s2 - 2.0 * y1 * y2 - 2.0 * y2 * y3],
        vec![s2 - 2.0 * y1 * y3 - 2.0 * y2 * y3, 2.0 * y1 * y1 - 4.0 * y1 * y3 + 2.0 * y3 * y3, s2 - 2.0 * y1 * y2 - 2.0 * y1 * y3],
        vec![s2 - 2.0 * y1 * y2 - 2.0 * y2 * y3, s2 - 2.0 * y1 * y2 - 2.0 * y1 * y3, 2.0 * y1 * y1 - 4.0 * y1 * y2 + 2.0 * y2 * y2],
    ]);
    let a_inv = a_star.scaled(1.0 / d);
    set.put("A_star", a_star);
    set.put("A_inv", a_inv.clone());
    set.put_erratum(
        "A_inv_compact",
        Tensor::from_fn(3, 2, |ix| {
            let (yj, yk) = (y[ix[0]], y[ix[1]]);
            let delta = if ix[0] == ix[1] { yj * yj } else { 0.0 };
            (s2 - 2.0 * (yj + yk) * p3 / (yj * yk) - delta) / d
        }),
        "compact A^{jk} formula disagrees with the printed adjugate",
    );

    set.put(
        "A_m",
        Tensor::from_fn(3, 3, |ix| {
            let (j, k, m) = (ix[0], ix[1], ix[2]);
            if j == k && k == m {
                6.0
            } else if j != k && k != m && m != j {
                2.0
            } else {
                -2.0
            }
        }),
    );

    let cbrt_a = a.cbrt();
    let a_m13 = 1.0 / cbrt_a;
    let a_m43 = a_m13 / a;
    let a_m73 = a_m43 / a;
    let aiaj = Tensor::from_fn(3, 2, |ix| a_i.get(&[ix[0]]) * a_i.get(&[ix[1]]));
    set.put("g", a_ij.scaled(a_m13 / 3.0).sub(&aiaj.scaled(a_m43 / 9.0)));
    set.put(
        "g_inv",
        printed_inverse(&a_inv, &a_i, 3.0 * cbrt_a, |s| (a_m13 * a_m13) / (1.0 - s / (3.0 * a))),
    );

    let a_m = set.get("A_m").clone();
    let pair = outer_sum(&a_ij, &a_i);
    let trip = triple(&a_i);
    let base = a_m.scaled(a_m13 / 6.0).sub(&pair.scaled(a_m43 / 18.0));
    set.put_erratum(
        "C_printed",
        base.sub(&trip.scaled(a_m73 / 18.0)),
        "third partition class printed as -1/18; the chain rule gives +2/27",
    );
    set.put("C_derived", base.add(&trip.scaled(2.0 * a_m73 / 27.0)));
}

fn bg4_fixtures(y: &[f64], set: &mut GoldenSet) {
    let (y1, y2, y3, y4) = (y[0], y[1], y[2], y[3]);
    let sq = |v: f64| v * v;
    let s2 = y.iter().map(|v| v * v).sum::<f64>();
    let s4 = y.iter().map(|v| v.powi(4)).sum::<f64>();
    let p4 = y1 * y2 * y3 * y4;
    let a_val = 2.0 * s4 - s2 * s2 - 8.0 * p4;
    set.put("A", Tensor::scalar(a_val));

    let a_i = vec1(
        y.iter()
            .map(|&v| 4.0 * v.powi(3) - 4.0 * v * (s2 - v * v) - 8.0 * p4 / v)
            .collect(),
    );
    set.put("A_i", a_i.clone());
    set.put(
        "A_ij_closed",
        Tensor::from_fn(4, 2, |ix| {
            let (yi, yj) = (y[ix[0]], y[ix[1]]);
            let mut v = -8.0 * yi * yj - 8.0 * p4 / (yi * yj);
            if ix[0] == ix[1] {
                v += 24.0 * yi * yi - 4.0 * s2 + 8.0 * p4 / (yi * yi);
            }
            v
        }),
    );

    let p = 12.0 * sq(y1) - 4.0 * sq(y2) - 4.0 * sq(y3) - 4.0 * sq(y4);
    let q = -4.0 * sq(y1) + 12.0 * sq(y2) - 4.0 * sq(y3) - 4.0 * sq(y4);
    let r = -4.0 * sq(y1) - 4.0 * sq(y2) + 12.0 * sq(y3) - 4.0 * sq(y4);
    let s = -4.0 * sq(y1) - 4.0 * sq(y2) - 4.0 * sq(y3) + 12.0 * sq(y4);
    let a = -8.0 * y1 * y2 - 8.0 * y3 * y4;
    let b = -8.0 * y1 * y3 - 8.0 * y2 * y4;
    let c = -8.0 * y1 * y4 - 8.0 * y2 * y3;
    for (name, v) in [("p", p), ("q", q), ("r", r), ("s", s), ("a", a), ("b", b), ("c", c)] {
        set.put(name, Tensor::scalar(v));
    }
    let a_ij = mat(vec![
        vec![p, a, b, c],
        vec![a, q, c, b],
        vec![b, c, r, a],
        vec![c, b, a, s],
    ]);
    set.put("A_ij", a_ij.clone());

    let d = a.powi(4) - 2.0 * a * a * c * c - 2.0 * b * b * c * c - 2.0 * a * a * b * b
        + b.powi(4)
        + c.powi(4)
        - a * a * p * q
        - b * b * p * r
        - a * a * r * s
        - b * b * q * s
        - c * c * p * s
        - c * c * q * r
        + 2.0 * a * b * c * p
        + 2.0 * a * b * c * q
        + 2.0 * a * b * c * r
        + 2.0 * a * b * c * s
        + p * q * r * s;
    set.put("D", Tensor::scalar(d));
    set.put("det_A_ij", Tensor::scalar(d));

    let e11 = -q * a * a + 2.0 * a * b * c - r * b * b - s * c * c + q * r * s;
    let e12 = a.powi(3) - a * c * c - a * b * b + b * c * r + b * c * s - a * r * s;
    let e13 = b.powi(3) - b * c * c - a * a * b + a * c * q + a * c * s - b * q * s;
    let e14 = c.powi(3) - b * b * c - a * a * c + a * b * q + a * b * r - c * q * r;
    let e22 = -p * a * a + 2.0 * a * b * c - s * b * b - r * c * c + p * r * s;
    let e23 = c.powi(3) - b * b * c - a * a * c + a * b * p + a * b * s - c * p * s;
    let e24 = b.powi(3) - b * c * c - a * a * b + a * c * p + a * c * r - b * p * r;
    let e33 = -s * a * a + 2.0 * a * b * c - p * b * b - q * c * c + p * q * s;
    let e34 = a.powi(3) - a * c * c - a * b * b + b * c * p + b * c * q - a * p * q;
    let e44 = -r * a * a + 2.0 * a * b * c - q * b * b - p * c * c + p * q * r;
    let a_star = mat(vec![
        vec![e11, e12, e13, e14],
        vec![e12, e22, e23, e24],
        vec![e13, e23, e33, e34],
        vec![e14, e24, e34, e44],
    ]);
    let a_inv = a_star.scaled(1.0 / d);
    set.put("A_star", a_star);
    set.put("A_inv", a_inv.clone());

    set.put(
        "A_m",
        Tensor::from_fn(4, 3, |ix| {
            let (j, k, m) = (ix[0], ix[1], ix[2]);
            if j == k && k == m {
                24.0 * y[m]
            } else {
                // -8 y^w where w completes the index pattern: the sorted
                // multiset {j,k,m,w} is either {i,i,l,l} or {1,2,3,4}
                -8.0 * y[missing_index(j, k, m)]
            }
        }),
    );

    let sqrt_a = a_val.sqrt();
    let a_m12 = 1.0 / sqrt_a;
    let a_m32 = a_m12 / a_val;
    let a_m52 = a_m32 / a_val;
    let aiaj = Tensor::from_fn(4, 2, |ix| a_i.get(&[ix[0]]) * a_i.get(&[ix[1]]));
    set.put("g", a_ij.scaled(a_m12 / 4.0).sub(&aiaj.scaled(a_m32 / 8.0)));
    set.put_erratum(
        "g_inv_printed",
        printed_inverse(&a_inv, &a_i, 4.0 * sqrt_a, |s| a_m12 / (2.0 - s / a_val)),
        "rank-one term printed as A^{-1/2}/(2 - A^{-1}s); the update gives 4A^{-1/2}/(2 - A^{-1}s)",
    );
    set.put(
        "g_inv",
        printed_inverse(&a_inv, &a_i, 4.0 * sqrt_a, |s| 4.0 * a_m12 / (2.0 - s / a_val)),
    );

    let a_m = set.get("A_m").clone();
    let c = a_m
        .scaled(a_m12 / 8.0)
        .sub(&outer_sum(&a_ij, &a_i).scaled(a_m32 / 16.0))
        .add(&triple(&a_i).scaled(3.0 * a_m52 / 32.0));
    set.put("C_printed", c);
}

/// For a non-constant entry of the printed `A_(m)` matrices, the index `w`
/// such that the entry is `-8 y^w`.
fn missing_index(j: usize, k: usize, m: usize) -> usize {
    let mut counts = [0u8; 4];
    for i in [j, k, m] {
        counts[i] += 1;
    }
    if counts.iter().all(|&c| c <= 1) {
        // three distinct: the fourth index
        return counts.iter().position(|&c| c == 0).unwrap();
    }
    // a pair plus a single: the single index pairs up
    counts.iter().position(|&c| c == 1).unwrap()
}
