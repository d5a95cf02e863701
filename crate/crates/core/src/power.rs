//! Derivatives of `A^p` and the tensors built from them.
//!
//! For a product of `L^2 = A^{2/m}` all the objects of the vertical geometry
//! are derivatives of a power of a polynomial, so they share one rule:
//!
//! ```text
//! ∂^r A^p / ∂y^{i_1}...∂y^{i_r} = Σ_π p^(|π|) A^{p-|π|} Π_{B ∈ π} A_{i_B}
//! ```
//!
//! where `π` runs over the set partitions of the `r` slots and `p^(s)` is the
//! falling factorial. `g_ij` is half the second derivative of `A^{2/m}`, the
//! Cartan torsion `C_jkm` a quarter of the third, and the torsion gradient a
//! quarter of the fourth.

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{domain_status, DerivativeBundle, Direction, DomainStatus, PolynomialMetric};
use crate::tensor::{from_matrix, to_matrix, Tensor};

/// Rational exponent `p = numer/denom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponent(Ratio<i64>);

impl Exponent {
    pub fn new(numer: i64, denom: i64) -> Self {
        Self(Ratio::new(numer, denom))
    }

    pub fn integer(k: i64) -> Self {
        Self(Ratio::from_integer(k))
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// `p - k` for an integer `k`.
    pub fn minus(&self, k: i64) -> Exponent {
        Exponent(self.0 - k)
    }

    /// Falling factorial `p (p-1) ... (p-s+1)`, exact.
    pub fn falling_factorial(&self, s: usize) -> Ratio<i64> {
        (0..s as i64).fold(Ratio::from_integer(1), |acc, k| acc * (self.0 - k))
    }

    /// Real power `a^p`.
    ///
    /// A negative base is accepted only for odd denominators, with
    /// `a^{u/v} = sign(a)^u |a|^{u/v}`, so `A^{1/3}` keeps the sign of `A`
    /// and `A^{2/3}` is positive.
    pub fn real_power(&self, a: f64) -> Result<f64> {
        if a == 0.0 {
            return Err(Error::ZeroBase(a));
        }
        let magnitude = a.abs().powf(self.to_f64());
        if a > 0.0 {
            return Ok(magnitude);
        }
        if self.0.denom() % 2 == 0 {
            return Err(Error::DegenerateDomain {
                classification: crate::metric::Classification::OutOfDomain,
                a_value: a,
            });
        }
        Ok(if self.0.numer().rem_euclid(2) == 1 {
            -magnitude
        } else {
            magnitude
        })
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// All set partitions of `{0, .., r-1}`, blocks in order of first element.
pub fn set_partitions(r: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = vec![Vec::new()];
    for e in 0..r {
        let mut next = Vec::new();
        for part in &out {
            for b in 0..part.len() {
                let mut p: Vec<Vec<usize>> = part.clone();
                p[b].push(e);
                next.push(p);
            }
            let mut p = part.clone();
            p.push(vec![e]);
            next.push(p);
        }
        out = next;
    }
    out
}

#[derive(Debug, Clone)]
pub struct PowerDerivativeRequest<'a> {
    pub bundle: &'a DerivativeBundle,
    pub p: Exponent,
    pub order: usize,
}

/// `∂^order A^p` by the set-partition rule.
pub fn power_derivative(req: &PowerDerivativeRequest<'_>) -> Result<Tensor> {
    let weights: Vec<f64> = (0..=req.order)
        .map(|s| ratio_to_f64(req.p.falling_factorial(s)))
        .collect();
    power_derivative_weighted(req.bundle, req.p, req.order, &weights)
}

/// Same sum as [`power_derivative`] with `weights[s]` in place of the
/// falling factorial on every `s`-block partition.
///
/// Used to evaluate alternative coefficient sets (such as misprinted ones)
/// through the same code path.
pub fn power_derivative_weighted(
    bundle: &DerivativeBundle,
    p: Exponent,
    order: usize,
    weights: &[f64],
) -> Result<Tensor> {
    if order > 4 {
        return Err(Error::UnsupportedOrder(order));
    }
    if bundle.a0 == 0.0 {
        return Err(Error::ZeroBase(bundle.a0));
    }
    if order == 0 {
        return Ok(Tensor::scalar(weights[0] * p.real_power(bundle.a0)?));
    }
    let scale: Vec<f64> = (0..=order)
        .map(|s| Ok(weights[s] * p.minus(s as i64).real_power(bundle.a0)?))
        .collect::<Result<_>>()?;
    let partitions = set_partitions(order);
    Ok(Tensor::symmetric_from_fn(bundle.n(), order, |idx| {
        partitions
            .iter()
            .map(|part| scale[part.len()] * block_product(bundle, idx, part))
            .sum()
    }))
}

/// `Σ_{|π| = s} A^{p-s} Π_B A_{i_B}`: the `s`-block class without its
/// falling-factorial weight.
pub fn partition_class_tensor(
    bundle: &DerivativeBundle,
    p: Exponent,
    order: usize,
    blocks: usize,
) -> Result<Tensor> {
    let mut weights = vec![0.0; order + 1];
    if blocks <= order {
        weights[blocks] = 1.0;
    }
    power_derivative_weighted(bundle, p, order, &weights)
}

fn block_product(bundle: &DerivativeBundle, idx: &[usize], part: &[Vec<usize>]) -> f64 {
    let mut sub = [0usize; 4];
    part.iter()
        .map(|block| {
            for (k, &slot) in block.iter().enumerate() {
                sub[k] = idx[slot];
            }
            bundle.entry(&sub[..block.len()])
        })
        .product()
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `p = 2/m`, the exponent of `L^2`.
pub fn metric_exponent(m: usize) -> Exponent {
    Exponent::new(2, m as i64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    /// Degeneracy threshold on `|A|`; `None` is scale-aware.
    pub epsilon: Option<f64>,
    /// Largest accepted condition estimate of `g`.
    pub condition_threshold: f64,
    /// Relative size of the Sherman-Morrison denominator `α + βs` (against
    /// `α`) below which the direct inverse is used instead.
    pub rank_one_tolerance: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            epsilon: None,
            condition_threshold: 1e12,
            rank_one_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseMethod {
    RankOne,
    Direct,
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Vertical geometry of the metric at one direction.
#[derive(Debug, Clone)]
pub struct GeometryPoint {
    pub y: Direction,
    pub status: DomainStatus,
    pub bundle: DerivativeBundle,
    pub l_value: f64,
    pub g: Tensor,
    pub g_inv: Tensor,
    pub inverse_method: InverseMethod,
    pub c_cov: Tensor,
    pub c_mixed: Tensor,
    pub c_grad: Tensor,
    pub cond: f64,
    pub signature: Signature,
}

impl GeometryPoint {
    pub fn evaluate(metric: &PolynomialMetric, y: &Direction, config: &GeometryConfig) -> Result<Self> {
        let status = require_domain(metric, y, config)?;
        let bundle = metric.derivative_bundle(y)?;
        let m = metric.m();
        let l_value = Exponent::new(1, m as i64).real_power(bundle.a0)?;
        let g = fundamental_from_bundle(&bundle)?;
        let (cond, signature) = spectrum(&g);
        if !(cond <= config.condition_threshold) {
            return Err(Error::SingularMetric { condition: cond });
        }
        let (g_inv, inverse_method) = inverse_fundamental_tensor(&bundle, &g, config)?;
        let c_cov = cartan_from_bundle(&bundle)?;
        let c_mixed = mixed_torsion(&g_inv, &c_cov);
        let c_grad = torsion_gradient_from_bundle(&bundle)?;
        Ok(Self {
            y: y.clone(),
            status,
            bundle,
            l_value,
            g,
            g_inv,
            inverse_method,
            c_cov,
            c_mixed,
            c_grad,
            cond,
            signature,
        })
    }

    pub fn n(&self) -> usize {
        self.y.dim()
    }
}

fn require_domain(metric: &PolynomialMetric, y: &Direction, config: &GeometryConfig) -> Result<DomainStatus> {
    let status = domain_status(metric, y, config.epsilon)?;
    if !status.is_usable() {
        return Err(Error::DegenerateDomain {
            classification: status.classification,
            a_value: status.a_value,
        });
    }
    Ok(status)
}

/// `g_ij = ½ ∂²A^{2/m}/∂y^i∂y^j`.
pub fn fundamental_tensor(metric: &PolynomialMetric, y: &Direction) -> Result<Tensor> {
    require_domain(metric, y, &GeometryConfig::default())?;
    fundamental_from_bundle(&metric.derivative_bundle(y)?)
}

pub fn fundamental_from_bundle(bundle: &DerivativeBundle) -> Result<Tensor> {
    scaled_power_derivative(bundle, 2, 0.5)
}

/// `C_jkm = ¼ ∂³A^{2/m}`.
pub fn cartan_torsion(metric: &PolynomialMetric, y: &Direction) -> Result<Tensor> {
    require_domain(metric, y, &GeometryConfig::default())?;
    cartan_from_bundle(&metric.derivative_bundle(y)?)
}

pub fn cartan_from_bundle(bundle: &DerivativeBundle) -> Result<Tensor> {
    scaled_power_derivative(bundle, 3, 0.25)
}

/// `∂C_jkm/∂y^n = ¼ ∂⁴A^{2/m}`.
pub fn torsion_gradient(metric: &PolynomialMetric, y: &Direction) -> Result<Tensor> {
    require_domain(metric, y, &GeometryConfig::default())?;
    torsion_gradient_from_bundle(&metric.derivative_bundle(y)?)
}

pub fn torsion_gradient_from_bundle(bundle: &DerivativeBundle) -> Result<Tensor> {
    scaled_power_derivative(bundle, 4, 0.25)
}

fn scaled_power_derivative(bundle: &DerivativeBundle, order: usize, factor: f64) -> Result<Tensor> {
    let t = power_derivative(&PowerDerivativeRequest {
        bundle,
        p: metric_exponent(bundle.m),
        order,
    })?;
    Ok(t.scaled(factor))
}

/// Coefficients of `g = α B + β a aᵀ` with `B = A_ij`, `a = A_i`.
pub fn rank_one_coefficients(bundle: &DerivativeBundle) -> Result<(f64, f64)> {
    let p = metric_exponent(bundle.m);
    let mf = bundle.m as f64;
    let alpha = p.minus(1).real_power(bundle.a0)? / mf;
    let beta = (p.to_f64() - 1.0) / mf * p.minus(2).real_power(bundle.a0)?;
    Ok((alpha, beta))
}

/// `g^{-1}` through the rank-one structure of `g`, falling back to a direct
/// inverse when `A_ij` is singular or the update denominator degenerates.
pub fn inverse_fundamental_tensor(
    bundle: &DerivativeBundle,
    g: &Tensor,
    config: &GeometryConfig,
) -> Result<(Tensor, InverseMethod)> {
    match inverse_rank_one(bundle, config) {
        Ok(inv) => Ok((inv, InverseMethod::RankOne)),
        Err(Error::SingularMetric { .. }) => Ok((inverse_direct(g, config)?, InverseMethod::Direct)),
        Err(e) => Err(e),
    }
}

/// Sherman-Morrison:
/// `(αB + β aaᵀ)⁻¹ = B⁻¹/α − β/(α(α+βs)) (B⁻¹a)(B⁻¹a)ᵀ`, `s = aᵀB⁻¹a`.
pub fn inverse_rank_one(bundle: &DerivativeBundle, config: &GeometryConfig) -> Result<Tensor> {
    rank_one_with_coefficient(bundle, config, |alpha, beta, s| beta / (alpha * (alpha + beta * s)))
}

/// Rank-one inverse with a caller-supplied update coefficient
/// `k(α, β, s)` in `B⁻¹/α − k (B⁻¹a)(B⁻¹a)ᵀ`.
pub fn rank_one_with_coefficient(
    bundle: &DerivativeBundle,
    config: &GeometryConfig,
    coefficient: impl Fn(f64, f64, f64) -> f64,
) -> Result<Tensor> {
    let (alpha, beta) = rank_one_coefficients(bundle)?;
    let b = to_matrix(&bundle.a2);
    let (b_cond, _) = spectrum(&bundle.a2);
    if !(b_cond <= config.condition_threshold) {
        return Err(Error::SingularMetric { condition: b_cond });
    }
    let b_inv = b
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularMetric { condition: f64::INFINITY })?;
    let a = nalgebra::DVector::from_column_slice(bundle.a1.data());
    let w = &b_inv * &a;
    let s = a.dot(&w);
    let denom = alpha + beta * s;
    if denom.abs() <= config.rank_one_tolerance * alpha.abs() {
        return Err(Error::SingularMetric { condition: f64::INFINITY });
    }
    let k = coefficient(alpha, beta, s);
    let inv: DMatrix<f64> = b_inv / alpha - (&w * w.transpose()) * k;
    Ok(symmetrize(&from_matrix(&inv)))
}

pub fn inverse_direct(g: &Tensor, config: &GeometryConfig) -> Result<Tensor> {
    let (cond, _) = spectrum(g);
    if !(cond <= config.condition_threshold) {
        return Err(Error::SingularMetric { condition: cond });
    }
    let inv = to_matrix(g)
        .lu()
        .try_inverse()
        .ok_or(Error::SingularMetric { condition: cond })?;
    Ok(symmetrize(&from_matrix(&inv)))
}

fn symmetrize(t: &Tensor) -> Tensor {
    Tensor::from_fn(t.n(), 2, |ix| 0.5 * (t.get(&[ix[0], ix[1]]) + t.get(&[ix[1], ix[0]])))
}

/// Condition estimate `max|λ| / min|λ|` and eigenvalue signature of a
/// symmetric 2-tensor.
pub fn spectrum(t: &Tensor) -> (f64, Signature) {
    let eig = SymmetricEigen::new(to_matrix(t));
    let mags: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if min == 0.0 { f64::INFINITY } else { max / min };
    let zero_tol = max * 1e-14;
    let mut sig = Signature {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for &v in eig.eigenvalues.iter() {
        if v.abs() <= zero_tol {
            sig.zero += 1;
        } else if v > 0.0 {
            sig.positive += 1;
        } else {
            sig.negative += 1;
        }
    }
    (cond, sig)
}

/// `C^i_jk = g^{im} C_jkm`, stored as `[i][j][k]`.
pub fn mixed_torsion(g_inv: &Tensor, c_cov: &Tensor) -> Tensor {
    let n = c_cov.n();
    Tensor::from_fn(n, 3, |ix| {
        (0..n)
            .map(|m| g_inv.get(&[ix[0], m]) * c_cov.get(&[ix[1], ix[2], m]))
            .sum()
    })
}

/// Lowers the first slot of a tensor with `g`: `T_{i..} = g_il T^l_{..}`.
pub fn lower_first(g: &Tensor, t: &Tensor) -> Tensor {
    let n = t.n();
    Tensor::from_fn(n, t.order(), |ix| {
        let mut src = ix.to_vec();
        (0..n)
            .map(|l| {
                src[0] = l;
                g.get(&[ix[0], l]) * t.get(&src)
            })
            .sum()
    })
}
