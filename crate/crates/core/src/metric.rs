//! m-th root metrics `L = A(y)^{1/m}` and the derivative tensors of `A`.
//!
//! A metric is held either as a product of `n` linear forms or as the expanded
//! homogeneous polynomial `A`. All differentiation goes through the polynomial
//! coefficients: a monomial is a sorted multi-index of variable positions, and
//! differentiating by `y^v` removes one `v` and multiplies by the number of
//! `v`s it had. Nothing divides by a component of `y`, so derivative tensors
//! are defined everywhere, including on the coordinate hyperplanes.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Fiber coordinates `y^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::ShapeMismatch("direction has no components".into()));
        }
        if let Some((i, v)) = components.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("y^{} = {v}", i + 1)));
        }
        Ok(Self(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, lambda: f64) -> Direction {
        Direction(self.0.iter().map(|v| v * lambda).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<usize> for Direction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Direction::new(v)
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Direction::new(v).map_err(serde::de::Error::custom)
    }
}

/// Default threshold on `|det(forms)|` below which the forms are rejected.
pub const DEFAULT_FORMS_THRESHOLD: f64 = 1e-10;

/// `F = (a^1 a^2 ... a^n)^{1/n}` with `a^α = a^α_β y^β`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFormsMetric {
    n: usize,
    forms: Vec<Vec<f64>>,
}

impl LinearFormsMetric {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forms(&self) -> &[Vec<f64>] {
        &self.forms
    }

    /// Value of the `alpha`-th 1-form at `y`.
    pub fn form_value(&self, alpha: usize, y: &[f64]) -> f64 {
        self.forms[alpha].iter().zip(y).map(|(a, v)| a * v).sum()
    }

    /// Direct product of the linear forms, without expansion.
    pub fn product(&self, y: &Direction) -> Result<f64> {
        check_dim(self.n, y)?;
        Ok((0..self.n).map(|a| self.form_value(a, y.as_slice())).product())
    }

    pub fn determinant(&self) -> f64 {
        DMatrix::from_fn(self.n, self.n, |i, j| self.forms[i][j]).determinant()
    }
}

/// Validates and stores a set of 1-forms, using [`DEFAULT_FORMS_THRESHOLD`].
pub fn make_product_metric(forms: Vec<Vec<f64>>) -> Result<LinearFormsMetric> {
    make_product_metric_with(forms, DEFAULT_FORMS_THRESHOLD)
}

pub fn make_product_metric_with(forms: Vec<Vec<f64>>, threshold: f64) -> Result<LinearFormsMetric> {
    let n = forms.len();
    if n == 0 {
        return Err(Error::ShapeMismatch("no 1-forms given".into()));
    }
    for row in &forms {
        if row.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "forms matrix must be {n}x{n}, found a row of length {}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("forms matrix entry".into()));
        }
    }
    let metric = LinearFormsMetric { n, forms };
    let det = metric.determinant();
    if det.abs() < threshold {
        return Err(Error::DegenerateForms { det });
    }
    Ok(metric)
}

/// Homogeneous polynomial of degree `m` in `n` variables.
///
/// Keys are sorted multi-indices of length `m` with 0-based variable
/// positions; `[0, 1, 1]` is `y^1 (y^2)^2`. Zero coefficients are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMetric {
    n: usize,
    m: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl PolynomialMetric {
    /// Builds a polynomial from `(multi-index, coefficient)` pairs.
    ///
    /// Multi-indices are 0-based, may be unsorted, and repeated monomials are
    /// summed.
    pub fn from_terms(
        n: usize,
        m: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMetric("dimension must be positive".into()));
        }
        let mut map = BTreeMap::new();
        for (mut idx, c) in terms {
            if idx.len() != m {
                return Err(Error::InvalidMetric(format!(
                    "multi-index {idx:?} has {} entries, expected {m}",
                    idx.len()
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMetric(format!(
                    "variable index {} out of range 1..={n}",
                    bad + 1
                )));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite(format!("coefficient of {idx:?}")));
            }
            idx.sort_unstable();
            *map.entry(idx).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Self { n, m, terms: map })
    }

    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Root order, equal to the polynomial degree.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of a monomial given as 0-based variable positions in any
    /// order.
    pub fn coefficient(&self, idx: &[usize]) -> f64 {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, y: &Direction) -> Result<f64> {
        check_dim(self.n, y)?;
        Ok(self.eval_unchecked(y.as_slice()))
    }

    pub fn eval_unchecked(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(idx, c)| c * idx.iter().map(|&i| y[i]).product::<f64>())
            .sum()
    }

    /// Formal partial derivative with respect to `y^{var+1}`.
    pub fn partial(&self, var: usize) -> PolynomialMetric {
        if self.m == 0 {
            return PolynomialMetric::zero(self.n, 0);
        }
        let mut terms = BTreeMap::new();
        for (idx, &c) in &self.terms {
            let count = idx.iter().filter(|&&i| i == var).count();
            if count == 0 {
                continue;
            }
            let pos = idx.iter().position(|&i| i == var).unwrap();
            let mut reduced = idx.clone();
            reduced.remove(pos);
            *terms.entry(reduced).or_insert(0.0) += c * count as f64;
        }
        terms.retain(|_, c: &mut f64| *c != 0.0);
        PolynomialMetric {
            n: self.n,
            m: self.m - 1,
            terms,
        }
    }

    /// Symmetric tensor of `order`-th partial derivatives of `A` at `y`.
    pub fn derivative_tensor(&self, y: &Direction, order: usize) -> Result<Tensor> {
        if order > 4 {
            return Err(Error::UnsupportedOrder(order));
        }
        check_dim(self.n, y)?;
        if order == 0 {
            return Ok(Tensor::scalar(self.eval_unchecked(y.as_slice())));
        }
        let ys = y.as_slice();
        Ok(Tensor::symmetric_from_fn(self.n, order, |idx| {
            if idx.len() > self.m {
                return 0.0;
            }
            idx.iter()
                .fold(self.clone(), |p, &v| p.partial(v))
                .eval_unchecked(ys)
        }))
    }

    /// A and all of its derivative tensors up to order four.
    pub fn derivative_bundle(&self, y: &Direction) -> Result<DerivativeBundle> {
        check_dim(self.n, y)?;
        let ys = y.as_slice();
        let n = self.n;
        let d1: Vec<PolynomialMetric> = (0..n).map(|i| self.partial(i)).collect();
        let d2: Vec<Vec<PolynomialMetric>> =
            d1.iter().map(|p| (0..n).map(|j| p.partial(j)).collect()).collect();
        let a1 = Tensor::from_fn(n, 1, |ix| d1[ix[0]].eval_unchecked(ys));
        let a2 = Tensor::symmetric_from_fn(n, 2, |ix| d2[ix[0]][ix[1]].eval_unchecked(ys));
        let a3 = Tensor::symmetric_from_fn(n, 3, |ix| {
            d2[ix[0]][ix[1]].partial(ix[2]).eval_unchecked(ys)
        });
        let a4 = Tensor::symmetric_from_fn(n, 4, |ix| {
            d2[ix[0]][ix[1]]
                .partial(ix[2])
                .partial(ix[3])
                .eval_unchecked(ys)
        });
        Ok(DerivativeBundle {
            y: y.clone(),
            m: self.m,
            a0: self.eval_unchecked(ys),
            a1,
            a2,
            a3,
            a4,
        })
    }

    /// `S_α = Σ_i (y^i)^α`. Negative `α` divides by the components.
    pub fn power_sum(y: &Direction, alpha: i32) -> f64 {
        y.as_slice().iter().map(|v| v.powi(alpha)).sum()
    }

    /// `P_n = y^1 y^2 ... y^n`.
    pub fn component_product(y: &Direction) -> f64 {
        y.as_slice().iter().product()
    }

    pub fn to_definition(&self) -> MetricDefinition {
        MetricDefinition::Polynomial {
            n: self.n,
            m: self.m,
            terms: self
                .terms
                .iter()
                .map(|(idx, &c)| TermJson {
                    idx: idx.iter().map(|i| i + 1).collect(),
                    c,
                })
                .collect(),
        }
    }
}

/// Multiplies out the linear forms into the canonical polynomial.
pub fn expand(metric: &LinearFormsMetric) -> PolynomialMetric {
    let n = metric.n;
    let mut terms: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    terms.insert(Vec::new(), 1.0);
    for row in &metric.forms {
        let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (idx, &c) in &terms {
            for (var, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let mut key = idx.clone();
                let at = key.partition_point(|&i| i <= var);
                key.insert(at, var);
                *next.entry(key).or_insert(0.0) += c * a;
            }
        }
        terms = next;
    }
    terms.retain(|_, c| *c != 0.0);
    PolynomialMetric { n, m: n, terms }
}

/// Rows of the 1-forms of the three-dimensional Bogoslovsky-Goenner metric.
pub fn bg3_forms() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, -1.0, -1.0],
        vec![1.0, -1.0, 1.0],
        vec![1.0, 1.0, -1.0],
    ]
}

/// Rows of the 1-forms of the four-dimensional Bogoslovsky-Goenner metric.
pub fn bg4_forms() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, -1.0, -1.0, -1.0],
        vec![1.0, -1.0, 1.0, 1.0],
        vec![1.0, 1.0, -1.0, 1.0],
        vec![1.0, 1.0, 1.0, -1.0],
    ]
}

/// `A = 2S_3 - S_1 S_2 + 2P_3` written out monomial by monomial.
pub fn make_bg3() -> PolynomialMetric {
    let mut terms = Vec::new();
    for i in 0..3 {
        terms.push((vec![i, i, i], 1.0));
        for j in 0..3 {
            if i != j {
                terms.push((vec![i, j, j], -1.0));
            }
        }
    }
    terms.push((vec![0, 1, 2], 2.0));
    PolynomialMetric::from_terms(3, 3, terms).expect("static polynomial")
}

/// `A = 2S_4 - S_2^2 - 8P_4` written out monomial by monomial.
pub fn make_bg4() -> PolynomialMetric {
    let mut terms = Vec::new();
    for i in 0..4 {
        terms.push((vec![i, i, i, i], 1.0));
        for j in (i + 1)..4 {
            terms.push((vec![i, i, j, j], -2.0));
        }
    }
    terms.push((vec![0, 1, 2, 3], -8.0));
    PolynomialMetric::from_terms(4, 4, terms).expect("static polynomial")
}

/// `A` and its derivative tensors at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle {
    pub y: Direction,
    /// Homogeneity degree of `A`.
    pub m: usize,
    pub a0: f64,
    pub a1: Tensor,
    pub a2: Tensor,
    pub a3: Tensor,
    pub a4: Tensor,
}

impl DerivativeBundle {
    pub fn n(&self) -> usize {
        self.y.dim()
    }

    /// Derivative tensor of the given order; order 0 is a scalar tensor.
    pub fn tensor(&self, order: usize) -> Tensor {
        match order {
            0 => Tensor::scalar(self.a0),
            1 => self.a1.clone(),
            2 => self.a2.clone(),
            3 => self.a3.clone(),
            4 => self.a4.clone(),
            _ => Tensor::zeros(self.n(), order),
        }
    }

    /// Entry `∂^k A / ∂y^{i_1}...∂y^{i_k}` for `k = idx.len() <= 4`.
    pub fn entry(&self, idx: &[usize]) -> f64 {
        match idx.len() {
            0 => self.a0,
            1 => self.a1.get(idx),
            2 => self.a2.get(idx),
            3 => self.a3.get(idx),
            4 => self.a4.get(idx),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Regular,
    NearDegenerate,
    Degenerate,
    OutOfDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainStatus {
    pub a_value: f64,
    pub classification: Classification,
    pub detail: String,
}

impl DomainStatus {
    pub fn is_regular(&self) -> bool {
        self.classification == Classification::Regular
    }

    /// Whether geometry can be evaluated at all (regular or merely
    /// ill-conditioned).
    pub fn is_usable(&self) -> bool {
        matches!(
            self.classification,
            Classification::Regular | Classification::NearDegenerate
        )
    }
}

/// Width of the conditioning-warning band above the degeneracy epsilon.
pub const NEAR_DEGENERATE_FACTOR: f64 = 1e3;

/// Scale-aware degeneracy threshold `1e-12 (1 + max|y|)^m`.
pub fn default_epsilon(m: usize, y: &Direction) -> f64 {
    1e-12 * (1.0 + y.max_abs()).powi(m as i32)
}

/// Classifies `y` against the domain of `L = A^{1/m}`.
///
/// Even roots need `A > 0`; odd roots only need `A != 0`. `epsilon = None`
/// uses [`default_epsilon`].
pub fn domain_status(
    metric: &PolynomialMetric,
    y: &Direction,
    epsilon: Option<f64>,
) -> Result<DomainStatus> {
    let a = metric.eval(y)?;
    let eps = epsilon.unwrap_or_else(|| default_epsilon(metric.m, y));
    let even_root = metric.m % 2 == 0;
    let (classification, detail) = if a.abs() <= eps {
        (
            Classification::Degenerate,
            format!("|A| = {:e} is at or below epsilon {eps:e}", a.abs()),
        )
    } else if even_root && a < 0.0 {
        (
            Classification::OutOfDomain,
            format!("A = {a:e} <= 0 but an even root requires A > 0"),
        )
    } else if a.abs() <= NEAR_DEGENERATE_FACTOR * eps {
        (
            Classification::NearDegenerate,
            format!("|A| = {:e} is within {NEAR_DEGENERATE_FACTOR}x of epsilon {eps:e}", a.abs()),
        )
    } else {
        (Classification::Regular, String::new())
    };
    Ok(DomainStatus {
        a_value: a,
        classification,
        detail,
    })
}

fn check_dim(n: usize, y: &Direction) -> Result<()> {
    if y.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.dim(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    /// 1-based variable indices.
    pub idx: Vec<usize>,
    pub c: f64,
}

/// Interchange form of a metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricDefinition {
    LinearForms { n: usize, forms: Vec<Vec<f64>> },
    Polynomial { n: usize, m: usize, terms: Vec<TermJson> },
    Builtin { name: String },
}

impl MetricDefinition {
    /// Resolves a builtin tag (`bg3`, `bg4`).
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "bg3" | "bg4" => Ok(Self::Builtin { name: name.into() }),
            other => Err(Error::InvalidMetric(format!("unknown builtin metric '{other}'"))),
        }
    }

    /// Builds the polynomial form, expanding linear forms when needed.
    pub fn to_polynomial(&self) -> Result<PolynomialMetric> {
        match self {
            Self::LinearForms { n, forms } => {
                if forms.len() != *n {
                    return Err(Error::InvalidMetric(format!(
                        "declared n = {n} but {} forms given",
                        forms.len()
                    )));
                }
                Ok(expand(&make_product_metric(forms.clone())?))
            }
            Self::Polynomial { n, m, terms } => {
                let mut converted = Vec::with_capacity(terms.len());
                for t in terms {
                    if t.idx.contains(&0) {
                        return Err(Error::InvalidMetric(
                            "multi-indices are 1-based; found 0".into(),
                        ));
                    }
                    converted.push((t.idx.iter().map(|i| i - 1).collect(), t.c));
                }
                PolynomialMetric::from_terms(*n, *m, converted)
            }
            Self::Builtin { name } => match name.as_str() {
                "bg3" => Ok(make_bg3()),
                "bg4" => Ok(make_bg4()),
                other => Err(Error::InvalidMetric(format!("unknown builtin metric '{other}'"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(v: &[f64]) -> Direction {
        Direction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bg3_coefficients() {
        let a = make_bg3();
        assert_eq!(a.num_terms(), 10);
        assert_eq!(a.coefficient(&[0, 0, 0]), 1.0);
        assert_eq!(a.coefficient(&[0, 1, 1]), -1.0);
        assert_eq!(a.coefficient(&[0, 1, 2]), 2.0);
    }

    #[test]
    fn bg3_values() {
        let a = make_bg3();
        assert_eq!(a.eval(&dir(&[3.0, 1.0, 1.0])).unwrap(), 9.0);
        assert_eq!(a.eval(&dir(&[1.0, 2.0, 3.0])).unwrap(), 0.0);
        assert_eq!(a.eval(&dir(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn bg4_coefficients_and_values() {
        let a = make_bg4();
        assert_eq!(a.coefficient(&[0, 0, 0, 0]), 1.0);
        assert_eq!(a.coefficient(&[0, 0, 1, 1]), -2.0);
        assert_eq!(a.coefficient(&[0, 1, 2, 3]), -8.0);
        assert_eq!(a.num_terms(), 11);
        assert_eq!(a.eval(&dir(&[4.0, 1.0, 1.0, 1.0])).unwrap(), 125.0);
        assert_eq!(a.eval(&dir(&[1.0, 1.0, 1.0, 1.0])).unwrap(), -16.0);
    }

    #[test]
    fn expansion_of_builtin_forms() {
        let bg3 = expand(&make_product_metric(bg3_forms()).unwrap());
        assert_eq!(bg3, make_bg3());
        let bg4 = expand(&make_product_metric(bg4_forms()).unwrap());
        assert_eq!(bg4, make_bg4());
    }

    #[test]
    fn identity_forms_expand_to_single_term() {
        let id = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let p = expand(&make_product_metric(id).unwrap());
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coefficient(&[0, 1, 2]), 1.0);
    }

    #[test]
    fn rank_deficient_forms_rejected() {
        let forms = vec![
            vec![1.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert!(matches!(
            make_product_metric(forms),
            Err(Error::DegenerateForms { .. })
        ));
    }

    #[test]
    fn non_square_forms_rejected() {
        let forms = vec![vec![1.0, 0.0], vec![0.0, 1.0, 2.0]];
        assert!(matches!(make_product_metric(forms), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let a = make_bg3();
        assert!(matches!(
            a.eval(&dir(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(matches!(
            a.derivative_tensor(&dir(&[1.0, 2.0, 3.0]), 5),
            Err(Error::UnsupportedOrder(5))
        ));
    }

    #[test]
    fn non_finite_direction_rejected() {
        assert!(Direction::new(vec![1.0, f64::NAN]).is_err());
        assert!(Direction::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn bg3_gradient_at_311() {
        // factors (1)(3)(3): product rule gives 15 and -9, -9
        let g = make_bg3().derivative_tensor(&dir(&[3.0, 1.0, 1.0]), 1).unwrap();
        assert_eq!(g.data(), &[15.0, -9.0, -9.0]);
    }

    #[test]
    fn bg3_third_derivative_constants() {
        let a = make_bg3();
        let t = a.derivative_tensor(&dir(&[0.3, -2.0, 1.7]), 3).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    let expected = if j == k && k == m {
                        6.0
                    } else if j != k && k != m && m != j {
                        2.0
                    } else {
                        -2.0
                    };
                    assert_eq!(t.get(&[j, k, m]), expected);
                }
            }
        }
        assert_eq!(a.derivative_tensor(&dir(&[0.3, -2.0, 1.7]), 4).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn bg4_fourth_derivative_is_constant() {
        let a = make_bg4();
        let t1 = a.derivative_tensor(&dir(&[4.0, 1.0, 1.0, 1.0]), 4).unwrap();
        let t2 = a.derivative_tensor(&dir(&[-1.0, 0.5, 3.0, 2.0]), 4).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn bundle_on_coordinate_hyperplane_is_finite() {
        let b = make_bg3().derivative_bundle(&dir(&[2.0, 0.0, 0.0])).unwrap();
        assert!(b.a1.is_finite() && b.a2.is_finite() && b.a3.is_finite());
        assert_eq!(b.a0, 8.0);
    }

    #[test]
    fn domain_classification() {
        let bg3 = make_bg3();
        let bg4 = make_bg4();
        let c = |m: &PolynomialMetric, y: &[f64]| domain_status(m, &dir(y), None).unwrap().classification;
        assert_eq!(c(&bg3, &[1.0, 2.0, 3.0]), Classification::Degenerate);
        assert_eq!(c(&bg4, &[1.0, 1.0, 1.0, 1.0]), Classification::OutOfDomain);
        assert_eq!(c(&bg4, &[4.0, 1.0, 1.0, 1.0]), Classification::Regular);
        // odd root: negative A is fine
        assert_eq!(c(&bg3, &[-3.0, -1.0, -1.0]), Classification::Regular);
        let near = domain_status(&bg3, &dir(&[3.0, 1.0, 1.0]), Some(9.0 / 500.0)).unwrap();
        assert_eq!(near.classification, Classification::NearDegenerate);
    }

    #[test]
    fn definition_json_roundtrip() {
        let def = make_bg3().to_definition();
        let text = serde_json::to_string(&def).unwrap();
        assert!(text.starts_with(r#"{"kind":"polynomial","n":3,"m":3,"terms":[{"idx":[1,1,1],"c":1.0}"#));
        let back: MetricDefinition = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_polynomial().unwrap(), make_bg3());

        let lf: MetricDefinition =
            serde_json::from_str(r#"{"kind":"linear_forms","n":3,"forms":[[1,-1,-1],[1,-1,1],[1,1,-1]]}"#)
                .unwrap();
        assert_eq!(lf.to_polynomial().unwrap(), make_bg3());
    }

    #[test]
    fn polynomial_definition_rejects_zero_index() {
        let def: MetricDefinition =
            serde_json::from_str(r#"{"kind":"polynomial","n":2,"m":2,"terms":[{"idx":[0,1],"c":1.0}]}"#)
                .unwrap();
        assert!(def.to_polynomial().is_err());
    }
}
