//! Vertical curvature of a locally Minkowski space.
//!
//! Index layout: `s_mixed[l][i][j][k] = S^l_ijk` and
//! `s_cov[i][m][j][k] = S_imjk = g_ml S^l_ijk`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{Direction, PolynomialMetric};
use crate::power::GeometryPoint;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvaturePath {
    /// `S_imjk = g^{uv}(C_ujm C_vik − C_ukm C_vij)`, raised with `g^{-1}`.
    Product,
    /// `S^l_ijk` from vertical derivatives of `C^l_ij`.
    Definitional,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureBundle {
    pub y: Direction,
    pub path: CurvaturePath,
    pub s_mixed: Tensor,
    pub s_cov: Tensor,
    pub ricci: Tensor,
    pub scalar: f64,
    /// `S_ij − (S/2) g_ij`; absent for `n <= 2`.
    pub einstein: Option<Tensor>,
}

impl CurvatureBundle {
    pub fn evaluate(point: &GeometryPoint, path: CurvaturePath) -> Self {
        let (s_mixed, s_cov) = match path {
            CurvaturePath::Product => {
                let s_cov = vertical_curvature_cov(point);
                (raise_second(&point.g_inv, &s_cov), s_cov)
            }
            CurvaturePath::Definitional => {
                let s_mixed = vertical_curvature_mixed(point);
                (s_mixed.clone(), lower_curvature(&point.g, &s_mixed))
            }
        };
        let ricci = ricci(&s_mixed);
        let scalar = scalar_curvature(&ricci, &point.g_inv);
        let einstein = (point.n() > 2).then(|| einstein_tensor(&ricci, scalar, &point.g));
        Self {
            y: point.y.clone(),
            path,
            s_mixed,
            s_cov,
            ricci,
            scalar,
            einstein,
        }
    }
}

/// `S^l_ijk = ∂_k C^l_ij − ∂_j C^l_ik + C^u_ij C^l_uk − C^u_ik C^l_uj`.
///
/// `∂_k C^l_ij = (∂_k g^{lm}) C_ijm + g^{lm} ∂_k C_ijm` with
/// `∂_k g^{lm} = −2 g^{lu} g^{mv} C_uvk`.
pub fn vertical_curvature_mixed(point: &GeometryPoint) -> Tensor {
    let n = point.n();
    let gi = &point.g_inv;
    let c = &point.c_cov;
    let cm = &point.c_mixed;
    let dc = &point.c_grad;

    // ∂_k g^{lm}, stored [l][m][k]
    let dginv = Tensor::from_fn(n, 3, |ix| {
        let (l, m, k) = (ix[0], ix[1], ix[2]);
        let mut acc = 0.0;
        for u in 0..n {
            for v in 0..n {
                acc += gi.get(&[l, u]) * gi.get(&[m, v]) * c.get(&[u, v, k]);
            }
        }
        -2.0 * acc
    });
    // ∂_k C^l_ij, stored [l][i][j][k]
    let dcm = Tensor::from_fn(n, 4, |ix| {
        let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        (0..n)
            .map(|m| dginv.get(&[l, m, k]) * c.get(&[i, j, m]) + gi.get(&[l, m]) * dc.get(&[i, j, m, k]))
            .sum()
    });
    Tensor::from_fn(n, 4, |ix| {
        let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let quad: f64 = (0..n)
            .map(|u| cm.get(&[u, i, j]) * cm.get(&[l, u, k]) - cm.get(&[u, i, k]) * cm.get(&[l, u, j]))
            .sum();
        dcm.get(&[l, i, j, k]) - dcm.get(&[l, i, k, j]) + quad
    })
}

/// `S_imjk = g^{uv}(C_ujm C_vik − C_ukm C_vij)`.
pub fn vertical_curvature_cov(point: &GeometryPoint) -> Tensor {
    let n = point.n();
    let c = &point.c_cov;
    let cm = &point.c_mixed;
    // g^{uv} C_ujm C_vik = C^v_jm C_vik
    Tensor::from_fn(n, 4, |ix| {
        let (i, m, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        (0..n)
            .map(|v| cm.get(&[v, j, m]) * c.get(&[v, i, k]) - cm.get(&[v, k, m]) * c.get(&[v, i, j]))
            .sum()
    })
}

/// `S_imjk = g_ml S^l_ijk`.
pub fn lower_curvature(g: &Tensor, s_mixed: &Tensor) -> Tensor {
    let n = s_mixed.n();
    Tensor::from_fn(n, 4, |ix| {
        let (i, m, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        (0..n).map(|l| g.get(&[m, l]) * s_mixed.get(&[l, i, j, k])).sum()
    })
}

/// `S^l_ijk = g^{lm} S_imjk`.
pub fn raise_second(g_inv: &Tensor, s_cov: &Tensor) -> Tensor {
    let n = s_cov.n();
    Tensor::from_fn(n, 4, |ix| {
        let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        (0..n).map(|m| g_inv.get(&[l, m]) * s_cov.get(&[i, m, j, k])).sum()
    })
}

/// `S_ij = S^m_ijm`.
pub fn ricci(s_mixed: &Tensor) -> Tensor {
    let n = s_mixed.n();
    Tensor::from_fn(n, 2, |ix| (0..n).map(|m| s_mixed.get(&[m, ix[0], ix[1], m])).sum())
}

/// `S = g^{uv} S_uv`.
pub fn scalar_curvature(ricci: &Tensor, g_inv: &Tensor) -> f64 {
    ricci.data().iter().zip(g_inv.data()).map(|(a, b)| a * b).sum()
}

pub fn einstein_tensor(ricci: &Tensor, scalar: f64, g: &Tensor) -> Tensor {
    ricci.sub(&g.scaled(0.5 * scalar))
}

/// `S_ij − (S/2) g_ij = κ T̃_ij`.
#[derive(Debug, Clone, Serialize)]
pub struct EinsteinResidual {
    pub einstein: Tensor,
    pub kappa: f64,
    pub stress_energy: Tensor,
    /// `g^{ij} E_ij − S(1 − n/2)`, zero up to rounding.
    pub trace_defect: f64,
}

pub fn einstein_residual(
    ricci: &Tensor,
    scalar: f64,
    g: &Tensor,
    g_inv: &Tensor,
    kappa: f64,
) -> Result<EinsteinResidual> {
    let n = g.n();
    if n <= 2 {
        return Err(Error::NotApplicableDimension(n));
    }
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::ZeroKappa);
    }
    let einstein = einstein_tensor(ricci, scalar, g);
    let trace: f64 = einstein.data().iter().zip(g_inv.data()).map(|(a, b)| a * b).sum();
    let trace_defect = trace - scalar * (1.0 - n as f64 / 2.0);
    let stress_energy = einstein.map(|v| v / kappa);
    Ok(EinsteinResidual {
        einstein,
        kappa,
        stress_energy,
        trace_defect,
    })
}

/// Spray `G^i` and nonlinear connection `N^i_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionBundle {
    pub spray: Tensor,
    pub connection: Tensor,
}

/// The canonical nonlinear connection of a metric that depends on `y` only.
///
/// Every term of the general formula carries an `x`- or `t`-derivative of
/// `L²`, so both the spray and the connection vanish identically.
pub fn nonlinear_connection(metric: &PolynomialMetric, y: &Direction) -> Result<ConnectionBundle> {
    if y.dim() != metric.n() {
        return Err(Error::DimensionMismatch {
            expected: metric.n(),
            got: y.dim(),
        });
    }
    let n = metric.n();
    Ok(ConnectionBundle {
        spray: Tensor::zeros(n, 1),
        connection: Tensor::zeros(n, 2),
    })
}
