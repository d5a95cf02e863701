//! Front-end logic shared by the `finsler` binary and the tests.
//!
//! Every command returns a [`CommandOutput`]: a JSON value, optional
//! human-readable text and an exit code. JSON is serialized with sorted
//! object keys and shortest round-trip floats, so identical input gives
//! identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::check::{run_check, CheckConfig};
use crate::curvature::{einstein_residual, CurvatureBundle, CurvaturePath};
use crate::error::Error;
use crate::metric::{domain_status, Direction, MetricDefinition, PolynomialMetric};
use crate::oracle::MetricTag;
use crate::power::{spectrum, GeometryConfig, GeometryPoint};
use crate::tensor::to_matrix;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Domain = 1,
    Invariant = 2,
    Input = 3,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub json: Value,
    /// Human-readable summary, written to stderr by the binary.
    pub text: Option<String>,
    pub status: ExitStatus,
}

/// A failure before any report could be produced.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Input,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DegenerateDomain { .. } | Error::ZeroBase(_) | Error::SingularMetric { .. } => ExitStatus::Domain,
            _ => ExitStatus::Input,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Names accepted in `EvalRequest::outputs`.
pub const OUTPUT_NAMES: [&str; 10] = ["L", "g", "g_inv", "C", "C_mixed", "S_mixed", "S_cov", "ricci", "scalar", "einstein"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRequest {
    pub metric: MetricDefinition,
    pub points: Vec<Vec<f64>>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

/// `bg3`, `bg4`, or a path to a metric-definition JSON file.
pub fn load_metric(source: &str) -> CliResult<MetricDefinition> {
    if let Ok(def) = MetricDefinition::builtin(source) {
        return Ok(def);
    }
    let text = std::fs::read_to_string(Path::new(source))
        .map_err(|e| CliError::input(format!("cannot read metric '{source}': {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed metric JSON in '{source}': {e}")))
}

/// Reads a JSON array of points.
pub fn load_points(path: &str) -> CliResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read points '{path}': {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed points JSON in '{path}': {e}")))
}

pub fn load_request(path: &str) -> CliResult<EvalRequest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read request '{path}': {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed request JSON in '{path}': {e}")))
}

/// Parses `"3,1,1"` into a direction.
pub fn parse_point(text: &str) -> CliResult<Direction> {
    let components = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::input(format!("bad component '{s}': {e}"))))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Direction::new(components)?)
}

/// Serializes with sorted keys; `pretty` adds indentation.
pub fn render(value: &Value, pretty: bool) -> String {
    let mut s = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("JSON values always serialize");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn cmd_expand(def: &MetricDefinition) -> CliResult<CommandOutput> {
    let poly = def.to_polynomial()?;
    Ok(CommandOutput {
        json: to_value(&poly.to_definition()),
        text: None,
        status: ExitStatus::Success,
    })
}

fn validate_request(req: &EvalRequest, metric: &PolynomialMetric) -> CliResult<Vec<Direction>> {
    if req.points.is_empty() {
        return Err(CliError::input("no points given"));
    }
    if req.outputs.is_empty() {
        return Err(CliError::input("no outputs requested"));
    }
    for o in &req.outputs {
        if !OUTPUT_NAMES.contains(&o.as_str()) {
            return Err(CliError::input(format!("unknown output '{o}' (expected one of {})", OUTPUT_NAMES.join(", "))));
        }
    }
    let wants_einstein = req.outputs.iter().any(|o| o == "einstein");
    match (wants_einstein, req.kappa) {
        (true, None) => return Err(CliError::input("kappa is required when einstein is requested")),
        (false, Some(_)) => return Err(CliError::input("kappa is only accepted together with the einstein output")),
        (true, Some(k)) if k == 0.0 => return Err(Error::ZeroKappa.into()),
        (true, Some(k)) if !k.is_finite() => return Err(CliError::input("kappa must be finite")),
        (true, Some(_)) if metric.n() <= 2 => return Err(Error::NotApplicableDimension(metric.n()).into()),
        _ => {}
    }
    req.points
        .iter()
        .map(|p| {
            let y = Direction::new(p.clone())?;
            if y.dim() != metric.n() {
                return Err(Error::DimensionMismatch { expected: metric.n(), got: y.dim() }.into());
            }
            Ok(y)
        })
        .collect()
}

fn eval_point(metric: &PolynomialMetric, y: &Direction, req: &EvalRequest, cfg: &GeometryConfig) -> CliResult<(Value, bool)> {
    let status = domain_status(metric, y, cfg.epsilon)?;
    let mut entry = Map::new();
    entry.insert("y".into(), to_value(y));
    entry.insert("status".into(), to_value(&status));
    if !status.is_usable() {
        return Ok((Value::Object(entry), false));
    }
    let point = match GeometryPoint::evaluate(metric, y, cfg) {
        Ok(p) => p,
        Err(e) => {
            entry.insert("error".into(), Value::String(e.to_string()));
            return Ok((Value::Object(entry), false));
        }
    };
    let needs_curvature = req
        .outputs
        .iter()
        .any(|o| matches!(o.as_str(), "S_mixed" | "S_cov" | "ricci" | "scalar" | "einstein"));
    let curvature = needs_curvature.then(|| CurvatureBundle::evaluate(&point, CurvaturePath::Product));
    let mut tensors = Map::new();
    for name in &req.outputs {
        let v = match name.as_str() {
            "L" => json!(point.l_value),
            "g" => to_value(&point.g),
            "g_inv" => to_value(&point.g_inv),
            "C" => to_value(&point.c_cov),
            "C_mixed" => to_value(&point.c_mixed),
            "S_mixed" => to_value(&curvature.as_ref().expect("computed").s_mixed),
            "S_cov" => to_value(&curvature.as_ref().expect("computed").s_cov),
            "ricci" => to_value(&curvature.as_ref().expect("computed").ricci),
            "scalar" => json!(curvature.as_ref().expect("computed").scalar),
            "einstein" => {
                let cb = curvature.as_ref().expect("computed");
                let kappa = req.kappa.expect("validated");
                to_value(&einstein_residual(&cb.ricci, cb.scalar, &point.g, &point.g_inv, kappa)?)
            }
            _ => unreachable!("validated output name"),
        };
        tensors.insert(name.clone(), v);
    }
    entry.insert("outputs".into(), Value::Object(tensors));
    Ok((Value::Object(entry), true))
}

pub fn cmd_eval(req: &EvalRequest) -> CliResult<CommandOutput> {
    let metric = req.metric.to_polynomial()?;
    let points = validate_request(req, &metric)?;
    let cfg = GeometryConfig::default();
    let results = points
        .par_iter()
        .map(|y| eval_point(&metric, y, req, &cfg))
        .collect::<CliResult<Vec<_>>>()?;
    let evaluated = results.iter().filter(|(_, ok)| *ok).count();
    let status = if evaluated == 0 { ExitStatus::Domain } else { ExitStatus::Success };
    let json = json!({
        "metric": to_value(&metric.to_definition()),
        "outputs": req.outputs,
        "kappa": req.kappa,
        "points": results.into_iter().map(|(v, _)| v).collect::<Vec<_>>(),
        "evaluated": evaluated,
        "total": points.len(),
    });
    Ok(CommandOutput { json, text: None, status })
}

pub fn cmd_check(config: &CheckConfig) -> CliResult<CommandOutput> {
    let report = run_check(config)?;
    let mut text = String::new();
    for p in &report.properties {
        let metric = p.metric.map(|m| m.name()).unwrap_or("-");
        let _ = writeln!(
            text,
            "{} {metric:>3} {:<32} worst {:.3e} tol {:.1e}",
            if p.pass { "PASS" } else { "FAIL" },
            p.name,
            p.worst,
            p.tolerance
        );
    }
    for e in &report.errata {
        let _ = writeln!(
            text,
            "ERRATUM {:<32} verdict {} (printed {:.3e}, derived {:.3e})",
            e.name, e.verdict, e.printed_error, e.derived_error
        );
    }
    let _ = writeln!(text, "overall: {}", if report.pass { "pass" } else { "fail" });
    Ok(CommandOutput {
        json: to_value(&report),
        text: Some(text),
        status: if report.pass { ExitStatus::Success } else { ExitStatus::Invariant },
    })
}

/// Parses a comma-separated list of builtin tags.
pub fn parse_tags(list: &str) -> CliResult<Vec<MetricTag>> {
    list.split(',')
        .map(|s| MetricTag::parse(s.trim()).ok_or_else(|| CliError::input(format!("check only knows bg3 and bg4, got '{s}'"))))
        .collect()
}

pub fn cmd_report(def: &MetricDefinition, y: &Direction, kappa: Option<f64>) -> CliResult<CommandOutput> {
    let metric = def.to_polynomial()?;
    if y.dim() != metric.n() {
        return Err(Error::DimensionMismatch { expected: metric.n(), got: y.dim() }.into());
    }
    let cfg = GeometryConfig::default();
    let point = GeometryPoint::evaluate(&metric, y, &cfg)?;
    let curvature = CurvatureBundle::evaluate(&point, CurvaturePath::Product);
    let det = to_matrix(&point.bundle.a2).determinant();
    let (cond_hessian, _) = spectrum(&point.bundle.a2);
    let mut eigen: Vec<f64> = SymmetricEigen::new(to_matrix(&point.g)).eigenvalues.iter().copied().collect();
    eigen.sort_by(f64::total_cmp);
    let residual = match kappa {
        Some(k) => Some(einstein_residual(&curvature.ricci, curvature.scalar, &point.g, &point.g_inv, k)?),
        None => None,
    };

    let json = json!({
        "metric": to_value(&metric.to_definition()),
        "y": to_value(y),
        "status": to_value(&point.status),
        "A": point.bundle.a0,
        "L": point.l_value,
        "A_ij": to_value(&point.bundle.a2),
        "det_A_ij": det,
        "condition_A_ij": cond_hessian,
        "g": to_value(&point.g),
        "g_inv": to_value(&point.g_inv),
        "inverse_method": to_value(&point.inverse_method),
        "condition_g": point.cond,
        "eigenvalues_g": eigen,
        "signature_g": to_value(&point.signature),
        "C": to_value(&point.c_cov),
        "C_mixed": to_value(&point.c_mixed),
        "torsion_gradient": to_value(&point.c_grad),
        "S_mixed": to_value(&curvature.s_mixed),
        "S_cov": to_value(&curvature.s_cov),
        "ricci": to_value(&curvature.ricci),
        "scalar": curvature.scalar,
        "einstein": to_value(&curvature.einstein),
        "einstein_residual": to_value(&residual),
    });

    let mut text = String::new();
    let _ = writeln!(text, "direction      {:?}", y.as_slice());
    let _ = writeln!(text, "status         {:?}", point.status.classification);
    let _ = writeln!(text, "A              {}", point.bundle.a0);
    let _ = writeln!(text, "L              {}", point.l_value);
    let _ = writeln!(text, "det(A_ij)      {det}");
    let _ = writeln!(text, "cond(A_ij)     {cond_hessian:.6e}");
    let _ = writeln!(text, "cond(g)        {:.6e}", point.cond);
    let _ = writeln!(
        text,
        "signature(g)   (+{}, -{}, 0:{})",
        point.signature.positive, point.signature.negative, point.signature.zero
    );
    let _ = writeln!(text, "inverse        {:?}", point.inverse_method);
    let _ = writeln!(text, "scalar S       {}", curvature.scalar);
    Ok(CommandOutput {
        json,
        text: Some(text),
        status: ExitStatus::Success,
    })
}
