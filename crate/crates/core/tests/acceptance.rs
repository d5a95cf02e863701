//! Acceptance suite: ten criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach the output of
//! `cargo test`; the process exits nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use finsler_core::check::Sampler;
use finsler_core::curvature::{
    einstein_residual, lower_curvature, vertical_curvature_cov, vertical_curvature_mixed, CurvatureBundle,
    CurvaturePath,
};
use finsler_core::metric::{bg3_forms, bg4_forms, expand, make_bg3, make_bg4, make_product_metric, Direction, PolynomialMetric};
use finsler_core::oracle::{
    attribute_classes, compare, dual_tensor, fd_power_tensor, golden_fixtures, MetricTag, OracleConfig, OracleMethod,
};
use finsler_core::power::{
    inverse_direct, inverse_rank_one, metric_exponent, partition_class_tensor, power_derivative_weighted,
    rank_one_with_coefficient, GeometryConfig, GeometryPoint,
};
use finsler_core::Tensor;

const SEED: u64 = 20_240_601;
const EXPANSION_POINTS: usize = 1000;
const POINTS_PER_METRIC: usize = 200;
/// Sampled directions satisfy `|A| / (‖∇A‖ ‖y‖) >= MIN_NULL_DISTANCE`.
const MIN_NULL_DISTANCE: f64 = 0.05;

const TOL_EXPANSION: f64 = 1e-12;
const TOL_GOLDEN: f64 = 1e-10;
const TOL_FD: [f64; 3] = [1e-7, 1e-5, 1e-4];
const TOL_DUAL: f64 = 1e-10;
const TOL_INVERSE_IDENTITY: f64 = 1e-9;
const TOL_INVERSE_PATHS: f64 = 1e-10;
const TOL_CROSS_PATH: f64 = 1e-8;
const TOL_SYMMETRY: f64 = 1e-10;
const TOL_HOMOGENEITY: f64 = 1e-10;
const TOL_TRACE: f64 = 1e-9;
const TOL_ROUND_TRIP_CLI: f64 = 1e-15;

struct Outcome {
    pass: bool,
    evidence: String,
}

impl Outcome {
    fn new(pass: bool, evidence: impl Into<String>) -> Self {
        Self {
            pass,
            evidence: evidence.into(),
        }
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ stream)
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Direction {
    Direction::new((0..n).map(|_| rng.random_range(-5.0..=5.0)).collect()).unwrap()
}

fn geometry(metric: &PolynomialMetric, stream: u64) -> Vec<GeometryPoint> {
    let cfg = GeometryConfig::default();
    Sampler::new(SEED ^ stream)
        .regular(metric, POINTS_PER_METRIC, MIN_NULL_DISTANCE, &cfg)
        .iter()
        .map(|y| GeometryPoint::evaluate(metric, y, &cfg).unwrap())
        .collect()
}

/// Largest entry difference over the largest entry of `b`.
fn normwise(a: &Tensor, b: &Tensor) -> f64 {
    a.sub(b).max_abs() / b.max_abs()
}

fn tensor_of(m: &DMatrix<f64>) -> Tensor {
    Tensor::from_fn(m.nrows(), 2, |ix| m[(ix[0], ix[1])])
}

fn matrix_of(t: &Tensor) -> DMatrix<f64> {
    DMatrix::from_fn(t.n(), t.n(), |i, j| t.get(&[i, j]))
}

/// Cofactor matrix from explicit minors.
fn cofactors(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let minor = m.clone().remove_row(i).remove_column(j);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

// 1 and 2

fn reference_bg3() -> PolynomialMetric {
    // 2 S_3 - S_1 S_2 + 2 P_3
    let mut terms = Vec::new();
    for i in 0..3 {
        terms.push((vec![i, i, i], 2.0));
        for j in 0..3 {
            terms.push((vec![i, j, j], -1.0));
        }
    }
    terms.push((vec![0, 1, 2], 2.0));
    PolynomialMetric::from_terms(3, 3, terms).unwrap()
}

fn reference_bg4() -> PolynomialMetric {
    // 2 S_4 - S_2^2 - 8 P_4
    let mut terms = Vec::new();
    for i in 0..4 {
        terms.push((vec![i; 4], 2.0));
        for j in 0..4 {
            terms.push((vec![i, i, j, j], -1.0));
        }
    }
    terms.push((vec![0, 1, 2, 3], -8.0));
    PolynomialMetric::from_terms(4, 4, terms).unwrap()
}

fn expansion(forms: Vec<Vec<f64>>, builtin: PolynomialMetric, reference: PolynomialMetric, stream: u64) -> Outcome {
    let n = forms.len();
    let factored = make_product_metric(forms).unwrap();
    let expanded = expand(&factored);
    let same_coefficients = expanded == reference && builtin == reference;
    let mut rng = rng(stream);
    let mut worst = 0.0_f64;
    let mut pointwise = 0.0_f64;
    for _ in 0..EXPANSION_POINTS {
        let y = random_direction(&mut rng, n);
        let direct = factored.product(&y).unwrap();
        let poly = expanded.eval(&y).unwrap();
        // rounding in the expanded sum scales with its terms, not with the cancelled total
        let terms: f64 = expanded
            .terms()
            .map(|(idx, c)| (c * idx.iter().map(|&i| y[i]).product::<f64>()).abs())
            .sum();
        worst = worst.max((poly - direct).abs() / terms.max(direct.abs()));
        pointwise = pointwise.max((poly - direct).abs() / direct.abs());
    }
    Outcome::new(
        same_coefficients && worst <= TOL_EXPANSION,
        format!(
            "{} terms, coefficients equal reference: {same_coefficients}; max error {worst:.2e} relative to term scale over {EXPANSION_POINTS} points (tol {TOL_EXPANSION:.0e}); pointwise relative {pointwise:.2e}",
            expanded.num_terms()
        ),
    )
}

// 3

fn golden() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // hand-checkable values
    let y311 = Direction::new(vec![3.0, 1.0, 1.0]).unwrap();
    let h = make_bg3().derivative_tensor(&y311, 2).unwrap();
    let printed = [[14.0, -6.0, -6.0], [-6.0, -2.0, 2.0], [-6.0, 2.0, -2.0]];
    let exact = (0..3).all(|i| (0..3).all(|j| h.get(&[i, j]) == printed[i][j]));
    let det311 = matrix_of(&h).determinant();
    let gold4 = golden_fixtures(MetricTag::Bg4, &Direction::new(vec![4.0, 1.0, 1.0, 1.0]).unwrap()).unwrap();
    let a_entry = gold4.scalar("a");
    pass &= exact && (det311 - 288.0).abs() <= 1e-12 * 288.0 && a_entry == -40.0;
    notes.push(format!("bg3 A_ij(3,1,1) exact: {exact}, det {det311}; bg4 a(4,1,1,1) = {a_entry}"));

    for (tag, metric, stream) in [(MetricTag::Bg3, make_bg3(), 31), (MetricTag::Bg4, make_bg4(), 32)] {
        let mut rng = rng(stream);
        let (mut a_m, mut a_ij, mut det, mut adj) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        let mut used = 0;
        while used < POINTS_PER_METRIC {
            let y = random_direction(&mut rng, tag.dim());
            // printed A* and the structured entries divide by nothing, but
            // the printed closed forms are defined off the hyperplanes
            if y.as_slice().iter().any(|v| v.abs() < 0.1) || metric.eval(&y).unwrap().abs() < 1e-3 {
                continue;
            }
            used += 1;
            let b = metric.derivative_bundle(&y).unwrap();
            let gold = golden_fixtures(tag, &y).unwrap();
            a_m = a_m.max(normwise(&b.a3, gold.get("A_m")));
            a_ij = a_ij.max(normwise(&b.a2, gold.get("A_ij")));
            let hess = matrix_of(&b.a2);
            let d = hess.determinant();
            let expected_det = match tag {
                MetricTag::Bg3 => 32.0 * b.a0,
                MetricTag::Bg4 => gold.scalar("det_A_ij"),
            };
            det = det.max((d - expected_det).abs() / expected_det.abs());
            // bg3 prints A* = -cof/8 (A^{jk} = A*/D, D = -4A); bg4 prints the cofactors
            let cof = tensor_of(&cofactors(&hess));
            let expected_star = match tag {
                MetricTag::Bg3 => cof.scaled(-1.0 / 8.0),
                MetricTag::Bg4 => cof,
            };
            adj = adj.max(normwise(gold.get("A_star"), &expected_star));
        }
        let ok = a_m <= TOL_GOLDEN && a_ij <= TOL_GOLDEN && det <= TOL_GOLDEN && adj <= TOL_GOLDEN;
        pass &= ok;
        notes.push(format!(
            "{}: A_(m) {a_m:.1e}, A_ij {a_ij:.1e}, det {det:.1e}, A* vs cofactors {adj:.1e}",
            tag.name()
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

// 4

fn oracle_certification() -> Outcome {
    let oc = OracleConfig::default();
    let mut pass = true;
    let mut notes = Vec::new();
    for (metric, stream) in [(make_bg3(), 41), (make_bg4(), 42)] {
        let m = metric.m() as i64;
        let points = geometry(&metric, stream);
        let mut worst = [[0.0_f64; 3]; 3];
        for pt in &points {
            for (k, (analytic, factor, order)) in [(&pt.g, 0.5, 2), (&pt.c_cov, 0.25, 3), (&pt.c_grad, 0.25, 4)].into_iter().enumerate() {
                let fd = fd_power_tensor(&metric, 2, m, &pt.y, order, &oc).unwrap().tensor.scaled(factor);
                let dual = dual_tensor(&metric, 2, m, &pt.y, order).unwrap().scaled(factor);
                let r = [
                    compare(analytic, &fd, TOL_FD[k], oc.zero_floor, OracleMethod::FiniteDifference).unwrap(),
                    compare(analytic, &dual, TOL_DUAL, oc.zero_floor, OracleMethod::DualNumber).unwrap(),
                    compare(&dual, &fd, TOL_FD[k], oc.zero_floor, OracleMethod::FiniteDifference).unwrap(),
                ];
                for (w, r) in worst[k].iter_mut().zip(&r) {
                    pass &= r.pass;
                    *w = w.max(r.max_rel_error);
                }
            }
        }
        notes.push(format!(
            "m={} over {} points: g fd/dual/cross {:.1e}/{:.1e}/{:.1e}, C {:.1e}/{:.1e}/{:.1e}, dC {:.1e}/{:.1e}/{:.1e}",
            m,
            points.len(),
            worst[0][0],
            worst[0][1],
            worst[0][2],
            worst[1][0],
            worst[1][1],
            worst[1][2],
            worst[2][0],
            worst[2][1],
            worst[2][2]
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

// 5

fn inverse() -> Outcome {
    let cfg = GeometryConfig::default();
    let oc = OracleConfig::default();
    let mut pass = true;
    let mut notes = Vec::new();
    for (metric, stream) in [(make_bg3(), 51), (make_bg4(), 52)] {
        let points = geometry(&metric, stream);
        let (mut identity, mut paths, mut printed_min) = (0.0_f64, 0.0_f64, f64::INFINITY);
        for pt in &points {
            let n = pt.n();
            let id = DMatrix::<f64>::identity(n, n);
            let g = matrix_of(&pt.g);
            identity = identity.max((&g * matrix_of(&pt.g_inv) - &id).abs().max());
            let r = compare(
                &inverse_rank_one(&pt.bundle, &cfg).unwrap(),
                &inverse_direct(&pt.g, &cfg).unwrap(),
                TOL_INVERSE_PATHS,
                oc.zero_floor,
                OracleMethod::DualNumber,
            )
            .unwrap();
            paths = paths.max(r.max_rel_error);
            if metric.m() == 4 {
                // printed factor A^{-1/2}/(2 - A^{-1}s) where the derivation gives 4A^{-1/2}/(...)
                let a = pt.bundle.a0;
                let printed = rank_one_with_coefficient(&pt.bundle, &cfg, |_, _, s| -1.0 / a.sqrt() / (2.0 - s / a)).unwrap();
                printed_min = printed_min.min((&g * matrix_of(&printed) - &id).abs().max());
            }
        }
        let mut ok = identity <= TOL_INVERSE_IDENTITY && paths <= TOL_INVERSE_PATHS;
        let mut note = format!("m={}: max|g g⁻¹ − δ| {identity:.1e}, rank-one vs direct {paths:.1e}", metric.m());
        if metric.m() == 4 {
            ok &= printed_min > TOL_INVERSE_IDENTITY;
            note.push_str(&format!(", printed factor smallest identity defect {printed_min:.2e} (must exceed {TOL_INVERSE_IDENTITY:.0e})"));
        }
        pass &= ok;
        notes.push(note);
    }
    Outcome::new(pass, notes.join("; "))
}

// 6

fn torsion_erratum() -> Outcome {
    let metric = make_bg3();
    let oc = OracleConfig::default();
    let p = metric_exponent(3);
    let derived_w = [0.0, 2.0 / 3.0, -2.0 / 9.0, 8.0 / 27.0];
    let printed_w = [0.0, 2.0 / 3.0, -2.0 / 9.0, -4.0 / 18.0];
    let points = geometry(&metric, 61);
    let mut derived_ok = true;
    let mut printed_failures = 0;
    let mut localized = 0;
    let (mut derived_worst, mut printed_best) = (0.0_f64, f64::INFINITY);
    for pt in &points {
        let fd = fd_power_tensor(&metric, 2, 3, &pt.y, 3, &oc).unwrap().tensor.scaled(0.25);
        let dual = dual_tensor(&metric, 2, 3, &pt.y, 3).unwrap().scaled(0.25);
        let derived = power_derivative_weighted(&pt.bundle, p, 3, &derived_w).unwrap().scaled(0.25);
        let printed = power_derivative_weighted(&pt.bundle, p, 3, &printed_w).unwrap().scaled(0.25);
        let d_fd = compare(&derived, &fd, TOL_FD[1], oc.zero_floor, OracleMethod::FiniteDifference).unwrap();
        let d_dual = compare(&derived, &dual, TOL_DUAL, oc.zero_floor, OracleMethod::DualNumber).unwrap();
        let d_lib = normwise(&pt.c_cov, &derived);
        derived_ok &= d_fd.pass && d_dual.pass && d_lib <= TOL_DUAL;
        derived_worst = derived_worst.max(d_dual.max_rel_error);
        let p_fd = compare(&printed, &fd, TOL_FD[1], oc.zero_floor, OracleMethod::FiniteDifference).unwrap();
        let p_dual = compare(&printed, &dual, TOL_DUAL, oc.zero_floor, OracleMethod::DualNumber).unwrap();
        if !p_fd.pass && !p_dual.pass {
            printed_failures += 1;
        }
        printed_best = printed_best.min(p_dual.max_rel_error);
        let classes: Vec<Tensor> = (1..=3).map(|s| partition_class_tensor(&pt.bundle, p, 3, s).unwrap()).collect();
        let attribution = attribute_classes(&printed.sub(&dual), &classes);
        if attribution.dominant == 2 && attribution.shares[2] > 0.999 {
            localized += 1;
        }
    }
    let n = points.len();
    Outcome::new(
        derived_ok && printed_failures == n && localized == n,
        format!(
            "+2/27 passes three-way at all {n} points (worst dual {derived_worst:.1e}); -1/18 fails both oracles at {printed_failures}/{n} points (smallest dual error {printed_best:.2e}); error localized to A_jA_kA_m at {localized}/{n}"
        ),
    )
}

// 7

fn curvature_cross_path() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (metric, stream) in [(make_bg3(), 71), (make_bg4(), 72)] {
        let points = geometry(&metric, stream);
        let (mut cross, mut anti, mut pair, mut ricci_sym, mut ycon) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for pt in &points {
            let cov = vertical_curvature_cov(pt);
            let mixed = vertical_curvature_mixed(pt);
            cross = cross.max(normwise(&lower_curvature(&pt.g, &mixed), &cov));
            let scale = cov.max_abs();
            anti = anti.max(cov.antisymmetry_defect(&[0, 1, 3, 2]) / scale).max(cov.antisymmetry_defect(&[1, 0, 2, 3]) / scale);
            pair = pair.max(cov.permutation_defect(&[2, 3, 0, 1]) / scale);
            let cb = CurvatureBundle::evaluate(pt, CurvaturePath::Definitional);
            ricci_sym = ricci_sym.max(cb.ricci.permutation_defect(&[1, 0]) / cb.ricci.max_abs());
            let ys = pt.y.as_slice();
            for slot in 0..4 {
                ycon = ycon.max(cov.contract_vector(slot, ys).max_abs() / (scale * pt.y.norm()));
            }
        }
        let ok = cross <= TOL_CROSS_PATH && anti <= TOL_SYMMETRY && pair <= TOL_SYMMETRY && ricci_sym <= TOL_SYMMETRY && ycon <= TOL_SYMMETRY;
        pass &= ok;
        notes.push(format!(
            "m={} over {} points: cross-path {cross:.1e}, antisymmetry {anti:.1e}, pair exchange {pair:.1e}, ricci symmetry {ricci_sym:.1e}, y-contraction {ycon:.1e}",
            metric.m(),
            points.len()
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

// 8

fn homogeneity() -> Outcome {
    let cfg = GeometryConfig::default();
    let mut worst = 0.0_f64;
    let mut count = 0;
    for (metric, stream) in [(make_bg3(), 81), (make_bg4(), 82)] {
        for pt in geometry(&metric, stream) {
            let base = CurvatureBundle::evaluate(&pt, CurvaturePath::Product);
            for lambda in [0.5, 2.0] {
                let q = GeometryPoint::evaluate(&metric, &pt.y.scaled(lambda), &cfg).unwrap();
                let cb = CurvatureBundle::evaluate(&q, CurvaturePath::Product);
                let l2 = lambda.powi(-2);
                let errs = [
                    (q.l_value - lambda * pt.l_value).abs() / (lambda * pt.l_value).abs(),
                    normwise(&q.g, &pt.g),
                    normwise(&q.c_cov, &pt.c_cov.scaled(1.0 / lambda)),
                    normwise(&q.c_grad, &pt.c_grad.scaled(l2)),
                    normwise(&cb.s_cov, &base.s_cov.scaled(l2)),
                    normwise(&cb.ricci, &base.ricci.scaled(l2)),
                    (cb.scalar - base.scalar * l2).abs() / (base.scalar * l2).abs(),
                ];
                worst = errs.into_iter().fold(worst, f64::max);
                count += 1;
            }
        }
    }
    Outcome::new(worst <= TOL_HOMOGENEITY, format!("{count} scaled evaluations, worst rel error {worst:.1e} (tol {TOL_HOMOGENEITY:.0e})"))
}

// 9

fn einstein() -> Outcome {
    let mut trace = 0.0_f64;
    let mut exact_round_trip = true;
    let mut ulp_round_trip = 0.0_f64;
    for (metric, stream) in [(make_bg3(), 91), (make_bg4(), 92)] {
        for pt in geometry(&metric, stream) {
            let cb = CurvatureBundle::evaluate(&pt, CurvaturePath::Product);
            let e = einstein_residual(&cb.ricci, cb.scalar, &pt.g, &pt.g_inv, 8.0 * std::f64::consts::PI).unwrap();
            trace = trace.max(e.trace_defect.abs() / cb.scalar.abs());
            ulp_round_trip = ulp_round_trip.max(e.stress_energy.scaled(e.kappa).sub(&e.einstein).max_abs() / e.einstein.max_abs());
            let unit = einstein_residual(&cb.ricci, cb.scalar, &pt.g, &pt.g_inv, 1.0).unwrap();
            let two = einstein_residual(&cb.ricci, cb.scalar, &pt.g, &pt.g_inv, 2.0).unwrap();
            exact_round_trip &= unit.stress_energy == unit.einstein && two.stress_energy.scaled(2.0) == two.einstein;
        }
    }
    let flat2 = expand(&make_product_metric(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
    let pt = GeometryPoint::evaluate(&flat2, &Direction::new(vec![1.5, 0.5]).unwrap(), &GeometryConfig::default()).unwrap();
    let cb = CurvatureBundle::evaluate(&pt, CurvaturePath::Product);
    let refused = einstein_residual(&cb.ricci, cb.scalar, &pt.g, &pt.g_inv, 1.0).is_err() && cb.einstein.is_none();
    let pass = trace <= TOL_TRACE && exact_round_trip && ulp_round_trip <= 4.0 * f64::EPSILON && refused;
    Outcome::new(
        pass,
        format!(
            "trace identity worst {trace:.1e}·|S|; kappa 1 and 2 round-trip bit-exact: {exact_round_trip}; kappa 8π within {ulp_round_trip:.1e}; n=2 refused: {refused}"
        ),
    )
}

// 10

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_finsler")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn cli() -> Outcome {
    let dir = std::env::temp_dir().join(format!("finsler-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let mut notes = Vec::new();
    let mut pass = true;

    let (c1, e1) = run_cli(&["expand", "--metric", "bg3"]);
    let (c2, e2) = run_cli(&["expand", "--metric", "bg3"]);
    std::fs::write(path("bg3.json"), &e1).unwrap();
    let expand_ok = c1 == 0 && c2 == 0 && e1 == e2;
    std::fs::write(path("points.json"), "[[3,1,1],[0.7,-1.3,2.1],[1,2,3]]").unwrap();
    let outputs = "L,g,g_inv,C,C_mixed,S_mixed,S_cov,ricci,scalar,einstein";
    let eval = |metric: &str| run_cli(&["eval", "--metric", metric, "--points", &path("points.json"), "--outputs", outputs, "--kappa", "2"]);
    let (c3, builtin) = eval("bg3");
    let (c4, from_file) = eval(&path("bg3.json"));
    let (_, builtin_again) = eval("bg3");
    let max_diff = numeric_difference(&serde_json::from_slice(&builtin).unwrap(), &serde_json::from_slice(&from_file).unwrap());
    let round_trip_ok = c3 == 0 && c4 == 0 && builtin == builtin_again && max_diff <= TOL_ROUND_TRIP_CLI;
    pass &= expand_ok && round_trip_ok;
    notes.push(format!("expand bytes stable: {expand_ok}; eval builtin vs expanded file max rel diff {max_diff:.1e}, rerun identical: {}", builtin == builtin_again));

    std::fs::write(path("degenerate.json"), "[[1,2,3]]").unwrap();
    std::fs::write(path("outside.json"), "[[1,1,1,1]]").unwrap();
    std::fs::write(path("malformed.json"), "[[1,2,").unwrap();
    std::fs::write(path("bad_metric.json"), r#"{"kind":"linear_forms","n":3,"forms":[[1,0,0],[2,0,0],[0,0,1]]}"#).unwrap();
    let (degenerate, outside, malformed, bad_metric) =
        (path("degenerate.json"), path("outside.json"), path("malformed.json"), path("bad_metric.json"));
    let cases: [(&str, Vec<&str>, i32); 7] = [
        ("degenerate", vec!["eval", "--metric", "bg3", "--points", &degenerate], 1),
        ("out-of-domain", vec!["eval", "--metric", "bg4", "--points", &outside], 1),
        ("degenerate report", vec!["report", "--metric", "bg3", "--point", "1,2,3"], 1),
        ("malformed points", vec!["eval", "--metric", "bg3", "--points", &malformed], 3),
        ("degenerate forms", vec!["expand", "--metric", &bad_metric], 3),
        ("non-finite point", vec!["report", "--metric", "bg3", "--point", "1,inf,2"], 3),
        ("zero count", vec!["check", "--count", "0"], 3),
    ];
    let mut codes = Vec::new();
    for (name, args, expected) in &cases {
        let (code, _) = run_cli(args);
        pass &= code == *expected;
        codes.push(format!("{name} {code}/{expected}"));
    }
    notes.push(format!("exit codes (got/expected): {}", codes.join(", ")));
    let _ = std::fs::remove_dir_all(&dir);
    Outcome::new(pass, notes.join("; "))
}

/// Largest relative difference between numbers at matching JSON positions;
/// infinite when the structures differ.
fn numeric_difference(a: &serde_json::Value, b: &serde_json::Value) -> f64 {
    use serde_json::Value;
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if x == y {
                0.0
            } else {
                (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            x.iter().zip(y).map(|(p, q)| numeric_difference(p, q)).fold(0.0, f64::max)
        }
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => x
            .iter()
            .map(|(k, v)| y.get(k).map_or(f64::INFINITY, |w| numeric_difference(v, w)))
            .fold(0.0, f64::max),
        _ if a == b => 0.0,
        _ => f64::INFINITY,
    }
}

fn main() {
    let start = std::time::Instant::now();
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("expansion identity n=3", || expansion(bg3_forms(), make_bg3(), reference_bg3(), 1)),
        ("expansion identity n=4", || expansion(bg4_forms(), make_bg4(), reference_bg4(), 2)),
        ("golden fixtures", golden),
        ("oracle certification", oracle_certification),
        ("inverse identity", inverse),
        ("torsion coefficient erratum", torsion_erratum),
        ("curvature cross-path", curvature_cross_path),
        ("homogeneity ladder", homogeneity),
        ("einstein residual", einstein),
        ("cli contract", cli),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        if !outcome.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.evidence
        );
    }
    println!("acceptance: {}/10 passed in {:.1?}", 10 - failures, start.elapsed());
    if failures > 0 {
        std::process::exit(1);
    }
}
