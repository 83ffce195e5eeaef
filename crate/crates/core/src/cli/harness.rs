//! Runs experiments from configs and emits machine-readable artifacts:
//! CSV energy traces, JSON run reports, convergence tables and
//! admissibility verdicts.

use std::fs;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bc;
use crate::cli::builtins::{self, BuiltProblem};
use crate::cli::config::ExperimentConfig;
use crate::cli::CliError;
use crate::ibvp::{self, EnergyTrace, RunOutput, ScalarSolver, SystemSolver, TraceRow};
use crate::sbp::build_sbp_21;
use crate::specmat::{self, SymMatrix};

/// Absolute slack allowed on energy(t) <= cumulative bound.
pub const BOUND_TOL: f64 = 1e-7;
/// Energy-identity tolerance for weak runs (the identity is exact
/// semi-discretely).
pub const IDENTITY_TOL_WEAK: f64 = 1e-9;
/// Looser tolerance when any boundary uses strong injection, which perturbs
/// the identity at the time-integration level.
pub const IDENTITY_TOL_STRONG: f64 = 1e-6;

pub const TRACE_HEADER: &str =
    "t,energy,energy_rate,bt_left,bt_right,bound_rate,cumulative_bound,violation";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityVerdict {
    pub pass: bool,
    pub max_residual: f64,
    pub worst_t: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundVerdict {
    /// "pass", "fail", or "expected-fail" for negative-control runs.
    pub status: String,
    pub max_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation_time: Option<f64>,
    /// max over steps of energy / cumulative_bound, when the bound is
    /// meaningfully positive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation_factor: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub grid: usize,
    pub trace_path: String,
    pub energy_identity: IdentityVerdict,
    pub bound: BoundVerdict,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

impl RunReport {
    /// True when nothing unexpected happened (expected-fail counts as ok).
    pub fn ok(&self) -> bool {
        self.energy_identity.pass && self.bound.status != "fail"
    }
}

pub fn run_built(built: &BuiltProblem) -> Result<RunOutput, CliError> {
    Ok(match built {
        BuiltProblem::Scalar(p) => ScalarSolver::new(p.clone())?.run()?,
        BuiltProblem::System(p) => SystemSolver::new(p.clone())?.run()?,
    })
}

pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let n_pts = config.grid_sizes[0];
    let built = builtins::build(config, n_pts)?;
    let out = run_built(&built.problem)?;

    fs::create_dir_all(out_dir)?;
    let trace_path = out_dir.join(format!("{}_trace.csv", config.name));
    fs::write(&trace_path, trace_to_csv(&out.trace))?;

    let any_strong =
        config.bc.left.imposition == "strong" || config.bc.right.imposition == "strong";
    let identity_tol = if any_strong {
        IDENTITY_TOL_STRONG
    } else {
        IDENTITY_TOL_WEAK
    };
    let report = RunReport {
        config: config.clone(),
        grid: n_pts,
        trace_path: trace_path.to_string_lossy().into_owned(),
        energy_identity: identity_verdict(&out.trace, identity_tol),
        bound: bound_verdict(&out.trace, config.expect_bound_violation),
        warnings: out.trace.warnings.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let report_path = out_dir.join(format!("{}_report.json", config.name));
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

pub fn identity_verdict(trace: &EnergyTrace, tol: f64) -> IdentityVerdict {
    let audit = ibvp::energy_rate_audit(trace, tol);
    IdentityVerdict {
        pass: audit.pass,
        max_residual: audit.max_residual,
        worst_t: audit.worst_t,
        tol: audit.tol,
    }
}

pub fn bound_verdict(trace: &EnergyTrace, expect_violation: bool) -> BoundVerdict {
    let mut max_violation = f64::NEG_INFINITY;
    let mut first_violation_time = None;
    let mut violation_factor: Option<f64> = None;
    for row in &trace.rows {
        max_violation = max_violation.max(row.violation);
        if row.violation > BOUND_TOL && first_violation_time.is_none() {
            first_violation_time = Some(row.t);
        }
        if row.cumulative_bound > 1e-10 {
            let f = row.energy / row.cumulative_bound;
            violation_factor = Some(violation_factor.map_or(f, |m: f64| m.max(f)));
        }
    }
    if !max_violation.is_finite() {
        max_violation = 0.0;
    }
    let violated = max_violation > BOUND_TOL;
    let status = match (violated, expect_violation) {
        (false, false) => "pass",
        (true, true) => "expected-fail",
        (true, false) => "fail",
        // a negative control that fails to break the bound is itself a failure
        (false, true) => "fail",
    };
    BoundVerdict {
        status: status.into(),
        max_violation,
        first_violation_time,
        violation_factor,
    }
}

pub fn trace_to_csv(trace: &EnergyTrace) -> String {
    let mut s = String::with_capacity(trace.rows.len() * 200 + 100);
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in &trace.rows {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.t,
            r.energy,
            r.energy_rate,
            r.bt_left,
            r.bt_right,
            r.bound_rate,
            r.cumulative_bound,
            r.violation
        ));
    }
    s
}

pub fn trace_from_csv(text: &str) -> Result<EnergyTrace, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config("empty trace file".into()))?;
    if header.trim() != TRACE_HEADER {
        return Err(CliError::Config(format!(
            "unexpected trace header '{header}'"
        )));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("bad float '{v}' on data row {k}")))
            })
            .collect::<Result<_, _>>()?;
        if vals.len() != 8 {
            return Err(CliError::Config(format!(
                "expected 8 columns on data row {k}, got {}",
                vals.len()
            )));
        }
        rows.push(TraceRow {
            t: vals[0],
            energy: vals[1],
            energy_rate: vals[2],
            bt_left: vals[3],
            bt_right: vals[4],
            bound_rate: vals[5],
            cumulative_bound: vals[6],
            violation: vals[7],
        });
    }
    Ok(EnergyTrace {
        rows,
        warnings: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Convergence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub grid: usize,
    pub h: f64,
    pub l2_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ConvergenceRow>,
    pub csv_path: String,
}

pub fn run_convergence(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<ConvergenceReport, CliError> {
    let grids = &config.grid_sizes;
    if grids.len() < 3 {
        return Err(CliError::Config(format!(
            "convergence needs at least 3 grids, got {}",
            grids.len()
        )));
    }
    let mut sorted = grids.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != grids.len() {
        return Err(CliError::Config("grids must be pairwise distinct".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n_pts in grids {
        let built = builtins::build(config, n_pts)?;
        let exact = built.exact.as_ref().ok_or_else(|| {
            CliError::Config(
                "convergence study needs a problem with an exact solution".into(),
            )
        })?;
        let scalar = match &built.problem {
            BuiltProblem::Scalar(p) => p,
            BuiltProblem::System(_) => {
                return Err(CliError::Config(
                    "convergence study supports scalar problems only".into(),
                ));
            }
        };
        let out = run_built(&built.problem)?;
        let grid = crate::sbp::Grid::new(config.domain[0], config.domain[1], n_pts)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let ops = build_sbp_21(&grid).map_err(|e| CliError::Config(e.to_string()))?;
        let t_final = scalar.t_final;
        let mut err2 = 0.0;
        for i in 0..n_pts {
            let d = out.final_state[i] - exact(grid.xs[i], t_final);
            err2 += ops.h_diag[i] * d * d;
        }
        let l2_error = err2.sqrt();
        let order = rows.last().map(|prev: &ConvergenceRow| {
            (prev.l2_error / l2_error).ln() / (prev.h / grid.h).ln()
        });
        rows.push(ConvergenceRow {
            grid: n_pts,
            h: grid.h,
            l2_error,
            order,
        });
    }
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}_convergence.csv", config.name));
    let mut csv = String::from("grid,h,l2_error,order\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{}\n",
            r.grid,
            r.h,
            r.l2_error,
            r.order.map_or(String::new(), |o| format!("{o:.16e}"))
        ));
    }
    fs::write(&csv_path, csv)?;
    let report = ConvergenceReport {
        config: config.clone(),
        rows,
        csv_path: csv_path.to_string_lossy().into_owned(),
    };
    let json_path = out_dir.join(format!("{}_convergence.json", config.name));
    fs::write(&json_path, serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Admissibility checker
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
pub struct BcCheckInput {
    pub a: Vec<Vec<f64>>,
    pub normal: f64,
    pub r: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictJson {
    pub pass: bool,
    pub min_eig: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BcCheckOutput {
    pub r_condition: VerdictJson,
    pub r_condition_strict: VerdictJson,
    pub s_condition: VerdictJson,
    /// The unique penalty choice: sqrt of the negative part of the
    /// outward-normal symmetrized boundary matrix.
    pub sigma_prop1: Vec<Vec<f64>>,
}

fn to_square(name: &str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!(
            "matrix {name} must be {n}x{n} to match A"
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn bc_check(input: &BcCheckInput, tol: f64) -> Result<BcCheckOutput, CliError> {
    let n = input.a.len();
    if n == 0 || input.a.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("matrix a must be square and nonempty".into()));
    }
    if input.normal != 1.0 && input.normal != -1.0 {
        return Err(CliError::Config(format!(
            "normal must be +1 or -1, got {}",
            input.normal
        )));
    }
    let a = to_square("a", &input.a, n)?;
    let r = to_square("r", &input.r, n)?;
    let s = to_square("s", &input.s, n)?;

    let m = SymMatrix::symmetrize(&(input.normal * a)).map_err(|e| CliError::Config(e.to_string()))?;
    let split = specmat::split_default(&m).map_err(|e| CliError::Config(e.to_string()))?;

    let rv = bc::check_r(&r, tol, false).map_err(|e| CliError::Config(e.to_string()))?;
    let rv_strict = bc::check_r(&r, tol, true).map_err(|e| CliError::Config(e.to_string()))?;
    let sv = if rv_strict.pass {
        let v = bc::check_s(&r, &s, tol).map_err(|e| CliError::Config(e.to_string()))?;
        VerdictJson {
            pass: v.pass,
            min_eig: v.min_eig,
            note: None,
        }
    } else {
        VerdictJson {
            pass: false,
            min_eig: rv_strict.min_eig,
            note: Some("undefined: strict R-condition fails".into()),
        }
    };
    Ok(BcCheckOutput {
        r_condition: VerdictJson {
            pass: rv.pass,
            min_eig: rv.min_eig,
            note: None,
        },
        r_condition_strict: VerdictJson {
            pass: rv_strict.pass,
            min_eig: rv_strict.min_eig,
            note: None,
        },
        s_condition: sv,
        sigma_prop1: split.sqrt_abs_a_minus.to_rows(),
    })
}

// ---------------------------------------------------------------------------
// Trace re-audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AuditOutput {
    pub trace_path: String,
    pub energy_identity: IdentityVerdict,
    pub bound: BoundVerdict,
}

/// Recomputes the run verdicts from a trace file alone.
pub fn audit_trace(path: &Path, identity_tol: f64) -> Result<AuditOutput, CliError> {
    let text = fs::read_to_string(path)?;
    let trace = trace_from_csv(&text)?;
    if trace.rows.is_empty() {
        return Err(CliError::Config("trace has no data rows".into()));
    }
    Ok(AuditOutput {
        trace_path: path.to_string_lossy().into_owned(),
        energy_identity: identity_verdict(&trace, identity_tol),
        bound: bound_verdict(&trace, false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;
    use std::path::PathBuf;

    fn tmp_dir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("openbc-harness-{tag}-{}", std::process::id()));
        fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn zero_data_config_gives_all_zero_trace() {
        let c = parse_config(
            r#"{"name": "zero", "problem": {"a": "1", "f": "0"}, "t_final": 0.1}"#,
        )
        .unwrap();
        let dir = tmp_dir("zero");
        let report = run_experiment(&c, &dir).unwrap();
        assert!(report.ok());
        let trace = trace_from_csv(&fs::read_to_string(&report.trace_path).unwrap()).unwrap();
        for row in &trace.rows {
            assert_eq!(row.energy, 0.0);
            assert_eq!(row.energy_rate, 0.0);
            assert_eq!(row.bound_rate, 0.0);
        }
    }

    #[test]
    fn trace_csv_round_trip() {
        let c = parse_config(r#"{"name": "rt", "problem": "linear_constant", "t_final": 0.1}"#)
            .unwrap();
        let dir = tmp_dir("rt");
        let report = run_experiment(&c, &dir).unwrap();
        let text = fs::read_to_string(&report.trace_path).unwrap();
        let trace = trace_from_csv(&text).unwrap();
        assert_eq!(trace_to_csv(&trace), text);
        assert!(!trace.rows.is_empty());
    }

    #[test]
    fn identical_configs_give_byte_identical_traces() {
        let c = parse_config(
            r#"{"name": "det", "problem": "nonlinear_scalar", "t_final": 0.2, "seed": 7}"#,
        )
        .unwrap();
        let d1 = tmp_dir("det1");
        let d2 = tmp_dir("det2");
        let r1 = run_experiment(&c, &d1).unwrap();
        let r2 = run_experiment(&c, &d2).unwrap();
        assert_eq!(
            fs::read(&r1.trace_path).unwrap(),
            fs::read(&r2.trace_path).unwrap()
        );
    }

    #[test]
    fn audit_rederives_report_verdicts() {
        let c = parse_config(
            r#"{"name": "audit", "problem": "nonlinear_scalar", "t_final": 0.3}"#,
        )
        .unwrap();
        let dir = tmp_dir("audit");
        let report = run_experiment(&c, &dir).unwrap();
        let audit = audit_trace(Path::new(&report.trace_path), IDENTITY_TOL_WEAK).unwrap();
        assert_eq!(audit.energy_identity.pass, report.energy_identity.pass);
        assert_eq!(audit.bound.status, report.bound.status);
        assert!((audit.bound.max_violation - report.bound.max_violation).abs() < 1e-18);
    }

    #[test]
    fn bc_check_examples() {
        let base = |r: Vec<Vec<f64>>, s: Vec<Vec<f64>>| BcCheckInput {
            a: vec![vec![2.0, 0.0], vec![0.0, -3.0]],
            normal: 1.0,
            r,
            s,
        };
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let zero = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let half = vec![vec![0.5, 0.0], vec![0.0, 0.5]];

        let out = bc_check(&base(zero.clone(), id.clone()), 1e-12).unwrap();
        assert!(out.r_condition.pass && out.r_condition_strict.pass && out.s_condition.pass);
        // sigma_prop1 = sqrt of diag(0, 3)
        assert!((out.sigma_prop1[1][1] - 3.0f64.sqrt()).abs() < 1e-12);
        assert!(out.sigma_prop1[0][0].abs() < 1e-12);

        let r11 = vec![vec![1.1, 0.0], vec![0.0, 1.1]];
        let out = bc_check(&base(r11, id.clone()), 1e-12).unwrap();
        assert!(!out.r_condition.pass);
        assert!((out.r_condition.min_eig + 0.21).abs() < 1e-12);

        let out = bc_check(&base(half.clone(), half), 1e-12).unwrap();
        assert!(out.s_condition.pass);
        assert!((out.s_condition.min_eig - 2.0 / 3.0).abs() < 1e-12);

        // dimension mismatch
        let bad = BcCheckInput {
            a: vec![vec![1.0]],
            normal: 1.0,
            r: id.clone(),
            s: id,
        };
        assert!(bc_check(&bad, 1e-12).is_err());
    }

    #[test]
    fn convergence_rejects_bad_setups() {
        let c = parse_config(
            r#"{"problem": "manufactured", "grid_sizes": [51, 101]}"#,
        )
        .unwrap();
        assert!(run_convergence(&c, &tmp_dir("cv1")).is_err());
        let c = parse_config(
            r#"{"problem": "manufactured", "grid_sizes": [51, 51, 101]}"#,
        )
        .unwrap();
        assert!(run_convergence(&c, &tmp_dir("cv2")).is_err());
        let c = parse_config(
            r#"{"problem": "linear_constant", "grid_sizes": [51, 101, 201]}"#,
        )
        .unwrap();
        assert!(run_convergence(&c, &tmp_dir("cv3")).is_err());
    }
}
