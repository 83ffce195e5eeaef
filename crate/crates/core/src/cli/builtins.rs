//! Builtin experiment problems and assembly of configs into runnable
//! scalar/system problems.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, dvector};

use crate::cli::config::{to_bc_spec, ExperimentConfig, ProblemConfig};
use crate::cli::{expr, CliError};
use crate::ibvp::{ScalarProblem, SystemProblem};
use crate::sbp::Grid;

pub const BUILTIN_NAMES: [&str; 8] = [
    "linear_constant",
    "variable_coeff",
    "nonlinear_scalar",
    "manufactured",
    "system_constant",
    "system_nonlinear",
    "violation_classical",
    "violation_flux",
];

pub type ExactFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub enum BuiltProblem {
    Scalar(ScalarProblem),
    System(SystemProblem),
}

pub struct Built {
    pub problem: BuiltProblem,
    /// Exact solution u(x, t) when the problem is manufactured; enables
    /// convergence studies.
    pub exact: Option<ExactFn>,
}

/// Gaussian pulse truncated to exact compact support.
pub fn bump(x: f64, center: f64) -> f64 {
    let z = (x - center) / 0.08;
    let v = (-z * z).exp();
    if v < 1e-14 {
        0.0
    } else {
        v
    }
}

fn ramp2(t: f64, period: f64) -> f64 {
    (std::f64::consts::PI * t / period).sin().powi(2)
}

fn param(config: &ExperimentConfig, key: &str, default: f64) -> f64 {
    config.params.get(key).copied().unwrap_or(default)
}

pub fn build(config: &ExperimentConfig, n_pts: usize) -> Result<Built, CliError> {
    let grid = Grid::new(config.domain[0], config.domain[1], n_pts)
        .map_err(|e| CliError::Config(e.to_string()))?;
    match &config.problem {
        ProblemConfig::Inline(inline) => build_inline(config, inline, grid),
        ProblemConfig::Builtin(name) => build_builtin(config, name, grid),
    }
}

fn scalar_base(config: &ExperimentConfig, grid: Grid) -> Result<ScalarProblem, CliError> {
    Ok(ScalarProblem {
        a_fn: Arc::new(|_, _, _| 1.0),
        f: Arc::new(|_| 0.0),
        g_left: Arc::new(|_| 0.0),
        g_right: Arc::new(|_| 0.0),
        source: None,
        bc_left: to_bc_spec(&config.bc.left, 1)?,
        bc_right: to_bc_spec(&config.bc.right, 1)?,
        grid,
        t_final: config.t_final,
        cfl: config.cfl,
    })
}

fn build_inline(
    config: &ExperimentConfig,
    inline: &crate::cli::config::InlineScalar,
    grid: Grid,
) -> Result<Built, CliError> {
    let parse = |src: &str, what: &str| {
        expr::parse(src).map_err(|e| CliError::Config(format!("field {what}: {e}")))
    };
    let a = parse(&inline.a, "a")?;
    let f = parse(&inline.f, "f")?;
    let gl = parse(&inline.g_left, "g_left")?;
    let gr = parse(&inline.g_right, "g_right")?;
    let source = inline
        .source
        .as_deref()
        .map(|s| parse(s, "source"))
        .transpose()?;
    let exact = inline
        .exact
        .as_deref()
        .map(|s| parse(s, "exact"))
        .transpose()?;
    let mut problem = scalar_base(config, grid)?;
    problem.a_fn = Arc::new(move |u, x, t| a.eval(&[u], x, t));
    problem.f = Arc::new(move |x| f.eval(&[], x, 0.0));
    problem.g_left = Arc::new(move |t| gl.eval(&[], 0.0, t));
    problem.g_right = Arc::new(move |t| gr.eval(&[], 0.0, t));
    problem.source = source.map(|s| {
        let s = s.clone();
        let f: crate::ibvp::SourceFn = Arc::new(move |x, t| s.eval(&[], x, t));
        f
    });
    Ok(Built {
        problem: BuiltProblem::Scalar(problem),
        exact: exact.map(|e| {
            let f: ExactFn = Arc::new(move |x, t| e.eval(&[], x, t));
            f
        }),
    })
}

fn build_builtin(config: &ExperimentConfig, name: &str, grid: Grid) -> Result<Built, CliError> {
    let t_final = config.t_final;
    match name {
        "linear_constant" => {
            let a0 = param(config, "a0", 1.0);
            if !(a0 > 0.0) {
                return Err(CliError::Config(format!("param a0 must be positive, got {a0}")));
            }
            let mut p = scalar_base(config, grid)?;
            p.a_fn = Arc::new(move |_, _, _| a0);
            p.f = Arc::new(|x| 0.5 * bump(x, 0.5));
            p.g_left = Arc::new(|t| 0.3 * ramp2(t, 1.0));
            Ok(scalar_built(p))
        }
        "variable_coeff" => {
            let mut p = scalar_base(config, grid)?;
            p.a_fn = Arc::new(|_, x, _| 2.0 + (2.0 * std::f64::consts::PI * x).sin());
            p.f = Arc::new(|x| 0.5 * bump(x, 0.5));
            p.g_left = Arc::new(|t| 0.3 * ramp2(t, 1.0));
            Ok(scalar_built(p))
        }
        "nonlinear_scalar" => {
            // pulse near the right boundary: outflow dissipation from t = 0
            let mut p = scalar_base(config, grid)?;
            p.a_fn = Arc::new(|u, _, _| 1.0 + u * u);
            p.f = Arc::new(|x| 0.5 * bump(x, 0.9));
            p.g_left = Arc::new(|t| 0.3 * ramp2(t, 1.0));
            Ok(scalar_built(p))
        }
        "manufactured" => {
            // exact solution sin(2pi(x - t)) of u_t + 2u_x = source
            let w = 2.0 * std::f64::consts::PI;
            let mut p = scalar_base(config, grid)?;
            p.a_fn = Arc::new(|_, _, _| 1.0);
            p.f = Arc::new(move |x| (w * x).sin());
            p.g_left = Arc::new(move |t| -(w * t).sin());
            p.source = Some(Arc::new(move |x, t| w * (w * (x - t)).cos()));
            Ok(Built {
                problem: BuiltProblem::Scalar(p),
                exact: Some(Arc::new(move |x, t| (w * (x - t)).sin())),
            })
        }
        "system_constant" => {
            let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]);
            let p = SystemProblem {
                n_comp: 2,
                p_mat: DMatrix::identity(2, 2),
                a_fn: Arc::new(move |_: &DVector<f64>, _, _| a.clone()),
                f_vec: Arc::new(|x| dvector![0.5 * bump(x, 0.5), 0.3 * bump(x, 0.5)]),
                // data aligned with the ingoing slot of each boundary
                g_left: Arc::new(|t| dvector![0.2 * ramp2(t, 1.0), 0.0]),
                g_right: Arc::new(|t| dvector![0.0, 0.1 * ramp2(t, 1.0)]),
                source: None,
                bc_left: to_bc_spec(&config.bc.left, 2)?,
                bc_right: to_bc_spec(&config.bc.right, 2)?,
                grid,
                t_final,
                cfl: config.cfl,
            };
            Ok(system_built(p))
        }
        "system_nonlinear" => {
            let p = SystemProblem {
                n_comp: 2,
                p_mat: DMatrix::identity(2, 2),
                a_fn: Arc::new(|u: &DVector<f64>, _, _| {
                    DMatrix::from_row_slice(2, 2, &[u[0], 1.0 + u[1] * u[1], 1.0, u[0]])
                }),
                f_vec: Arc::new(|x| dvector![0.3 * bump(x, 0.75), 0.2 * bump(x, 0.75)]),
                g_left: Arc::new(|t| dvector![0.2 * ramp2(t, 1.0), 0.1 * ramp2(t, 1.0)]),
                g_right: Arc::new(|_| dvector![0.0, 0.0]),
                source: None,
                bc_left: to_bc_spec(&config.bc.left, 2)?,
                bc_right: to_bc_spec(&config.bc.right, 2)?,
                grid,
                t_final,
                cfl: config.cfl,
            };
            Ok(system_built(p))
        }
        "violation_classical" => {
            // classical characteristic data on a solution-dependent speed:
            // the inflow energy rate is a(g)g^2, above the g^2 budget
            let amp = param(config, "amp", 1.5);
            let nu = param(config, "nu", 1.0);
            let mut p = scalar_base(config, grid)?;
            p.a_fn = Arc::new(move |u, _, _| 1.0 + nu * u * u);
            p.g_left = Arc::new(move |t| amp * ramp2(t, t_final));
            Ok(scalar_built(p))
        }
        "violation_flux" => {
            // slow speed at the boundary: |A-|u = g forces u = g/a > g,
            // so the inflow rate a u^2 = u g exceeds g^2
            let amp = param(config, "amp", 0.3);
            let mut p = scalar_base(config, grid)?;
            p.a_fn = Arc::new(|u, _, _| 0.2 + u * u);
            p.g_left = Arc::new(move |t| amp * (1.0 - (-20.0 * t).exp()));
            Ok(scalar_built(p))
        }
        other => Err(CliError::Config(format!(
            "unknown builtin problem '{other}'; known: {}",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

fn scalar_built(problem: ScalarProblem) -> Built {
    Built {
        problem: BuiltProblem::Scalar(problem),
        exact: None,
    }
}

fn system_built(problem: SystemProblem) -> Built {
    Built {
        problem: BuiltProblem::System(problem),
        exact: None,
    }
}
