//! Experiment configuration: JSON schema, validation, and conversion to the
//! library's boundary operator specs.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bc::{BcKind, BoundaryOperatorSpec, Imposition};
use crate::cli::expr;
use crate::cli::CliError;

pub const KNOWN_BC_KINDS: [&str; 4] = ["classicalchar", "fluxchar", "sqrtchar", "generalized"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemConfig,
    #[serde(default = "default_grids")]
    pub grid_sizes: Vec<usize>,
    #[serde(default = "default_domain")]
    pub domain: [f64; 2],
    #[serde(default)]
    pub bc: BcPair,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub seed: u64,
    /// Free parameters consumed by builtin problems (e.g. amplitude,
    /// nonlinearity strength of the violation recipes).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// Marks a deliberate negative-control run: a broken energy bound is the
    /// expected outcome and reported as such.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub expect_bound_violation: bool,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_grids() -> Vec<usize> {
    vec![101]
}

fn default_domain() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_t_final() -> f64 {
    1.0
}

fn default_cfl() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemConfig {
    /// Name of a builtin problem, see [`crate::cli::builtins`].
    Builtin(String),
    /// Inline scalar problem given by coefficient expressions.
    Inline(InlineScalar),
}

/// Scalar problem from expression strings: a(u, x, t), f(x), g(t) per
/// boundary, optional source s(x, t) and exact solution u(x, t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineScalar {
    pub a: String,
    pub f: String,
    #[serde(default = "zero_expr")]
    pub g_left: String,
    #[serde(default = "zero_expr")]
    pub g_right: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

fn zero_expr() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcPair {
    pub left: BcConfig,
    pub right: BcConfig,
}

impl Default for BcPair {
    fn default() -> Self {
        BcPair {
            left: BcConfig::default(),
            right: BcConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    pub kind: String,
    #[serde(default = "default_imposition")]
    pub imposition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Vec<f64>>>,
}

impl Default for BcConfig {
    fn default() -> Self {
        BcConfig {
            kind: "sqrtchar".into(),
            imposition: "weak".into(),
            r: None,
            s: None,
        }
    }
}

fn default_imposition() -> String {
    "weak".into()
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("{e}")))?;
    validate(&config)?;
    Ok(config)
}

pub fn emit_config(config: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serialization cannot fail")
}

fn validate(config: &ExperimentConfig) -> Result<(), CliError> {
    if config.grid_sizes.is_empty() {
        return Err(CliError::Config("grid_sizes must be nonempty".into()));
    }
    for &n in &config.grid_sizes {
        if n < 4 {
            return Err(CliError::Config(format!("grid size {n} < 4")));
        }
    }
    if !(config.domain[1] > config.domain[0]) {
        return Err(CliError::Config(format!(
            "domain [{}, {}] must satisfy x1 > x0",
            config.domain[0], config.domain[1]
        )));
    }
    if !(config.t_final > 0.0) {
        return Err(CliError::Config(format!(
            "t_final must be positive, got {}",
            config.t_final
        )));
    }
    if !(config.cfl > 0.0) {
        return Err(CliError::Config(format!(
            "cfl must be positive, got {}",
            config.cfl
        )));
    }
    for (side, bc) in [("left", &config.bc.left), ("right", &config.bc.right)] {
        validate_bc(bc, side)?;
    }
    if let ProblemConfig::Inline(p) = &config.problem {
        let checked: [(&str, &str, bool, bool, usize); 4] = [
            ("a", &p.a, true, true, 1),
            ("f", &p.f, true, false, 0),
            ("g_left", &p.g_left, false, true, 0),
            ("g_right", &p.g_right, false, true, 0),
        ];
        for (what, src, allow_x, allow_t, n_comp) in checked {
            let e = expr::parse(src)
                .map_err(|err| CliError::Config(format!("field {what}: {err}")))?;
            expr::check_vars(&e, allow_x, allow_t, n_comp, what)
                .map_err(|err| CliError::Config(format!("field {what}: {err}")))?;
        }
        for (what, src) in [("source", &p.source), ("exact", &p.exact)] {
            if let Some(src) = src {
                let e = expr::parse(src)
                    .map_err(|err| CliError::Config(format!("field {what}: {err}")))?;
                expr::check_vars(&e, true, true, 0, what)
                    .map_err(|err| CliError::Config(format!("field {what}: {err}")))?;
            }
        }
    }
    Ok(())
}

fn validate_bc(bc: &BcConfig, side: &str) -> Result<(), CliError> {
    if !KNOWN_BC_KINDS.contains(&bc.kind.as_str()) {
        return Err(CliError::Config(format!(
            "unknown bc kind '{}' at {side} boundary; known kinds: {}",
            bc.kind,
            KNOWN_BC_KINDS.join(", ")
        )));
    }
    match bc.imposition.as_str() {
        "strong" | "weak" => {}
        other => {
            return Err(CliError::Config(format!(
                "unknown imposition '{other}' at {side} boundary; use strong or weak"
            )));
        }
    }
    if bc.kind == "generalized" {
        let r = bc.r.as_ref().ok_or_else(|| {
            CliError::Config(format!("generalized bc at {side} boundary needs matrix r"))
        })?;
        let s = bc.s.as_ref().ok_or_else(|| {
            CliError::Config(format!("generalized bc at {side} boundary needs matrix s"))
        })?;
        for (name, m) in [("r", r), ("s", s)] {
            let n = m.len();
            if n == 0 || m.iter().any(|row| row.len() != n) {
                return Err(CliError::Config(format!(
                    "matrix {name} at {side} boundary must be square and nonempty"
                )));
            }
        }
        if r.len() != s.len() {
            return Err(CliError::Config(format!(
                "matrices r and s at {side} boundary must have equal size"
            )));
        }
    } else if bc.r.is_some() || bc.s.is_some() {
        return Err(CliError::Config(format!(
            "bc kind '{}' at {side} boundary takes no r/s matrices",
            bc.kind
        )));
    }
    Ok(())
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, rows[0].len(), |i, j| rows[i][j])
}

/// Converts a validated bc config into the library spec; `n_comp` checks the
/// generalized matrices against the problem size.
pub fn to_bc_spec(bc: &BcConfig, n_comp: usize) -> Result<BoundaryOperatorSpec, CliError> {
    let kind = match bc.kind.as_str() {
        "classicalchar" => BcKind::ClassicalChar,
        "fluxchar" => BcKind::FluxChar,
        "sqrtchar" => BcKind::SqrtChar,
        "generalized" => {
            let r = bc.r.as_ref().expect("validated");
            let s = bc.s.as_ref().expect("validated");
            if r.len() != n_comp {
                return Err(CliError::Config(format!(
                    "generalized bc matrices are {}x{} but the problem has {} components",
                    r.len(),
                    r.len(),
                    n_comp
                )));
            }
            BcKind::Generalized {
                r: rows_to_matrix(r),
                s: rows_to_matrix(s),
            }
        }
        other => return Err(CliError::Config(format!("unknown bc kind '{other}'"))),
    };
    let imposition = match bc.imposition.as_str() {
        "strong" => Imposition::Strong,
        _ => Imposition::Weak,
    };
    Ok(BoundaryOperatorSpec { kind, imposition })
}
