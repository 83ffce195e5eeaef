//! Boundary operators, penalty matrices and boundary-term evaluation.
//!
//! The boundary term of the energy method is UᵀAU at each boundary, with A
//! the outward-normal symmetrized coefficient matrix. This module evaluates
//! that term under the three strong conditions (classical characteristic,
//! flux, square-root characteristic), builds the SAT penalty for weak
//! imposition, and certifies admissibility of the generalized R/S family.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::specmat::{self, MatError, PsdVerdict, SpectralSplit, SymMatrix};

/// Relative tolerance for cross-checking algebraically equal forms of the
/// boundary term.
pub const FORM_AGREEMENT_TOL: f64 = 1e-9;
/// Base tolerance for strong-imposition consistency checks, scaled by
/// ||u|| + ||g||.
pub const STRONG_CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum BcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("boundary-term forms disagree: {detail}")]
    FormDisagreement { detail: String },
    #[error("state inconsistent with the imposed boundary condition, residual {residual:.3e}")]
    ConditionViolated { residual: f64 },
    #[error("w_plus has nonzero ingoing components, norm {norm:.3e}")]
    NonzeroMinusComponents { norm: f64 },
    #[error("penalty matrix requested for strong imposition")]
    StrongHasNoPenalty,
    #[error("S-condition undefined: strict R-condition fails with min eigenvalue {min_eig:.3e}")]
    RConditionViolated { min_eig: f64 },
}

/// Which boundary condition is applied.
#[derive(Debug, Clone, PartialEq)]
pub enum BcKind {
    /// Specify the ingoing characteristic variables, W⁻ = G.
    ClassicalChar,
    /// Specify the ingoing flux, |A⁻|U = G.
    FluxChar,
    /// Specify √|A⁻|U = G, bounded by data in linear and nonlinear settings.
    SqrtChar,
    /// (√|A⁻| - R√A⁺)U - SG = 0, mixing in outgoing information.
    Generalized { r: DMatrix<f64>, s: DMatrix<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Imposition {
    Strong,
    Weak,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperatorSpec {
    pub kind: BcKind,
    pub imposition: Imposition,
}

/// One boundary-term evaluation together with the data bound it is checked
/// against.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryTermReport {
    /// UᵀAU at the boundary.
    pub raw: f64,
    /// 2UᵀΣ(B(U)-G), zero for strong imposition.
    pub penalty_contribution: f64,
    pub total: f64,
    /// -GᵀG.
    pub bound: f64,
    pub satisfied: bool,
}

fn check_dim(n: usize, v: &DVector<f64>) -> Result<(), BcError> {
    if v.len() != n {
        return Err(BcError::Dimension {
            expected: n,
            got: v.len(),
        });
    }
    Ok(())
}

fn check_mat_dim(n: usize, m: &DMatrix<f64>) -> Result<(), BcError> {
    if m.nrows() != n || m.ncols() != n {
        return Err(BcError::Dimension {
            expected: n,
            got: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

/// UᵀAU, cross-checked against the plus/minus split and the square-root
/// forms which are algebraically equal.
pub fn bt_raw(split: &SpectralSplit, u: &DVector<f64>) -> Result<f64, BcError> {
    let n = split.a_sym.n();
    check_dim(n, u)?;
    let direct = split.a_sym.quad(u);
    let split_form = split.a_plus.quad(u) - split.abs_a_minus.quad(u);
    let p = split.sqrt_a_plus.entries() * u;
    let q = split.sqrt_abs_a_minus.entries() * u;
    let root_form = p.dot(&p) - q.dot(&q);
    let scale = 1.0 + direct.abs().max(split_form.abs()).max(root_form.abs());
    let spread = (direct - split_form)
        .abs()
        .max((direct - root_form).abs());
    if spread > FORM_AGREEMENT_TOL * scale {
        return Err(BcError::FormDisagreement {
            detail: format!(
                "direct={direct:.17e} split={split_form:.17e} root={root_form:.17e}"
            ),
        });
    }
    Ok(direct)
}

/// Boundary term after strongly specifying the ingoing characteristics
/// W⁻ = G: W₊ᵀΛ⁺W₊ - Gᵀ|Λ⁻|G.
///
/// `w_plus` and `g` are indexed in the characteristic slots of the split
/// (eigenvalues ascending, minus slots first); only plus slots of `w_plus`
/// and minus slots of `g` are read.
pub fn bt_strong_classical(
    split: &SpectralSplit,
    w_plus: &DVector<f64>,
    g: &DVector<f64>,
) -> Result<f64, BcError> {
    let n = split.a_sym.n();
    check_dim(n, w_plus)?;
    check_dim(n, g)?;
    let mut minus_norm2 = 0.0;
    for i in 0..split.n_neg {
        minus_norm2 += w_plus[i] * w_plus[i];
    }
    let tol = STRONG_CONSISTENCY_TOL * (1.0 + w_plus.norm());
    if minus_norm2.sqrt() > tol {
        return Err(BcError::NonzeroMinusComponents {
            norm: minus_norm2.sqrt(),
        });
    }
    let mut plus_sum = 0.0;
    for i in split.n_neg..n {
        plus_sum += split.lambda[i].max(0.0) * w_plus[i] * w_plus[i];
    }
    let mut minus_sum = 0.0;
    for i in 0..split.n_neg {
        minus_sum += split.lambda[i].abs() * g[i] * g[i];
    }
    Ok(plus_sum - minus_sum)
}

fn strong_consistency(
    split: &SpectralSplit,
    residual: &DVector<f64>,
    u: &DVector<f64>,
    g: &DVector<f64>,
) -> Result<(), BcError> {
    // Only the part of the residual in the range of |A⁻| is enforceable.
    let r_char = split.char_vars(residual);
    let mut norm2 = 0.0;
    for i in 0..split.n_neg {
        norm2 += r_char[i] * r_char[i];
    }
    let tol = STRONG_CONSISTENCY_TOL * (1.0 + u.norm() + g.norm());
    if norm2.sqrt() > tol {
        return Err(BcError::ConditionViolated {
            residual: norm2.sqrt(),
        });
    }
    Ok(())
}

/// Boundary term under the strong flux condition |A⁻|U = G:
/// UᵀA⁺U - UᵀG. Errors if the state does not satisfy the condition.
pub fn bt_strong_flux(
    split: &SpectralSplit,
    u: &DVector<f64>,
    g: &DVector<f64>,
) -> Result<f64, BcError> {
    let n = split.a_sym.n();
    check_dim(n, u)?;
    check_dim(n, g)?;
    let residual = split.abs_a_minus.entries() * u - g;
    strong_consistency(split, &residual, u, g)?;
    Ok(split.a_plus.quad(u) - u.dot(g))
}

/// Boundary term under the strong square-root condition √|A⁻|U = G:
/// UᵀA⁺U - GᵀG, which is bounded below by -GᵀG for any wave speeds.
pub fn bt_strong_sqrt(
    split: &SpectralSplit,
    u: &DVector<f64>,
    g: &DVector<f64>,
) -> Result<f64, BcError> {
    let n = split.a_sym.n();
    check_dim(n, u)?;
    check_dim(n, g)?;
    let residual = split.sqrt_abs_a_minus.entries() * u - g;
    strong_consistency(split, &residual, u, g)?;
    Ok(split.a_plus.quad(u) - g.dot(g))
}

/// SAT penalty matrix Σ for weak imposition. All kinds use Σ = √|A⁻|; the
/// kinds differ in the residual operator, see [`boundary_residual`].
pub fn penalty_matrix(
    split: &SpectralSplit,
    spec: &BoundaryOperatorSpec,
) -> Result<DMatrix<f64>, BcError> {
    if spec.imposition == Imposition::Strong {
        return Err(BcError::StrongHasNoPenalty);
    }
    if let BcKind::Generalized { r, s } = &spec.kind {
        check_mat_dim(split.a_sym.n(), r)?;
        check_mat_dim(split.a_sym.n(), s)?;
    }
    Ok(split.sqrt_abs_a_minus.entries().clone())
}

/// The weak boundary residual B(U) - G for each condition, in solution space.
///
/// For the characteristic kinds only the projection of G onto the negative
/// eigenspace is active; [`data_range_defect`] reports the inactive part.
pub fn boundary_residual(
    split: &SpectralSplit,
    kind: &BcKind,
    u: &DVector<f64>,
    g: &DVector<f64>,
) -> Result<DVector<f64>, BcError> {
    let n = split.a_sym.n();
    check_dim(n, u)?;
    check_dim(n, g)?;
    Ok(match kind {
        BcKind::ClassicalChar => split.minus_projector() * u - split.project_minus(g),
        BcKind::FluxChar => split.abs_a_minus.entries() * u - split.project_minus(g),
        BcKind::SqrtChar => split.sqrt_abs_a_minus.entries() * u - split.project_minus(g),
        BcKind::Generalized { r, s } => {
            check_mat_dim(n, r)?;
            check_mat_dim(n, s)?;
            (split.sqrt_abs_a_minus.entries() - r * split.sqrt_a_plus.entries()) * u - s * g
        }
    })
}

/// Norm of the component of G outside the range of √|A⁻|; nonzero data there
/// cannot be imposed by the characteristic conditions.
pub fn data_range_defect(split: &SpectralSplit, g: &DVector<f64>) -> f64 {
    (g - split.project_minus(g)).norm()
}

/// The indefinite matrix of the penalty-choice proof:
/// -√|A⁻|√|A⁻| + ΣC + (ΣC)ᵀ - ΣΣᵀ. It vanishes exactly when
/// Σ = C = √|A⁻|; any other choice admits states that break the data bound.
pub fn delta_bt(
    split: &SpectralSplit,
    sigma: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<SymMatrix, BcError> {
    let n = split.a_sym.n();
    check_mat_dim(n, sigma)?;
    check_mat_dim(n, c)?;
    let q = split.sqrt_abs_a_minus.entries();
    let sc = sigma * c;
    let m = -(q * q) + &sc + sc.transpose() - sigma * sigma.transpose();
    Ok(SymMatrix::symmetrize(&m)?)
}

/// R-condition certificate: I - RᵀR positive semi-definite (strict mode
/// demands min eigenvalue >= tol).
pub fn check_r(r: &DMatrix<f64>, tol: f64, strict: bool) -> Result<PsdVerdict, BcError> {
    let n = r.nrows();
    check_mat_dim(n, r)?;
    let m = DMatrix::identity(n, n) - r.transpose() * r;
    let (_, lambda) = specmat::eig_sym(&SymMatrix::symmetrize(&m)?)?;
    let min_eig = lambda[0];
    let pass = if strict { min_eig >= tol } else { min_eig >= -tol };
    Ok(PsdVerdict { pass, min_eig })
}

/// S-condition certificate:
/// I - SᵀS - (RᵀS)ᵀ(I - RᵀR)⁻¹(RᵀS) positive semi-definite.
/// Requires the strict R-condition, which guarantees the inverse exists.
pub fn check_s(r: &DMatrix<f64>, s: &DMatrix<f64>, tol: f64) -> Result<PsdVerdict, BcError> {
    let n = r.nrows();
    check_mat_dim(n, r)?;
    check_mat_dim(n, s)?;
    let r_verdict = check_r(r, tol, true)?;
    if !r_verdict.pass {
        return Err(BcError::RConditionViolated {
            min_eig: r_verdict.min_eig,
        });
    }
    let k = DMatrix::identity(n, n) - r.transpose() * r;
    let k_inv = k
        .try_inverse()
        .expect("strict R-condition guarantees invertibility");
    let rts = r.transpose() * s;
    let m = DMatrix::identity(n, n) - s.transpose() * s - rts.transpose() * k_inv * &rts;
    let (_, lambda) = specmat::eig_sym(&SymMatrix::symmetrize(&m)?)?;
    let min_eig = lambda[0];
    Ok(PsdVerdict {
        pass: min_eig >= -tol,
        min_eig,
    })
}

/// Complete weak boundary term for the generalized condition
/// (√|A⁻| - R√A⁺)U - SG = 0 with penalty Σ = √|A⁻|.
///
/// Evaluates both the direct form raw + 2UᵀΣ(B(U)-G) and the
/// completed-square block form and errors if they disagree.
pub fn bt_weak_general(
    split: &SpectralSplit,
    r: &DMatrix<f64>,
    s: &DMatrix<f64>,
    u: &DVector<f64>,
    g: &DVector<f64>,
    tol: f64,
) -> Result<BoundaryTermReport, BcError> {
    let n = split.a_sym.n();
    check_dim(n, u)?;
    check_dim(n, g)?;
    check_mat_dim(n, r)?;
    check_mat_dim(n, s)?;
    let raw = bt_raw(split, u)?;
    let q_mat = split.sqrt_abs_a_minus.entries();
    let residual = (q_mat - r * split.sqrt_a_plus.entries()) * u - s * g;
    let penalty_contribution = 2.0 * u.dot(&(q_mat * &residual));
    let total = raw + penalty_contribution;

    // Identity form: positive square plus block quadratic minus GᵀG.
    let p = split.sqrt_a_plus.entries() * u;
    let q = q_mat * u;
    let square = &q - r * &p - s * g;
    let rts = r.transpose() * s;
    let block = p.dot(&p) - (r * &p).dot(&(r * &p)) - 2.0 * p.dot(&(&rts * g)) + g.dot(g)
        - (s * g).dot(&(s * g));
    let total_identity = square.dot(&square) + block - g.dot(g);
    let scale = 1.0 + total.abs().max(total_identity.abs());
    if (total - total_identity).abs() > FORM_AGREEMENT_TOL * scale {
        return Err(BcError::FormDisagreement {
            detail: format!("direct={total:.17e} identity={total_identity:.17e}"),
        });
    }

    let bound = -g.dot(g);
    Ok(BoundaryTermReport {
        raw,
        penalty_contribution,
        total,
        bound,
        satisfied: total >= bound - tol,
    })
}
