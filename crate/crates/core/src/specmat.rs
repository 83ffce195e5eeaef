//! Dense symmetric-matrix toolkit for boundary-sized matrices (n <= 16).
//!
//! Provides symmetrization, orthonormal eigendecomposition by cyclic Jacobi
//! rotations, sign-based spectral splitting A = A⁺ - |A⁻|, PSD square roots
//! taken spectrally, and definiteness certificates. Zero eigenvalues are
//! assigned to the plus part.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must have dimension >= 1")]
    Empty,
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
    #[error("jacobi iteration did not converge, off-diagonal residual {off_diag:.3e}")]
    NoConvergence { off_diag: f64 },
    #[error("matrix is not positive semi-definite, eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// A real matrix stored in exactly symmetric form.
///
/// The constructor replaces the input by (M + Mᵀ)/2 and records the maximum
/// asymmetry of the original as a diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    mat: DMatrix<f64>,
    asym: f64,
}

impl SymMatrix {
    /// Symmetrize a square matrix as (M + Mᵀ)/2.
    pub fn symmetrize(m: &DMatrix<f64>) -> Result<SymMatrix, MatError> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(MatError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(MatError::Empty);
        }
        for i in 0..rows {
            for j in 0..cols {
                if !m[(i, j)].is_finite() {
                    return Err(MatError::NonFinite { row: i, col: j });
                }
            }
        }
        let mut sym = DMatrix::zeros(rows, rows);
        let mut asym: f64 = 0.0;
        for i in 0..rows {
            for j in i..rows {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                asym = asym.max(0.5 * (m[(i, j)] - m[(j, i)]).abs());
                sym[(i, j)] = v;
                sym[(j, i)] = v;
            }
        }
        Ok(SymMatrix { mat: sym, asym })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<SymMatrix, MatError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatError::Empty);
        }
        for r in rows {
            if r.len() != n {
                return Err(MatError::NotSquare { rows: n, cols: r.len() });
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::symmetrize(&m)
    }

    pub fn identity(n: usize) -> SymMatrix {
        SymMatrix {
            mat: DMatrix::identity(n, n),
            asym: 0.0,
        }
    }

    pub fn zeros(n: usize) -> SymMatrix {
        SymMatrix {
            mat: DMatrix::zeros(n, n),
            asym: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    /// Maximum recorded asymmetry |M - Mᵀ|/2 of the constructor input.
    pub fn asymmetry(&self) -> f64 {
        self.asym
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.mat
    }

    /// Row-major nested-vec form, used by the JSON interfaces.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.mat[(i, j)]).collect())
            .collect()
    }

    /// uᵀ M u.
    pub fn quad(&self, u: &DVector<f64>) -> f64 {
        (u.transpose() * &self.mat * u)[(0, 0)]
    }
}

/// Pass/fail certificate carrying the extremal eigenvalue it was decided on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdVerdict {
    pub pass: bool,
    pub min_eig: f64,
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-14;

fn off_diag_norm(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Orthonormal eigendecomposition a = T diag(lambda) Tᵀ by cyclic Jacobi
/// rotations. Eigenvalues are returned ascending; each eigenvector column has
/// its largest-magnitude component made positive so traces are reproducible.
pub fn eig_sym(a: &SymMatrix) -> Result<(DMatrix<f64>, DVector<f64>), MatError> {
    let n = a.n();
    let mut m = a.entries().clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let frob = m.norm();
    let tol = JACOBI_REL_TOL * frob;

    let mut converged = off_diag_norm(&m) <= tol;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e12 {
                    1.0 / (2.0 * theta)
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = m[(i, p)];
                        let aiq = m[(i, q)];
                        m[(i, p)] = c * aip - s * aiq;
                        m[(p, i)] = m[(i, p)];
                        m[(i, q)] = s * aip + c * aiq;
                        m[(q, i)] = m[(i, q)];
                    }
                }
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        converged = off_diag_norm(&m) <= tol;
    }
    if !converged {
        return Err(MatError::NoConvergence {
            off_diag: off_diag_norm(&m),
        });
    }

    // Sort eigenvalues ascending, permuting eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let lambda = DVector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let mut t_mat = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            t_mat[(i, col)] = v[(i, src)];
        }
    }

    // Sign convention: largest-magnitude component of each column positive.
    for col in 0..n {
        let mut imax = 0;
        for i in 1..n {
            if t_mat[(i, col)].abs() > t_mat[(imax, col)].abs() {
                imax = i;
            }
        }
        if t_mat[(imax, col)] < 0.0 {
            for i in 0..n {
                t_mat[(i, col)] = -t_mat[(i, col)];
            }
        }
    }

    Ok((t_mat, lambda))
}

/// Scale-relative threshold for eigenvalue sign decisions.
pub fn default_zero_tol(max_abs_lambda: f64) -> f64 {
    1e-12 * max_abs_lambda.max(1.0)
}

/// Symmetrized boundary matrix together with its eigen-factors and the
/// derived split A⁺, |A⁻|, √A⁺, √|A⁻|.
///
/// Eigenvalues are ascending, so the minus slots (lambda < -zero_tol) are the
/// leading `n_neg` characteristic indices. Eigenvalues in [-zero_tol, 0] are
/// clamped to zero and kept in the plus part.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub a_sym: SymMatrix,
    pub t: DMatrix<f64>,
    pub lambda: DVector<f64>,
    pub n_neg: usize,
    pub a_plus: SymMatrix,
    pub abs_a_minus: SymMatrix,
    pub sqrt_a_plus: SymMatrix,
    pub sqrt_abs_a_minus: SymMatrix,
    pub zero_tol: f64,
}

fn rebuild(t: &DMatrix<f64>, diag: &[f64]) -> SymMatrix {
    let d = DMatrix::from_diagonal(&DVector::from_row_slice(diag));
    let m = t * d * t.transpose();
    SymMatrix::symmetrize(&m).expect("spectral rebuild is square and finite")
}

fn split_with_eig(
    a: &SymMatrix,
    t: DMatrix<f64>,
    lambda: DVector<f64>,
    zero_tol: f64,
) -> SpectralSplit {
    let n = a.n();
    let mut lam_plus = vec![0.0; n];
    let mut lam_minus_abs = vec![0.0; n];
    let mut n_neg = 0;
    for i in 0..n {
        let l = lambda[i];
        if l < -zero_tol {
            lam_minus_abs[i] = -l;
            n_neg += 1;
        } else {
            lam_plus[i] = l.max(0.0);
        }
    }
    let a_plus = rebuild(&t, &lam_plus);
    let abs_a_minus = rebuild(&t, &lam_minus_abs);
    let sqrt_plus: Vec<f64> = lam_plus.iter().map(|l| l.sqrt()).collect();
    let sqrt_minus: Vec<f64> = lam_minus_abs.iter().map(|l| l.sqrt()).collect();
    let sqrt_a_plus = rebuild(&t, &sqrt_plus);
    let sqrt_abs_a_minus = rebuild(&t, &sqrt_minus);
    SpectralSplit {
        a_sym: a.clone(),
        t,
        lambda,
        n_neg,
        a_plus,
        abs_a_minus,
        sqrt_a_plus,
        sqrt_abs_a_minus,
        zero_tol,
    }
}

/// Sign-based spectral split of a symmetric matrix with an explicit
/// eigenvalue-sign threshold.
pub fn split(a: &SymMatrix, zero_tol: f64) -> Result<SpectralSplit, MatError> {
    let (t, lambda) = eig_sym(a)?;
    Ok(split_with_eig(a, t, lambda, zero_tol))
}

/// Spectral split with the scale-relative default threshold
/// 1e-12 * max(1, max|lambda|).
pub fn split_default(a: &SymMatrix) -> Result<SpectralSplit, MatError> {
    let (t, lambda) = eig_sym(a)?;
    let zero_tol = default_zero_tol(lambda.amax());
    Ok(split_with_eig(a, t, lambda, zero_tol))
}

/// Spectral PSD square root T √Λ Tᵀ. Eigenvalues in [-zero_tol, 0] are
/// clamped to zero; anything more negative is rejected.
pub fn sqrt_psd(a: &SymMatrix, zero_tol: f64) -> Result<SymMatrix, MatError> {
    let (t, lambda) = eig_sym(a)?;
    let min_eig = lambda[0];
    if min_eig < -zero_tol {
        return Err(MatError::NotPsd { min_eig });
    }
    let sqrt_diag: Vec<f64> = lambda.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(rebuild(&t, &sqrt_diag))
}

/// Positive semi-definiteness certificate: pass iff min eigenvalue >= -tol.
pub fn is_psd(a: &SymMatrix, tol: f64) -> Result<PsdVerdict, MatError> {
    let (_, lambda) = eig_sym(a)?;
    let min_eig = lambda[0];
    Ok(PsdVerdict {
        pass: min_eig >= -tol,
        min_eig,
    })
}

/// Number of eigenvalues below -tol.
pub fn negative_inertia(a: &SymMatrix, tol: f64) -> Result<usize, MatError> {
    let (_, lambda) = eig_sym(a)?;
    Ok(lambda.iter().filter(|&&l| l < -tol).count())
}

impl SpectralSplit {
    /// Characteristic variables W = Tᵀ U.
    pub fn char_vars(&self, u: &DVector<f64>) -> DVector<f64> {
        self.t.transpose() * u
    }

    /// Orthogonal projector T I⁻ Tᵀ onto the negative eigenspace.
    pub fn minus_projector(&self) -> DMatrix<f64> {
        let n = self.a_sym.n();
        let mut p = DMatrix::zeros(n, n);
        for k in 0..self.n_neg {
            let col = self.t.column(k);
            p += col * col.transpose();
        }
        p
    }

    /// Projection of boundary data onto the negative eigenspace (the part
    /// that the characteristic conditions can actually act on).
    pub fn project_minus(&self, g: &DVector<f64>) -> DVector<f64> {
        self.minus_projector() * g
    }
}
