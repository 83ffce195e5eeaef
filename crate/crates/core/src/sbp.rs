//! One-dimensional summation-by-parts operators with diagonal norm and the
//! discrete lifting mechanism for SAT boundary penalties.
//!
//! The first-derivative operator D and the norm H satisfy
//! HD + (HD)ᵀ = B = diag(-1, 0, ..., 0, 1), the discrete mirror of
//! integration by parts. The diagonal norm makes the lifting identity
//! vᵀH·l(p) = v_bᵀp exact nodewise.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SbpError {
    #[error("grid needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("domain endpoints must satisfy x1 > x0, got [{x0}, {x1}]")]
    BadDomain { x0: f64, x1: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Uniform 1-D grid on [x0, x1].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub n_pts: usize,
    pub h: f64,
    pub xs: DVector<f64>,
}

impl Grid {
    pub fn new(x0: f64, x1: f64, n_pts: usize) -> Result<Grid, SbpError> {
        if n_pts < 4 {
            return Err(SbpError::TooFewPoints(n_pts));
        }
        if !(x1 > x0) {
            return Err(SbpError::BadDomain { x0, x1 });
        }
        let h = (x1 - x0) / (n_pts - 1) as f64;
        let xs = DVector::from_fn(n_pts, |i, _| x0 + h * i as f64);
        Ok(Grid { x0, x1, n_pts, h, xs })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Left,
    Right,
}

impl Boundary {
    /// Outward-pointing unit normal of the 1-D domain.
    pub fn normal(self) -> f64 {
        match self {
            Boundary::Left => -1.0,
            Boundary::Right => 1.0,
        }
    }
}

/// First-derivative SBP operator with diagonal norm for one grid.
#[derive(Debug, Clone)]
pub struct SbpOperators {
    pub d1: DMatrix<f64>,
    pub h_diag: DVector<f64>,
    pub order: usize,
    pub h: f64,
}

/// The standard second-order diagonal-norm operator: central differences in
/// the interior, first-order one-sided boundary rows,
/// H = h·diag(1/2, 1, ..., 1, 1/2).
pub fn build_sbp_21(grid: &Grid) -> Result<SbpOperators, SbpError> {
    let n = grid.n_pts;
    if n < 4 {
        return Err(SbpError::TooFewPoints(n));
    }
    let h = grid.h;
    let mut d1 = DMatrix::zeros(n, n);
    d1[(0, 0)] = -1.0 / h;
    d1[(0, 1)] = 1.0 / h;
    for i in 1..n - 1 {
        d1[(i, i - 1)] = -0.5 / h;
        d1[(i, i + 1)] = 0.5 / h;
    }
    d1[(n - 1, n - 2)] = -1.0 / h;
    d1[(n - 1, n - 1)] = 1.0 / h;

    let mut h_diag = DVector::from_element(n, h);
    h_diag[0] = 0.5 * h;
    h_diag[n - 1] = 0.5 * h;

    Ok(SbpOperators {
        d1,
        h_diag,
        order: 2,
        h,
    })
}

impl SbpOperators {
    pub fn n(&self) -> usize {
        self.h_diag.len()
    }

    pub fn boundary_index(&self, b: Boundary) -> usize {
        match b {
            Boundary::Left => 0,
            Boundary::Right => self.n() - 1,
        }
    }

    pub fn apply_d1(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.d1 * v
    }

    /// ||HD + (HD)ᵀ - B||_max, zero up to round-off by construction.
    pub fn sbp_residual(&self) -> f64 {
        let n = self.n();
        let hd = DMatrix::from_diagonal(&self.h_diag) * &self.d1;
        let mut m = &hd + hd.transpose();
        m[(0, 0)] += 1.0;
        m[(n - 1, n - 1)] -= 1.0;
        m.amax()
    }

    /// Discrete lifting H⁻¹e_b·payload for a scalar unknown: the unique
    /// nodal vector with vᵀH·l(p) = v_b·p for every v.
    pub fn lifting_scalar(&self, b: Boundary, payload: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.n());
        let idx = self.boundary_index(b);
        out[idx] = payload / self.h_diag[idx];
        out
    }

    /// Discrete lifting for a system state stored node-major
    /// (u[i*n_comp + c]); payload is the per-component vector at the
    /// boundary node.
    pub fn lifting_apply(
        &self,
        b: Boundary,
        payload: &DVector<f64>,
        n_comp: usize,
    ) -> DVector<f64> {
        let mut out = DVector::zeros(self.n() * n_comp);
        let idx = self.boundary_index(b);
        for c in 0..n_comp {
            out[idx * n_comp + c] = payload[c] / self.h_diag[idx];
        }
        out
    }

    /// Σ_i H_ii u_iᵀ P u_i, the discrete counterpart of ∫ UᵀPU dx.
    pub fn discrete_energy(
        &self,
        p: &DMatrix<f64>,
        u: &DVector<f64>,
        n_comp: usize,
    ) -> Result<f64, SbpError> {
        let n = self.n();
        if u.len() != n * n_comp {
            return Err(SbpError::Dimension {
                expected: n * n_comp,
                got: u.len(),
            });
        }
        if p.nrows() != n_comp || p.ncols() != n_comp {
            return Err(SbpError::Dimension {
                expected: n_comp,
                got: p.nrows().max(p.ncols()),
            });
        }
        let mut e = 0.0;
        for i in 0..n {
            let ui = u.rows(i * n_comp, n_comp);
            e += self.h_diag[i] * (ui.transpose() * p * ui)[(0, 0)];
        }
        Ok(e)
    }
}
