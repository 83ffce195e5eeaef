//! Scalar and system IBVPs in skew-symmetric split form, advanced in time
//! with strong or weak boundary imposition.
//!
//! The interior discretization -[D(A∘U) + Aᵀ∘(DU)] mirrors the continuous
//! skew-symmetric splitting, so the discrete energy rate is determined by
//! the boundary terms alone: 2uᵀ(H⊗P)·rhs = -(bt_left + bt_right) holds to
//! round-off at every state. Each run records an [`EnergyTrace`] comparing
//! the energy against the external-data bound.
//!
//! Convention: `energy` is the full squared norm uᵀ(H⊗P)u, so all rate
//! columns (energy_rate, bt_*, bound_rate) are in d/dt‖u‖² units; the
//! boundary data enters the bound as 2·GᵀG per boundary.

use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, dvector};
use thiserror::Error;

use crate::bc::{self, BcError, BcKind, BoundaryOperatorSpec, Imposition};
use crate::sbp::{build_sbp_21, Boundary, Grid, SbpError, SbpOperators};
use crate::specmat::{self, MatError, SpectralSplit, SymMatrix};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("wave speed not positive: a={a:.3e} at x={x}, t={t}, u={u:.3e}")]
    Positivity { a: f64, x: f64, t: f64, u: f64 },
    #[error("solution diverged (non-finite state) at step {step}")]
    Divergence { step: usize },
    #[error("strong imposition failed: {detail}")]
    StrongImposition { detail: String },
    #[error("weight matrix P is not positive semi-definite, eigenvalue {min_eig:.3e}")]
    IndefiniteWeight { min_eig: f64 },
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Bc(#[from] BcError),
    #[error(transparent)]
    Sbp(#[from] SbpError),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type SpeedFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type MatFn = Arc<dyn Fn(&DVector<f64>, f64, f64) -> DMatrix<f64> + Send + Sync>;
pub type VecOfTimeFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;
pub type VecOfSpaceFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;
pub type VecSourceFn = Arc<dyn Fn(f64, f64) -> DVector<f64> + Send + Sync>;

/// Scalar IBVP u_t + (a u)_x + a u_x = 0 with a(u, x, t) > 0.
#[derive(Clone)]
pub struct ScalarProblem {
    pub a_fn: SpeedFn,
    /// Initial data f(x).
    pub f: ProfileFn,
    pub g_left: ProfileFn,
    pub g_right: ProfileFn,
    /// Optional manufactured-solution source s(x, t).
    pub source: Option<SourceFn>,
    pub bc_left: BoundaryOperatorSpec,
    pub bc_right: BoundaryOperatorSpec,
    pub grid: Grid,
    pub t_final: f64,
    pub cfl: f64,
}

/// System IBVP P U_t + (A U)_x + Aᵀ U_x = 0 with state stored node-major.
#[derive(Clone)]
pub struct SystemProblem {
    pub n_comp: usize,
    /// Symmetric positive (semi-)definite norm weight.
    pub p_mat: DMatrix<f64>,
    pub a_fn: MatFn,
    pub f_vec: VecOfSpaceFn,
    pub g_left: VecOfTimeFn,
    pub g_right: VecOfTimeFn,
    pub source: Option<VecSourceFn>,
    pub bc_left: BoundaryOperatorSpec,
    pub bc_right: BoundaryOperatorSpec,
    pub grid: Grid,
    pub t_final: f64,
    pub cfl: f64,
}

/// One recorded step of a run. All rate columns are d/dt‖u‖²_P quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub energy: f64,
    pub energy_rate: f64,
    pub bt_left: f64,
    pub bt_right: f64,
    pub bound_rate: f64,
    pub cumulative_bound: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EnergyTrace {
    pub rows: Vec<TraceRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: EnergyTrace,
    pub snapshots: Vec<(f64, DVector<f64>)>,
    pub final_state: DVector<f64>,
}

struct BoundarySummary {
    bt_left: f64,
    bt_right: f64,
    bound_rate: f64,
}

/// Classical four-stage Runge-Kutta step for a generic semi-discrete rate.
pub fn rk4_step<F>(
    rhs: F,
    u: &DVector<f64>,
    t: f64,
    dt: f64,
) -> Result<DVector<f64>, SolveError>
where
    F: Fn(&DVector<f64>, f64) -> Result<DVector<f64>, SolveError>,
{
    let k1 = rhs(u, t)?;
    let k2 = rhs(&(u + &k1 * (dt / 2.0)), t + dt / 2.0)?;
    let k3 = rhs(&(u + &k2 * (dt / 2.0)), t + dt / 2.0)?;
    let k4 = rhs(&(u + &k3 * dt), t + dt)?;
    Ok(u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Boundary term (half-rate convention) of one boundary, plus the active
/// squared data feeding the bound.
fn boundary_total(
    split: &SpectralSplit,
    spec: &BoundaryOperatorSpec,
    u_b: &DVector<f64>,
    g: &DVector<f64>,
) -> Result<(f64, f64), SolveError> {
    let raw = bc::bt_raw(split, u_b)?;
    let total = match spec.imposition {
        Imposition::Strong => raw,
        Imposition::Weak => {
            let sigma = split.sqrt_abs_a_minus.entries();
            let res = bc::boundary_residual(split, &spec.kind, u_b, g)?;
            raw + 2.0 * u_b.dot(&(sigma * res))
        }
    };
    let g_active_sq = active_data_sq(split, &spec.kind, g);
    Ok((total, g_active_sq))
}

fn active_data_sq(split: &SpectralSplit, kind: &BcKind, g: &DVector<f64>) -> f64 {
    match kind {
        BcKind::Generalized { .. } => g.dot(g),
        _ => {
            let ga = split.project_minus(g);
            ga.dot(&ga)
        }
    }
}

/// Safeguarded Newton with bisection fallback inside an expanding bracket.
fn solve_boundary_value<F>(f: F, v0: f64) -> Result<f64, SolveError>
where
    F: Fn(f64) -> Result<f64, SolveError>,
{
    const TOL: f64 = 1e-14;
    let f0 = f(v0)?;
    if f0.abs() <= TOL {
        return Ok(v0);
    }
    // bracket expansion from the current value
    let mut d = 0.5 * (1.0 + v0.abs());
    let (mut lo, mut hi) = (v0 - d, v0 + d);
    let (mut flo, mut fhi) = (f(lo)?, f(hi)?);
    let mut expansions = 0;
    while flo.signum() == fhi.signum() {
        expansions += 1;
        if expansions > 60 {
            return Err(SolveError::StrongImposition {
                detail: format!("no sign change found around v0={v0:.6e}"),
            });
        }
        d *= 2.0;
        lo = v0 - d;
        hi = v0 + d;
        flo = f(lo)?;
        fhi = f(hi)?;
    }
    let mut v = v0.clamp(lo, hi);
    let mut fv = f(v)?;
    for _ in 0..200 {
        if fv.abs() <= TOL || (hi - lo).abs() <= 1e-15 * (1.0 + v.abs()) {
            return Ok(v);
        }
        if fv.signum() == flo.signum() {
            lo = v;
            flo = fv;
        } else {
            hi = v;
        }
        // finite-difference Newton step, safeguarded by the bracket
        let eps = 1e-7 * (1.0 + v.abs());
        let dfv = (f(v + eps)? - f(v - eps)?) / (2.0 * eps);
        let newton = if dfv != 0.0 { v - fv / dfv } else { f64::NAN };
        v = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        fv = f(v)?;
    }
    if fv.abs() <= 1e-9 {
        return Ok(v);
    }
    Err(SolveError::StrongImposition {
        detail: format!("root iteration stalled, residual {fv:.3e}"),
    })
}

/// Shared shape of the two semi-discrete solvers so one driver runs both.
trait Semidiscrete {
    fn rhs(&self, u: &DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError>;
    fn impose_strong(&self, u: DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError>;
    fn energy(&self, u: &DVector<f64>) -> f64;
    fn energy_rate(&self, u: &DVector<f64>, rhs: &DVector<f64>) -> f64;
    fn boundary_summary(&self, u: &DVector<f64>, t: f64) -> Result<BoundarySummary, SolveError>;
    /// Bound rate 2·Σ_b GᵀG at time `t_query`, with the spectral splits
    /// frozen at the state `u`.
    fn bound_rate(&self, u: &DVector<f64>, t_query: f64) -> Result<f64, SolveError>;
    fn max_speed(&self, u: &DVector<f64>, t: f64) -> Result<f64, SolveError>;
    fn initial_state(&self) -> DVector<f64>;
    fn t_final(&self) -> f64;
    fn cfl(&self) -> f64;
    fn h(&self) -> f64;
    fn take_warnings(&self) -> Vec<String>;
}

fn step_imposed<S: Semidiscrete>(
    s: &S,
    u: &DVector<f64>,
    t: f64,
    dt: f64,
) -> Result<DVector<f64>, SolveError> {
    let base = s.impose_strong(u.clone(), t)?;
    let k1 = s.rhs(&base, t)?;
    let u2 = s.impose_strong(&base + &k1 * (dt / 2.0), t + dt / 2.0)?;
    let k2 = s.rhs(&u2, t + dt / 2.0)?;
    let u3 = s.impose_strong(&base + &k2 * (dt / 2.0), t + dt / 2.0)?;
    let k3 = s.rhs(&u3, t + dt / 2.0)?;
    let u4 = s.impose_strong(&base + &k3 * dt, t + dt)?;
    let k4 = s.rhs(&u4, t + dt)?;
    s.impose_strong(&base + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0), t + dt)
}

fn drive<S: Semidiscrete>(s: &S) -> Result<RunOutput, SolveError> {
    let t_final = s.t_final();
    let mut u = s.impose_strong(s.initial_state(), 0.0)?;
    let mut t = 0.0;
    let mut cumulative_bound = s.energy(&u);
    let mut rows = Vec::new();
    let mut snapshots = vec![(0.0, u.clone())];
    let snap_dt = t_final / 10.0;
    let mut next_snap = snap_dt;
    let mut step = 0usize;
    loop {
        let rhs = s.rhs(&u, t)?;
        let summary = s.boundary_summary(&u, t)?;
        let energy = s.energy(&u);
        rows.push(TraceRow {
            t,
            energy,
            energy_rate: s.energy_rate(&u, &rhs),
            bt_left: summary.bt_left,
            bt_right: summary.bt_right,
            bound_rate: summary.bound_rate,
            cumulative_bound,
            violation: energy - cumulative_bound,
        });
        if t >= t_final - 1e-12 * t_final.max(1.0) {
            break;
        }
        let speed = s.max_speed(&u, t)?.max(1e-12);
        let dt = (s.cfl() * s.h() / speed).min(t_final - t);
        let b0 = summary.bound_rate;
        let b1 = s.bound_rate(&u, t + 0.5 * dt)?;
        let b2 = s.bound_rate(&u, t + dt)?;
        cumulative_bound += dt / 6.0 * (b0 + 4.0 * b1 + b2);
        u = step_imposed(s, &u, t, dt)?;
        step += 1;
        if !u.iter().all(|x| x.is_finite()) {
            return Err(SolveError::Divergence { step });
        }
        t += dt;
        if t + 1e-12 >= next_snap && t < t_final {
            snapshots.push((t, u.clone()));
            next_snap += snap_dt;
        }
    }
    snapshots.push((t, u.clone()));
    Ok(RunOutput {
        trace: EnergyTrace {
            rows,
            warnings: s.take_warnings(),
        },
        snapshots,
        final_state: u,
    })
}

fn push_warning_once(store: &Mutex<Vec<String>>, msg: String) {
    let mut w = store.lock().unwrap();
    if !w.iter().any(|m| *m == msg) {
        w.push(msg);
    }
}

// ---------------------------------------------------------------------------
// Scalar solver
// ---------------------------------------------------------------------------

pub struct ScalarSolver {
    pub problem: ScalarProblem,
    pub ops: SbpOperators,
    warnings: Mutex<Vec<String>>,
}

impl ScalarSolver {
    pub fn new(problem: ScalarProblem) -> Result<Self, SolveError> {
        let ops = build_sbp_21(&problem.grid)?;
        Ok(ScalarSolver {
            problem,
            ops,
            warnings: Mutex::new(Vec::new()),
        })
    }

    fn speed_at(&self, u: f64, x: f64, t: f64) -> Result<f64, SolveError> {
        let a = (self.problem.a_fn)(u, x, t);
        if !(a > 0.0) {
            return Err(SolveError::Positivity { a, x, t, u });
        }
        Ok(a)
    }

    fn bc_spec(&self, b: Boundary) -> &BoundaryOperatorSpec {
        match b {
            Boundary::Left => &self.problem.bc_left,
            Boundary::Right => &self.problem.bc_right,
        }
    }

    fn g_at(&self, b: Boundary, t: f64) -> f64 {
        match b {
            Boundary::Left => (self.problem.g_left)(t),
            Boundary::Right => (self.problem.g_right)(t),
        }
    }

    fn boundary_split(&self, u_b: f64, b: Boundary, t: f64) -> Result<SpectralSplit, SolveError> {
        let idx = self.ops.boundary_index(b);
        let x = self.problem.grid.xs[idx];
        let a = self.speed_at(u_b, x, t)?;
        let m = SymMatrix::from_rows(&[vec![b.normal() * a]])?;
        Ok(specmat::split_default(&m)?)
    }

    /// Semi-discrete rate -[D(a∘u) + a∘(Du)] + source + weak SAT terms.
    pub fn rhs(&self, u: &DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError> {
        let n = self.ops.n();
        let xs = &self.problem.grid.xs;
        let mut a = DVector::zeros(n);
        for i in 0..n {
            a[i] = self.speed_at(u[i], xs[i], t)?;
        }
        let flux = DVector::from_fn(n, |i, _| a[i] * u[i]);
        let dflux = self.ops.apply_d1(&flux);
        let du = self.ops.apply_d1(u);
        let mut rhs = DVector::from_fn(n, |i, _| -(dflux[i] + a[i] * du[i]));
        if let Some(src) = &self.problem.source {
            for i in 0..n {
                rhs[i] += src(xs[i], t);
            }
        }
        for b in [Boundary::Left, Boundary::Right] {
            let spec = self.bc_spec(b);
            if spec.imposition != Imposition::Weak {
                continue;
            }
            let idx = self.ops.boundary_index(b);
            let split = self.boundary_split(u[idx], b, t)?;
            let u_b = dvector![u[idx]];
            let g = dvector![self.g_at(b, t)];
            self.warn_on_inactive_data(&split, &spec.kind, &g, b);
            let sigma = split.sqrt_abs_a_minus.entries();
            let res = bc::boundary_residual(&split, &spec.kind, &u_b, &g)?;
            let payload = 2.0 * (sigma * res);
            rhs[idx] -= payload[0] / self.ops.h_diag[idx];
        }
        Ok(rhs)
    }

    fn warn_on_inactive_data(
        &self,
        split: &SpectralSplit,
        kind: &BcKind,
        g: &DVector<f64>,
        b: Boundary,
    ) {
        if matches!(kind, BcKind::Generalized { .. }) {
            return;
        }
        let defect = bc::data_range_defect(split, g);
        if defect > 1e-10 * (1.0 + g.norm()) {
            push_warning_once(
                &self.warnings,
                format!(
                    "boundary data at {b:?} has components outside range(sqrt|A-|); they are inactive"
                ),
            );
        }
    }

    /// Replace the boundary value by the root of b(v) - g(t) = 0 at every
    /// boundary with strong imposition and an ingoing characteristic.
    pub fn impose_strong(&self, mut u: DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError> {
        for b in [Boundary::Left, Boundary::Right] {
            let spec = self.bc_spec(b);
            if spec.imposition != Imposition::Strong {
                continue;
            }
            let idx = self.ops.boundary_index(b);
            let x = self.problem.grid.xs[idx];
            // ingoing only where the outward-normal boundary matrix is negative
            let a0 = self.speed_at(u[idx], x, t)?;
            if b.normal() * a0 >= 0.0 {
                continue;
            }
            let g = self.g_at(b, t);
            let v = match &spec.kind {
                BcKind::ClassicalChar => g,
                BcKind::FluxChar => {
                    solve_boundary_value(|v| Ok(self.speed_at(v, x, t)? * v - g), u[idx])?
                }
                BcKind::SqrtChar => {
                    solve_boundary_value(|v| Ok(self.speed_at(v, x, t)?.sqrt() * v - g), u[idx])?
                }
                BcKind::Generalized { s, .. } => {
                    // full-inflow scalar boundary: A⁺ = 0, R inactive
                    let sg = s[(0, 0)] * g;
                    solve_boundary_value(|v| Ok(self.speed_at(v, x, t)?.sqrt() * v - sg), u[idx])?
                }
            };
            u[idx] = v;
        }
        Ok(u)
    }

    pub fn step_rk4(&self, u: &DVector<f64>, t: f64, dt: f64) -> Result<DVector<f64>, SolveError> {
        step_imposed(self, u, t, dt)
    }

    pub fn energy(&self, u: &DVector<f64>) -> f64 {
        (0..self.ops.n()).map(|i| self.ops.h_diag[i] * u[i] * u[i]).sum()
    }

    pub fn run(&self) -> Result<RunOutput, SolveError> {
        drive(self)
    }
}

impl Semidiscrete for ScalarSolver {
    fn rhs(&self, u: &DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError> {
        ScalarSolver::rhs(self, u, t)
    }

    fn impose_strong(&self, u: DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError> {
        ScalarSolver::impose_strong(self, u, t)
    }

    fn energy(&self, u: &DVector<f64>) -> f64 {
        ScalarSolver::energy(self, u)
    }

    fn energy_rate(&self, u: &DVector<f64>, rhs: &DVector<f64>) -> f64 {
        2.0 * (0..self.ops.n()).map(|i| self.ops.h_diag[i] * u[i] * rhs[i]).sum::<f64>()
    }

    fn boundary_summary(&self, u: &DVector<f64>, t: f64) -> Result<BoundarySummary, SolveError> {
        let mut bts = [0.0; 2];
        let mut bound_rate = 0.0;
        for (k, b) in [Boundary::Left, Boundary::Right].into_iter().enumerate() {
            let idx = self.ops.boundary_index(b);
            let split = self.boundary_split(u[idx], b, t)?;
            let u_b = dvector![u[idx]];
            let g = dvector![self.g_at(b, t)];
            let (total, g_sq) = boundary_total(&split, self.bc_spec(b), &u_b, &g)?;
            bts[k] = 2.0 * total;
            bound_rate += 2.0 * g_sq;
        }
        Ok(BoundarySummary {
            bt_left: bts[0],
            bt_right: bts[1],
            bound_rate,
        })
    }

    fn bound_rate(&self, u: &DVector<f64>, t_query: f64) -> Result<f64, SolveError> {
        let mut rate = 0.0;
        for b in [Boundary::Left, Boundary::Right] {
            let idx = self.ops.boundary_index(b);
            let split = self.boundary_split(u[idx], b, t_query)?;
            let g = dvector![self.g_at(b, t_query)];
            rate += 2.0 * active_data_sq(&split, &self.bc_spec(b).kind, &g);
        }
        Ok(rate)
    }

    fn max_speed(&self, u: &DVector<f64>, t: f64) -> Result<f64, SolveError> {
        let xs = &self.problem.grid.xs;
        let mut s: f64 = 0.0;
        for i in 0..self.ops.n() {
            s = s.max(self.speed_at(u[i], xs[i], t)?);
        }
        Ok(s)
    }

    fn initial_state(&self) -> DVector<f64> {
        DVector::from_fn(self.ops.n(), |i, _| (self.problem.f)(self.problem.grid.xs[i]))
    }

    fn t_final(&self) -> f64 {
        self.problem.t_final
    }

    fn cfl(&self) -> f64 {
        self.problem.cfl
    }

    fn h(&self) -> f64 {
        self.problem.grid.h
    }

    fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut self.warnings.lock().unwrap())
    }
}

// ---------------------------------------------------------------------------
// System solver
// ---------------------------------------------------------------------------

pub struct SystemSolver {
    pub problem: SystemProblem,
    pub ops: SbpOperators,
    p_inv: DMatrix<f64>,
    /// Projector onto the kernel of P when P is only semi-definite.
    p_kernel: Option<DMatrix<f64>>,
    warnings: Mutex<Vec<String>>,
}

impl SystemSolver {
    pub fn new(problem: SystemProblem) -> Result<Self, SolveError> {
        let ops = build_sbp_21(&problem.grid)?;
        let nc = problem.n_comp;
        let p_sym = SymMatrix::symmetrize(&problem.p_mat)?;
        let (t, lambda) = specmat::eig_sym(&p_sym)?;
        let tol = specmat::default_zero_tol(lambda.amax());
        if lambda[0] < -tol {
            return Err(SolveError::IndefiniteWeight { min_eig: lambda[0] });
        }
        let mut inv_diag = DVector::zeros(nc);
        let mut kernel_diag = DVector::zeros(nc);
        let mut singular = false;
        for i in 0..nc {
            if lambda[i] > tol {
                inv_diag[i] = 1.0 / lambda[i];
            } else {
                kernel_diag[i] = 1.0;
                singular = true;
            }
        }
        let p_inv = &t * DMatrix::from_diagonal(&inv_diag) * t.transpose();
        let p_kernel = singular.then(|| &t * DMatrix::from_diagonal(&kernel_diag) * t.transpose());
        Ok(SystemSolver {
            problem,
            ops,
            p_inv,
            p_kernel,
            warnings: Mutex::new(Vec::new()),
        })
    }

    fn bc_spec(&self, b: Boundary) -> &BoundaryOperatorSpec {
        match b {
            Boundary::Left => &self.problem.bc_left,
            Boundary::Right => &self.problem.bc_right,
        }
    }

    fn g_at(&self, b: Boundary, t: f64) -> DVector<f64> {
        match b {
            Boundary::Left => (self.problem.g_left)(t),
            Boundary::Right => (self.problem.g_right)(t),
        }
    }

    fn node(&self, u: &DVector<f64>, i: usize) -> DVector<f64> {
        u.rows(i * self.problem.n_comp, self.problem.n_comp).into_owned()
    }

    fn boundary_split(
        &self,
        u_b: &DVector<f64>,
        b: Boundary,
        t: f64,
    ) -> Result<SpectralSplit, SolveError> {
        let idx = self.ops.boundary_index(b);
        let x = self.problem.grid.xs[idx];
        let a = (self.problem.a_fn)(u_b, x, t);
        let m = SymMatrix::symmetrize(&(b.normal() * a))?;
        Ok(specmat::split_default(&m)?)
    }

    /// Semi-discrete rate P⁻¹·{-[D(A∘U) + Aᵀ∘(DU)] + source - weak SAT}.
    pub fn rhs(&self, u: &DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError> {
        let n = self.ops.n();
        let nc = self.problem.n_comp;
        let xs = &self.problem.grid.xs;
        let mut a_mats = Vec::with_capacity(n);
        let mut flux = DVector::zeros(n * nc);
        for i in 0..n {
            let ui = self.node(u, i);
            let a = (self.problem.a_fn)(&ui, xs[i], t);
            let fi = &a * &ui;
            for c in 0..nc {
                flux[i * nc + c] = fi[c];
            }
            a_mats.push(a);
        }
        // component-wise application of D to flux and state
        let mut dflux = DVector::zeros(n * nc);
        let mut du = DVector::zeros(n * nc);
        for c in 0..nc {
            let fc = DVector::from_fn(n, |i, _| flux[i * nc + c]);
            let uc = DVector::from_fn(n, |i, _| u[i * nc + c]);
            let dfc = self.ops.apply_d1(&fc);
            let duc = self.ops.apply_d1(&uc);
            for i in 0..n {
                dflux[i * nc + c] = dfc[i];
                du[i * nc + c] = duc[i];
            }
        }
        let mut rhs = DVector::zeros(n * nc);
        for i in 0..n {
            let dui = du.rows(i * nc, nc).into_owned();
            let adu = a_mats[i].transpose() * dui;
            for c in 0..nc {
                rhs[i * nc + c] = -(dflux[i * nc + c] + adu[c]);
            }
        }
        if let Some(src) = &self.problem.source {
            for i in 0..n {
                let s = src(xs[i], t);
                for c in 0..nc {
                    rhs[i * nc + c] += s[c];
                }
            }
        }
        for b in [Boundary::Left, Boundary::Right] {
            let spec = self.bc_spec(b);
            if spec.imposition != Imposition::Weak {
                continue;
            }
            let idx = self.ops.boundary_index(b);
            let u_b = self.node(u, idx);
            let split = self.boundary_split(&u_b, b, t)?;
            let g = self.g_at(b, t);
            self.warn_on_inactive_data(&split, &spec.kind, &g, b);
            let sigma = split.sqrt_abs_a_minus.entries();
            let res = bc::boundary_residual(&split, &spec.kind, &u_b, &g)?;
            let payload = 2.0 * (sigma * res);
            for c in 0..nc {
                rhs[idx * nc + c] -= payload[c] / self.ops.h_diag[idx];
            }
        }
        // apply P⁻¹ nodewise; detect rate trapped in the kernel of P
        if let Some(kernel) = &self.p_kernel {
            let mut defect: f64 = 0.0;
            for i in 0..n {
                let ri = rhs.rows(i * nc, nc).into_owned();
                defect = defect.max((kernel * &ri).amax());
            }
            if defect > 1e-12 * (1.0 + rhs.amax()) {
                push_warning_once(
                    &self.warnings,
                    format!(
                        "semi-norm weight: rate has component in ker(P) up to {defect:.3e}; it is discarded"
                    ),
                );
            }
        }
        let mut out = DVector::zeros(n * nc);
        for i in 0..n {
            let ri = rhs.rows(i * nc, nc).into_owned();
            let pi = &self.p_inv * ri;
            for c in 0..nc {
                out[i * nc + c] = pi[c];
            }
        }
        Ok(out)
    }

    fn warn_on_inactive_data(
        &self,
        split: &SpectralSplit,
        kind: &BcKind,
        g: &DVector<f64>,
        b: Boundary,
    ) {
        if matches!(kind, BcKind::Generalized { .. }) {
            return;
        }
        let defect = bc::data_range_defect(split, g);
        if defect > 1e-10 * (1.0 + g.norm()) {
            push_warning_once(
                &self.warnings,
                format!(
                    "boundary data at {b:?} has components outside range(sqrt|A-|); they are inactive"
                ),
            );
        }
    }

    /// Characteristic overwrite: W = TᵀU at the boundary node, the ingoing
    /// slots are replaced per the active condition, U = TW reconstructed.
    /// For solution-dependent A the split and overwrite are fixed-point
    /// iterated to tolerance.
    pub fn impose_strong(&self, mut u: DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError> {
        let nc = self.problem.n_comp;
        for b in [Boundary::Left, Boundary::Right] {
            let spec = self.bc_spec(b);
            if spec.imposition != Imposition::Strong {
                continue;
            }
            let idx = self.ops.boundary_index(b);
            let g = self.g_at(b, t);
            let mut u_b = self.node(&u, idx);
            let mut converged = false;
            for _ in 0..100 {
                let split = self.boundary_split(&u_b, b, t)?;
                if split.n_neg == 0 {
                    converged = true;
                    break;
                }
                let mut w = split.char_vars(&u_b);
                let g_char = split.t.transpose() * &g;
                for i in 0..split.n_neg {
                    let lam = split.lambda[i].abs();
                    w[i] = match &spec.kind {
                        BcKind::ClassicalChar => g_char[i],
                        BcKind::FluxChar => g_char[i] / lam,
                        BcKind::SqrtChar => g_char[i] / lam.sqrt(),
                        BcKind::Generalized { r, s } => {
                            let target = split.t.transpose()
                                * (r * split.sqrt_a_plus.entries() * &u_b + s * &g);
                            target[i] / lam.sqrt()
                        }
                    };
                }
                let u_new = &split.t * w;
                let delta = (&u_new - &u_b).norm();
                u_b = u_new;
                if delta <= 1e-12 * (1.0 + u_b.norm()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(SolveError::StrongImposition {
                    detail: format!("characteristic overwrite did not converge at {b:?}"),
                });
            }
            for c in 0..nc {
                u[idx * nc + c] = u_b[c];
            }
        }
        Ok(u)
    }

    pub fn step_rk4(&self, u: &DVector<f64>, t: f64, dt: f64) -> Result<DVector<f64>, SolveError> {
        step_imposed(self, u, t, dt)
    }

    pub fn energy(&self, u: &DVector<f64>) -> f64 {
        self.ops
            .discrete_energy(&self.problem.p_mat, u, self.problem.n_comp)
            .expect("state and weight dimensions are fixed by construction")
    }

    pub fn run(&self) -> Result<RunOutput, SolveError> {
        drive(self)
    }
}

impl Semidiscrete for SystemSolver {
    fn rhs(&self, u: &DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError> {
        SystemSolver::rhs(self, u, t)
    }

    fn impose_strong(&self, u: DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError> {
        SystemSolver::impose_strong(self, u, t)
    }

    fn energy(&self, u: &DVector<f64>) -> f64 {
        SystemSolver::energy(self, u)
    }

    fn energy_rate(&self, u: &DVector<f64>, rhs: &DVector<f64>) -> f64 {
        let nc = self.problem.n_comp;
        let mut rate = 0.0;
        for i in 0..self.ops.n() {
            let ui = u.rows(i * nc, nc);
            let ri = rhs.rows(i * nc, nc);
            rate += 2.0 * self.ops.h_diag[i] * (ui.transpose() * &self.problem.p_mat * ri)[(0, 0)];
        }
        rate
    }

    fn boundary_summary(&self, u: &DVector<f64>, t: f64) -> Result<BoundarySummary, SolveError> {
        let mut bts = [0.0; 2];
        let mut bound_rate = 0.0;
        for (k, b) in [Boundary::Left, Boundary::Right].into_iter().enumerate() {
            let idx = self.ops.boundary_index(b);
            let u_b = self.node(u, idx);
            let split = self.boundary_split(&u_b, b, t)?;
            let g = self.g_at(b, t);
            let (total, g_sq) = boundary_total(&split, self.bc_spec(b), &u_b, &g)?;
            bts[k] = 2.0 * total;
            bound_rate += 2.0 * g_sq;
        }
        Ok(BoundarySummary {
            bt_left: bts[0],
            bt_right: bts[1],
            bound_rate,
        })
    }

    fn bound_rate(&self, u: &DVector<f64>, t_query: f64) -> Result<f64, SolveError> {
        let mut rate = 0.0;
        for b in [Boundary::Left, Boundary::Right] {
            let idx = self.ops.boundary_index(b);
            let u_b = self.node(u, idx);
            let split = self.boundary_split(&u_b, b, t_query)?;
            let g = self.g_at(b, t_query);
            rate += 2.0 * active_data_sq(&split, &self.bc_spec(b).kind, &g);
        }
        Ok(rate)
    }

    fn max_speed(&self, u: &DVector<f64>, t: f64) -> Result<f64, SolveError> {
        let xs = &self.problem.grid.xs;
        let mut s: f64 = 0.0;
        for i in 0..self.ops.n() {
            let ui = self.node(u, i);
            let a = (self.problem.a_fn)(&ui, xs[i], t);
            let sym = SymMatrix::symmetrize(&a)?;
            let (_, lambda) = specmat::eig_sym(&sym)?;
            let skew = 0.5 * (&a - a.transpose()).norm();
            s = s.max(lambda.amax() + skew);
        }
        Ok(s)
    }

    fn initial_state(&self) -> DVector<f64> {
        let nc = self.problem.n_comp;
        let n = self.ops.n();
        let mut u = DVector::zeros(n * nc);
        for i in 0..n {
            let fi = (self.problem.f_vec)(self.problem.grid.xs[i]);
            for c in 0..nc {
                u[i * nc + c] = fi[c];
            }
        }
        u
    }

    fn t_final(&self) -> f64 {
        self.problem.t_final
    }

    fn cfl(&self) -> f64 {
        self.problem.cfl
    }

    fn h(&self) -> f64 {
        self.problem.grid.h
    }

    fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut self.warnings.lock().unwrap())
    }
}

// ---------------------------------------------------------------------------
// Trace post-processing
// ---------------------------------------------------------------------------

/// Cumulative external-data bound E(0) + ∫ rate dτ over the trace's time
/// points, integrated with the same Simpson weights the driver uses.
pub fn analytic_bound(trace: &EnergyTrace, rate_fn: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(trace.rows.len());
    if trace.rows.is_empty() {
        return out;
    }
    let mut acc = trace.rows[0].energy;
    out.push(acc);
    for w in trace.rows.windows(2) {
        let (t0, t1) = (w[0].t, w[1].t);
        let dt = t1 - t0;
        acc += dt / 6.0 * (rate_fn(t0) + 4.0 * rate_fn(0.5 * (t0 + t1)) + rate_fn(t1));
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct AuditReport {
    pub pass: bool,
    /// max over steps of |energy_rate + bt_left + bt_right| / (1 + |energy_rate|).
    pub max_residual: f64,
    pub worst_t: f64,
    pub tol: f64,
}

/// Checks that the recorded energy rate is determined by the boundary terms
/// alone at every step.
pub fn energy_rate_audit(trace: &EnergyTrace, tol: f64) -> AuditReport {
    let mut max_residual = 0.0;
    let mut worst_t = 0.0;
    for row in &trace.rows {
        let r = (row.energy_rate + row.bt_left + row.bt_right).abs()
            / (1.0 + row.energy_rate.abs());
        if r > max_residual {
            max_residual = r;
            worst_t = row.t;
        }
    }
    AuditReport {
        pass: max_residual <= tol,
        max_residual,
        worst_t,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::{BcKind, Imposition};

    fn weak(kind: BcKind) -> BoundaryOperatorSpec {
        BoundaryOperatorSpec {
            kind,
            imposition: Imposition::Weak,
        }
    }

    fn strong(kind: BcKind) -> BoundaryOperatorSpec {
        BoundaryOperatorSpec {
            kind,
            imposition: Imposition::Strong,
        }
    }

    fn bump(x: f64) -> f64 {
        let z = (x - 0.5) / 0.08;
        let v = (-z * z).exp();
        if v < 1e-14 {
            0.0
        } else {
            v
        }
    }

    fn scalar_problem(a_fn: SpeedFn, bc: BoundaryOperatorSpec, g: ProfileFn) -> ScalarProblem {
        ScalarProblem {
            a_fn,
            f: Arc::new(bump),
            g_left: g,
            g_right: Arc::new(|_| 0.0),
            source: None,
            bc_left: bc.clone(),
            bc_right: bc,
            grid: Grid::new(0.0, 1.0, 101).unwrap(),
            t_final: 0.5,
            cfl: 0.25,
        }
    }

    #[test]
    fn rk4_matches_exponential_decay() {
        let rhs = |u: &DVector<f64>, _t: f64| Ok(-u.clone());
        let u0 = dvector![1.0];
        let dt = 0.1;
        let u1 = rk4_step(rhs, &u0, 0.0, dt).unwrap();
        assert!((u1[0] - (-dt).exp()).abs() < dt.powi(5));
        // rate identically zero keeps the state
        let zero = |_: &DVector<f64>, _: f64| Ok(DVector::zeros(1));
        let u1 = rk4_step(zero, &u0, 0.0, dt).unwrap();
        assert_eq!(u1[0], 1.0);
    }

    #[test]
    fn rk4_temporal_order_is_four() {
        let rhs = |u: &DVector<f64>, _t: f64| Ok(-u.clone());
        let exact = (-1.0f64).exp();
        let mut errs = Vec::new();
        for steps in [10usize, 20, 40] {
            let dt = 1.0 / steps as f64;
            let mut u = dvector![1.0];
            for k in 0..steps {
                u = rk4_step(rhs, &u, k as f64 * dt, dt).unwrap();
            }
            errs.push((u[0] - exact).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 3.8, "observed order {order}");
        let order = (errs[1] / errs[2]).log2();
        assert!(order > 3.8, "observed order {order}");
    }

    #[test]
    fn rhs_zero_state_zero_data_is_zero() {
        let p = scalar_problem(
            Arc::new(|_, _, _| 1.0),
            weak(BcKind::SqrtChar),
            Arc::new(|_| 0.0),
        );
        let s = ScalarSolver::new(ScalarProblem {
            f: Arc::new(|_| 0.0),
            ..p
        })
        .unwrap();
        let u = DVector::zeros(101);
        assert!(s.rhs(&u, 0.3).unwrap().amax() == 0.0);
    }

    #[test]
    fn rhs_linear_reduction_in_the_interior() {
        // a = 1: (au)_x + a u_x = 2 u_x, so the rate is -2 Du away from boundaries
        let p = scalar_problem(
            Arc::new(|_, _, _| 1.0),
            weak(BcKind::SqrtChar),
            Arc::new(|_| 0.0),
        );
        let s = ScalarSolver::new(p).unwrap();
        let u = DVector::from_fn(101, |i, _| bump(i as f64 / 100.0));
        let rhs = s.rhs(&u, 0.0).unwrap();
        let du = s.ops.apply_d1(&u);
        for i in 1..100 {
            assert!((rhs[i] + 2.0 * du[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn semi_discrete_energy_identity_scalar_weak() {
        let p = scalar_problem(
            Arc::new(|u: f64, _, _| 1.0 + u * u),
            weak(BcKind::SqrtChar),
            Arc::new(|t: f64| 0.3 * (std::f64::consts::PI * t).sin().powi(2)),
        );
        let s = ScalarSolver::new(p).unwrap();
        let u = DVector::from_fn(101, |i, _| 0.4 * bump(i as f64 / 100.0) + 0.05);
        let t = 0.37;
        let rhs = ScalarSolver::rhs(&s, &u, t).unwrap();
        let rate = Semidiscrete::energy_rate(&s, &u, &rhs);
        let b = Semidiscrete::boundary_summary(&s, &u, t).unwrap();
        let residual = (rate + b.bt_left + b.bt_right).abs() / (1.0 + rate.abs());
        assert!(residual < 1e-11, "residual {residual:.3e}");
    }

    #[test]
    fn impose_strong_linear_sqrt_gives_g_over_sqrt_a() {
        let a = 4.0;
        let p = scalar_problem(
            Arc::new(move |_, _, _| a),
            strong(BcKind::SqrtChar),
            Arc::new(|_| 0.6),
        );
        let s = ScalarSolver::new(p).unwrap();
        let u = s.impose_strong(DVector::zeros(101), 0.1).unwrap();
        assert!((u[0] - 0.6 / a.sqrt()).abs() < 1e-12);
        // right boundary is outgoing for a > 0: untouched
        assert_eq!(u[100], 0.0);
    }

    #[test]
    fn impose_strong_nonlinear_matches_bisection_oracle() {
        // sqrt(1+v^2) v = 2
        let p = scalar_problem(
            Arc::new(|u: f64, _, _| 1.0 + u * u),
            strong(BcKind::SqrtChar),
            Arc::new(|_| 2.0),
        );
        let s = ScalarSolver::new(p).unwrap();
        let u = s.impose_strong(DVector::zeros(101), 0.0).unwrap();
        // independent bisection oracle
        let f = |v: f64| (1.0 + v * v).sqrt() * v - 2.0;
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((u[0] - 0.5 * (lo + hi)).abs() < 1e-10);
        assert!(f(u[0]).abs() < 1e-11);
    }

    #[test]
    fn impose_strong_zero_data_zeroes_ingoing_characteristics() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]);
        let p = SystemProblem {
            n_comp: 2,
            p_mat: DMatrix::identity(2, 2),
            a_fn: Arc::new(move |_: &DVector<f64>, _, _| a.clone()),
            f_vec: Arc::new(|x: f64| dvector![bump(x), 0.5 * bump(x)]),
            g_left: Arc::new(|_| dvector![0.0, 0.0]),
            g_right: Arc::new(|_| dvector![0.0, 0.0]),
            source: None,
            bc_left: strong(BcKind::SqrtChar),
            bc_right: strong(BcKind::SqrtChar),
            grid: Grid::new(0.0, 1.0, 51).unwrap(),
            t_final: 0.2,
            cfl: 0.25,
        };
        let s = SystemSolver::new(p).unwrap();
        let mut u = Semidiscrete::initial_state(&s);
        // seed nonzero boundary values
        u[0] = 0.7;
        u[1] = -0.4;
        let u = s.impose_strong(u, 0.0).unwrap();
        // left boundary matrix -A = diag(-2,3): ingoing slot is component 1
        assert!(u[0].abs() < 1e-12);
        assert!((u[1] + 0.4).abs() < 1e-12);
    }

    #[test]
    fn run_zero_data_keeps_zero_energy() {
        let p = scalar_problem(
            Arc::new(|_, _, _| 1.0),
            weak(BcKind::SqrtChar),
            Arc::new(|_| 0.0),
        );
        let p = ScalarProblem {
            f: Arc::new(|_| 0.0),
            t_final: 0.2,
            ..p
        };
        let out = ScalarSolver::new(p).unwrap().run().unwrap();
        for row in &out.trace.rows {
            assert_eq!(row.energy, 0.0);
            assert_eq!(row.energy_rate, 0.0);
        }
    }

    #[test]
    fn run_conserves_energy_with_zero_data_sqrtchar() {
        let p = scalar_problem(
            Arc::new(|u: f64, _, _| 1.0 + u * u),
            weak(BcKind::SqrtChar),
            Arc::new(|_| 0.0),
        );
        let out = ScalarSolver::new(p).unwrap().run().unwrap();
        let e0 = out.trace.rows[0].energy;
        let mut prev = e0;
        for row in &out.trace.rows {
            assert!(row.energy <= prev + 1e-10 * e0.max(1.0), "t={}", row.t);
            prev = row.energy;
        }
    }

    #[test]
    fn energy_rate_audit_passes_weak_and_fails_corrupted_trace() {
        let p = scalar_problem(
            Arc::new(|u: f64, _, _| 1.0 + u * u),
            weak(BcKind::SqrtChar),
            Arc::new(|t: f64| 0.3 * (std::f64::consts::PI * t).sin().powi(2)),
        );
        let out = ScalarSolver::new(p).unwrap().run().unwrap();
        let audit = energy_rate_audit(&out.trace, 1e-9);
        assert!(audit.pass, "max residual {:.3e}", audit.max_residual);

        // negative control: flip the SAT sign in the recorded boundary term
        let mut corrupted = out.trace.clone();
        for row in &mut corrupted.rows {
            row.bt_left = -row.bt_left;
        }
        assert!(!energy_rate_audit(&corrupted, 1e-9).pass);
    }

    #[test]
    fn analytic_bound_examples() {
        let mut trace = EnergyTrace::default();
        for k in 0..=1000 {
            trace.rows.push(TraceRow {
                t: k as f64 * 1e-3,
                energy: 0.0,
                energy_rate: 0.0,
                bt_left: 0.0,
                bt_right: 0.0,
                bound_rate: 0.0,
                cumulative_bound: 0.0,
                violation: 0.0,
            });
        }
        let b = analytic_bound(&trace, |_| 0.0);
        assert!(b.iter().all(|&x| x == 0.0));
        let b = analytic_bound(&trace, |_| 1.0);
        assert!((b.last().unwrap() - 1.0).abs() < 1e-12);
        // Gaussian-in-time rate vs a fine quadrature oracle
        let g2 = |t: f64| (-((t - 0.5) / 0.1).powi(2)).exp();
        let b = analytic_bound(&trace, g2);
        let mut oracle = 0.0;
        let m = 200_000;
        for k in 0..m {
            let t = (k as f64 + 0.5) / m as f64;
            oracle += g2(t) / m as f64;
        }
        assert!((b.last().unwrap() - oracle).abs() < 1e-8);
    }

    #[test]
    fn system_with_one_component_matches_scalar_solver_bitwise() {
        let g = |t: f64| 0.2 * (std::f64::consts::PI * t).sin().powi(2);
        let scalar = scalar_problem(
            Arc::new(|u: f64, _, _| 1.0 + u * u),
            weak(BcKind::SqrtChar),
            Arc::new(g),
        );
        let system = SystemProblem {
            n_comp: 1,
            p_mat: DMatrix::identity(1, 1),
            a_fn: Arc::new(|u: &DVector<f64>, x, t| {
                DMatrix::from_element(1, 1, (|u: f64, _: f64, _: f64| 1.0 + u * u)(u[0], x, t))
            }),
            f_vec: Arc::new(|x: f64| dvector![bump(x)]),
            g_left: Arc::new(move |t| dvector![g(t)]),
            g_right: Arc::new(|_| dvector![0.0]),
            source: None,
            bc_left: weak(BcKind::SqrtChar),
            bc_right: weak(BcKind::SqrtChar),
            grid: Grid::new(0.0, 1.0, 101).unwrap(),
            t_final: 0.5,
            cfl: 0.25,
        };
        let ss = ScalarSolver::new(scalar).unwrap();
        let sy = SystemSolver::new(system).unwrap();
        let u = DVector::from_fn(101, |i, _| 0.3 * bump(i as f64 / 100.0) + 0.02);
        let r1 = ScalarSolver::rhs(&ss, &u, 0.4).unwrap();
        let r2 = SystemSolver::rhs(&sy, &u, 0.4).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn semi_definite_weight_is_accepted_and_logged() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let p = SystemProblem {
            n_comp: 2,
            p_mat: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            a_fn: Arc::new(move |_: &DVector<f64>, _, _| a.clone()),
            f_vec: Arc::new(|x: f64| dvector![bump(x), 0.2 * bump(x)]),
            g_left: Arc::new(|_| dvector![0.0, 0.0]),
            g_right: Arc::new(|_| dvector![0.0, 0.0]),
            source: None,
            bc_left: weak(BcKind::SqrtChar),
            bc_right: weak(BcKind::SqrtChar),
            grid: Grid::new(0.0, 1.0, 51).unwrap(),
            t_final: 0.05,
            cfl: 0.25,
        };
        let s = SystemSolver::new(p).unwrap();
        let out = s.run().unwrap();
        assert!(out
            .trace
            .warnings
            .iter()
            .any(|w| w.contains("ker(P)")));
        for row in &out.trace.rows {
            assert!(row.energy >= 0.0);
        }
    }

    #[test]
    fn positivity_violation_is_reported() {
        let p = scalar_problem(
            Arc::new(|u: f64, _, _| 1.0 - u * u),
            weak(BcKind::SqrtChar),
            Arc::new(|_| 0.0),
        );
        let s = ScalarSolver::new(p).unwrap();
        let u = DVector::from_element(101, 2.0);
        assert!(matches!(
            ScalarSolver::rhs(&s, &u, 0.0),
            Err(SolveError::Positivity { .. })
        ));
    }
}
