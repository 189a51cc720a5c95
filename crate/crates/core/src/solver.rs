//! Implicit time marching for ∂_τ^α Uⁿ = Dⁿ · L_h Uⁿ.
//!
//! Each step solves the linear system
//!
//!   Uⁿ (1 + c_j d_j) − c_j (W Uⁿ + g)_j = b_{n-1} U⁰ + Σ_k (b_{n-k-1}−b_{n-k}) U^k,
//!
//! with c_j = D(x_j, t_n) Γ(2-α) τ^α, either by the Banach fixed-point
//! iteration (the map is a strict contraction with factor
//! max_j c_j Σω / (1 + c_j d_j) < 1) or by direct LU factorization.
//! The fixed-point route is cheap when the contraction factor is small;
//! once it creeps towards one the direct solver takes over. Both produce
//! the same solution and the acceptance suite cross-checks them.
//!
//! Histories are stored in full: the L1 convolution needs every previous
//! frame, so the cost is O(N²·M) overall. History terms are recomputed
//! fresh each step from the stored frames.

use std::sync::Arc;
use std::sync::Once;

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spaceop::{assemble_matrix_with_tol, AssembledOperator, Extension, SpatialGrid, WeightKernel};
use crate::specfun::gamma;
use crate::timefrac::{history_term, L1Coefficients, TimeMesh};

static FAER_SEQUENTIAL: Once = Once::new();

/// Numeric output must not depend on thread count, so faer's internal
/// parallelism is pinned off; rayon loops in this crate are all
/// deterministic-per-row.
fn pin_faer() {
    FAER_SEQUENTIAL.call_once(|| {
        faer::set_global_parallelism(faer::Parallelism::None);
    });
}

/// Diffusivity D(x,t) ≥ 0. The time-independent variants let the stepper
/// reuse one matrix factorization for the whole march.
#[derive(Clone)]
pub enum Diffusivity {
    Constant(f64),
    SpaceOnly(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    SpaceTime(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Diffusivity {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Diffusivity::Constant(d) => *d,
            Diffusivity::SpaceOnly(f) => f(x),
            Diffusivity::SpaceTime(f) => f(x, t),
        }
    }

    pub fn time_independent(&self) -> bool {
        !matches!(self, Diffusivity::SpaceTime(_))
    }
}

/// Out-of-window policy selection for a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPolicy {
    /// Exterior values held at the initial data (default).
    FrozenInitial,
    /// Weight sum truncated at the window.
    ZeroIncrements,
    /// Indices wrap modulo the window.
    Periodic,
}

/// Full problem description: order, kernel, diffusivity, data and grids.
#[derive(Clone)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub kernel: WeightKernel,
    pub diffusivity: Diffusivity,
    pub initial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub grid: SpatialGrid,
    pub mesh: TimeMesh,
    pub policy: BoundaryPolicy,
}

impl ProblemSpec {
    /// Setup checks: α range, spacing consistency, D ≥ 0 on every node at
    /// every step time.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!(
                "alpha must lie strictly in (0,1), got {}",
                self.alpha
            )));
        }
        if (self.kernel.spacing() - self.grid.spacing()).abs() > 1e-12 * self.grid.spacing() {
            return Err(Error::Domain("kernel/grid spacing mismatch".into()));
        }
        for n in 0..=self.mesh.steps() {
            let t = self.mesh.t(n);
            for j in 0..self.grid.n_nodes() {
                let d = self.diffusivity.eval(self.grid.node(j), t);
                if !(d >= 0.0) {
                    return Err(Error::Domain(format!(
                        "diffusivity negative or NaN at (x={}, t={t}): {d}",
                        self.grid.node(j)
                    )));
                }
            }
        }
        Ok(())
    }

    fn extension(&self) -> Extension<'_> {
        match self.policy {
            BoundaryPolicy::FrozenInitial => Extension::Frozen(&*self.initial),
            BoundaryPolicy::ZeroIncrements => Extension::ZeroIncrements,
            BoundaryPolicy::Periodic => Extension::Periodic,
        }
    }
}

/// Complete stack of frames U⁰..U^N on the spatial grid.
pub struct SolutionHistory {
    frames: Vec<Vec<f64>>,
    grid: SpatialGrid,
    mesh: TimeMesh,
}

impl SolutionHistory {
    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn frame(&self, n: usize) -> &[f64] {
        &self.frames[n]
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn sup_norm(&self, n: usize) -> f64 {
        self.frames[n].iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }
}

/// How one step was solved and how well.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    pub step: usize,
    pub iterations: usize,
    /// Sup-norm linear residual (direct) or last iterate change (fixed point).
    pub residual: f64,
    /// A-priori contraction bound for the step's map T.
    pub contraction_estimate: f64,
    pub used_direct: bool,
}

/// Step-method selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMethod {
    /// Direct when the contraction bound exceeds 0.9 or when a cached
    /// factorization amortizes (time-independent diffusivity); fixed point
    /// when its predicted sweep count undercuts a fresh factorization.
    Auto,
    Direct,
    FixedPoint,
}

/// Cross-check request: at the listed steps, solve again with the other
/// method and record the worst sup-norm disagreement.
#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub steps: Vec<usize>,
    pub fp_max_iter: usize,
}

#[derive(Clone)]
pub struct MarchOptions {
    pub method: StepMethod,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub cross_check: Option<CrossCheck>,
    /// Periodic fold tolerance override (absolute un-folded mass).
    pub fold_tol: Option<f64>,
}

impl Default for MarchOptions {
    fn default() -> Self {
        Self {
            method: StepMethod::Auto,
            fp_tol: 1e-12,
            fp_max_iter: 500,
            cross_check: None,
            fold_tol: None,
        }
    }
}

/// March summary: per-step reports plus the run-level diagnostics the
/// stability/agreement tests look at.
pub struct MarchReport {
    pub steps: Vec<StepReport>,
    /// Worst fixed-point vs direct disagreement seen at cross-check steps.
    pub cross_check_max: f64,
    /// Sup of |initial data| over window and sampled exterior.
    pub sup_initial: f64,
    /// max_n ‖Uⁿ‖∞ over the march.
    pub max_sup: f64,
}

struct Stepper<'a> {
    spec: &'a ProblemSpec,
    op: AssembledOperator,
    coeffs: L1Coefficients,
    gamma_tau: f64,
    lu_cache: Option<PartialPivLu<f64>>,
    c_cache: Option<Vec<f64>>,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a ProblemSpec, fold_tol: Option<f64>) -> Result<Self> {
        pin_faer();
        let ext = spec.extension();
        let op = match fold_tol {
            Some(tol) => assemble_matrix_with_tol(&spec.kernel, &spec.grid, &ext, tol)?,
            None => crate::spaceop::assemble_matrix(&spec.kernel, &spec.grid, &ext)?,
        };
        let coeffs = L1Coefficients::new(spec.alpha, &spec.mesh)?;
        let gamma_tau = gamma(2.0 - spec.alpha)? * spec.mesh.tau().powf(spec.alpha);
        Ok(Self { spec, op, coeffs, gamma_tau, lu_cache: None, c_cache: None })
    }

    fn c_at(&mut self, n: usize) -> Vec<f64> {
        if self.spec.diffusivity.time_independent() {
            if let Some(c) = &self.c_cache {
                return c.clone();
            }
        }
        let t = self.spec.mesh.t(n);
        let c: Vec<f64> = (0..self.spec.grid.n_nodes())
            .map(|j| self.spec.diffusivity.eval(self.spec.grid.node(j), t) * self.gamma_tau)
            .collect();
        if self.spec.diffusivity.time_independent() {
            self.c_cache = Some(c.clone());
        }
        c
    }

    fn history(&self, frames: &[Vec<f64>], n: usize) -> Vec<f64> {
        let nn = self.op.n();
        (0..nn)
            .into_par_iter()
            .map(|j| history_term(&self.coeffs, n, |k| frames[k][j]))
            .collect()
    }

    fn contraction(&self, c: &[f64]) -> f64 {
        c.iter()
            .zip(self.op.row_sums())
            .zip(self.op.diag_weights())
            .map(|((cj, rs), d)| cj * rs / (1.0 + cj * d))
            .fold(0.0f64, f64::max)
    }

    fn direct(&mut self, c: &[f64], hist: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = self.op.n();
        let rhs = Mat::from_fn(n, 1, |j, _| hist[j] + c[j] * self.op.exterior_term()[j]);
        if self.lu_cache.is_none() || !self.spec.diffusivity.time_independent() {
            let a = Mat::from_fn(n, n, |i, j| {
                let w = -c[i] * self.op.neighbor_row(i)[j];
                if i == j {
                    1.0 + c[i] * self.op.diag_weights()[i] + w
                } else {
                    w
                }
            });
            self.lu_cache = Some(a.partial_piv_lu());
        }
        let x = self.lu_cache.as_ref().unwrap().solve(&rhs);
        let u: Vec<f64> = (0..n).map(|j| x[(j, 0)]).collect();
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Internal(
                "direct step produced non-finite values (singular system?)".into(),
            ));
        }
        // Residual of the scheme equation in its fixed-point normalization.
        let image = self.op.apply_to(&u);
        let residual = (0..n)
            .map(|j| (u[j] - c[j] * image[j] - hist[j]).abs())
            .fold(0.0f64, f64::max);
        Ok((u, residual))
    }

    fn fixed_point(
        &self,
        c: &[f64],
        hist: &[f64],
        start: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<(Vec<f64>, usize, f64, f64)> {
        let n = self.op.n();
        let denom: Vec<f64> = (0..n).map(|j| 1.0 + c[j] * self.op.diag_weights()[j]).collect();
        let mut psi = start.to_vec();
        let mut prev_delta = f64::INFINITY;
        let mut ratio_max: f64 = 0.0;
        for it in 1..=max_iter {
            let next: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|j| {
                    let row = self.op.neighbor_row(j);
                    let mut acc = 0.0;
                    for (w, v) in row.iter().zip(&psi) {
                        acc += w * v;
                    }
                    (c[j] * (acc + self.op.exterior_term()[j]) + hist[j]) / denom[j]
                })
                .collect();
            let delta = next
                .iter()
                .zip(&psi)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            psi = next;
            if prev_delta.is_finite() && prev_delta > 0.0 {
                ratio_max = ratio_max.max(delta / prev_delta);
            }
            prev_delta = delta;
            if delta <= tol {
                return Ok((psi, it, delta, ratio_max));
            }
        }
        Err(Error::NonConvergence { iterations: max_iter, residual: prev_delta })
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

/// March the scheme over the full mesh with default options.
pub fn march(spec: &ProblemSpec) -> Result<SolutionHistory> {
    march_with(spec, &MarchOptions::default()).map(|(h, _)| h)
}

/// March with explicit options, returning per-step reports and diagnostics.
pub fn march_with(spec: &ProblemSpec, opts: &MarchOptions) -> Result<(SolutionHistory, MarchReport)> {
    spec.validate()?;
    let mut stepper = Stepper::new(spec, opts.fold_tol)?;
    let n_steps = spec.mesh.steps();
    let u0: Vec<f64> = (0..spec.grid.n_nodes()).map(|j| (spec.initial)(spec.grid.node(j))).collect();
    let sup_initial = sup(&u0).max(stepper.op.exterior_abs_sup());
    let mut frames = vec![u0];
    let mut reports = Vec::with_capacity(n_steps);
    let mut cross_max = 0.0f64;
    let mut max_sup = sup(&frames[0]);

    for n in 1..=n_steps {
        let c = stepper.c_at(n);
        let hist = stepper.history(&frames, n);
        let contraction = stepper.contraction(&c);
        let use_direct = match opts.method {
            StepMethod::Direct => true,
            StepMethod::FixedPoint => false,
            StepMethod::Auto => {
                if contraction > 0.9 || spec.diffusivity.time_independent() {
                    true
                } else {
                    // Fixed point costs ~sweeps·M² against ~M³/3 for a
                    // fresh factorization.
                    let sweeps = (opts.fp_tol.recip().ln()
                        / (-contraction.ln()).max(1e-3))
                    .ceil();
                    sweeps > (stepper.op.n() as f64) / 3.0
                }
            }
        };
        let step_result: Result<(Vec<f64>, StepReport)> = if use_direct {
            stepper.direct(&c, &hist).map(|(u, residual)| {
                (u, StepReport { step: n, iterations: 0, residual, contraction_estimate: contraction, used_direct: true })
            })
        } else {
            stepper
                .fixed_point(&c, &hist, &frames[n - 1], opts.fp_tol, opts.fp_max_iter)
                .map(|(u, iters, delta, _)| {
                    (u, StepReport { step: n, iterations: iters, residual: delta, contraction_estimate: contraction, used_direct: false })
                })
        };
        let (u, report) = step_result
            .map_err(|e| Error::StepFailed { step: n, source: Box::new(e) })?;

        if let Some(check) = &opts.cross_check {
            if check.steps.contains(&n) {
                // Solve the same step with the other route and compare.
                let other = if use_direct {
                    let l = contraction.min(1.0 - 1e-9);
                    let tol = (1e-11 * (1.0 - l) / l.max(0.5)).clamp(1e-15, 1e-11);
                    stepper
                        .fixed_point(&c, &hist, &frames[n - 1], tol, check.fp_max_iter)
                        .map(|(v, _, _, _)| v)
                } else {
                    stepper.direct(&c, &hist).map(|(v, _)| v)
                };
                let other = other
                    .map_err(|e| Error::StepFailed { step: n, source: Box::new(e) })?;
                let diff = u
                    .iter()
                    .zip(&other)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                cross_max = cross_max.max(diff);
            }
        }

        max_sup = max_sup.max(sup(&u));
        if sup(&u) > sup_initial + 1e-8 * (1.0 + sup_initial) {
            return Err(Error::Internal(format!(
                "stability violated at step {n}: {} > {}",
                sup(&u),
                sup_initial
            )));
        }
        reports.push(report);
        frames.push(u);
    }

    Ok((
        SolutionHistory { frames, grid: spec.grid, mesh: spec.mesh },
        MarchReport { steps: reports, cross_check_max: cross_max, sup_initial, max_sup },
    ))
}

/// One implicit step by the contraction mapping, given U⁰..U^{n-1}.
pub fn step_fixed_point(
    spec: &ProblemSpec,
    history: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, StepReport)> {
    let n = history.len();
    if n == 0 {
        return Err(Error::InsufficientHistory);
    }
    let mut stepper = Stepper::new(spec, None)?;
    let c = stepper.c_at(n);
    let hist = stepper.history(history, n);
    let contraction = stepper.contraction(&c);
    let (u, iters, delta, ratio) =
        stepper.fixed_point(&c, &hist, &history[n - 1], tol, max_iter)?;
    Ok((
        u,
        StepReport {
            step: n,
            iterations: iters,
            residual: delta,
            contraction_estimate: contraction.max(ratio),
            used_direct: false,
        },
    ))
}

/// One implicit step by direct linear solve, given U⁰..U^{n-1}.
pub fn step_direct(spec: &ProblemSpec, history: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = history.len();
    if n == 0 {
        return Err(Error::InsufficientHistory);
    }
    let mut stepper = Stepper::new(spec, None)?;
    let c = stepper.c_at(n);
    let hist = stepper.history(history, n);
    stepper.direct(&c, &hist).map(|(u, _)| u)
}
