//! Experiment definitions and refinement-study drivers.
//!
//! Five experiments are built in:
//!
//! * `green-alpha1` — operator-only spatial consistency study: the
//!   fractional kernel applied to the self-similar profile G(·,1) against
//!   the exact flow rate ∂_t G(·,1) (the classical-limit reference runs
//!   operator-side because the marching scheme itself requires α < 1);
//! * `sine-eigen` — E_α(-t^α) sin x on a periodic window;
//! * `compact-support` — compactly supported diffusivity and solution;
//! * `variable-diffusivity` — D = (1+x²+t²)^{-1} with a narrow Gaussian,
//!   no closed form, orders estimated by Aitken extrapolation;
//! * `discrete-laplacian` — unit-lattice operator, exact in space.

use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use subdiff::analysis::{solution_difference, sup_error, RefinedParam};
use subdiff::error::{Error, Result};
use subdiff::exact::{
    compact_support_solution, green_alpha1_time_derivative, sine_solution, GreenEvaluator,
    ReferenceSolution,
};
use subdiff::solver::{
    march_with, BoundaryPolicy, CrossCheck, Diffusivity, MarchOptions, ProblemSpec,
    SolutionHistory, StepMethod,
};
use subdiff::spaceop::{
    apply, discrete_laplacian_kernel, fractional_laplacian_kernel, Extension, SpatialGrid,
};
use subdiff::specfun::gauss_legendre;
use subdiff::timefrac::TimeMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    GreenAlpha1,
    SineEigen,
    CompactSupport,
    VariableDiffusivity,
    DiscreteLaplacian,
}

impl ExperimentId {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::GreenAlpha1 => "green-alpha1",
            ExperimentId::SineEigen => "sine-eigen",
            ExperimentId::CompactSupport => "compact-support",
            ExperimentId::VariableDiffusivity => "variable-diffusivity",
            ExperimentId::DiscreteLaplacian => "discrete-laplacian",
        }
    }

    pub fn has_exact_reference(&self) -> bool {
        !matches!(self, ExperimentId::VariableDiffusivity | ExperimentId::DiscreteLaplacian)
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "green-alpha1" => Ok(ExperimentId::GreenAlpha1),
            "sine-eigen" => Ok(ExperimentId::SineEigen),
            "compact-support" => Ok(ExperimentId::CompactSupport),
            "variable-diffusivity" => Ok(ExperimentId::VariableDiffusivity),
            "discrete-laplacian" => Ok(ExperimentId::DiscreteLaplacian),
            other => Err(Error::Domain(format!(
                "unknown experiment '{other}' (expected green-alpha1, sine-eigen, \
                 compact-support, variable-diffusivity or discrete-laplacian)"
            ))),
        }
    }
}

/// One experiment request: base grids plus the refinement plan.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub alpha: f64,
    pub s: f64,
    /// Target spacing; the actual spacing is 2X/M with M = round(2X/h).
    pub h: f64,
    pub tau: f64,
    pub half_width: f64,
    pub horizon: f64,
    pub refinements: usize,
    pub refine: RefinedParam,
    /// Enable the fixed-point/direct cross-check at steps {1, N/2, N}.
    pub cross_check: bool,
}

impl ExperimentConfig {
    /// Desk-scale defaults per experiment; the paper-scale parameters are
    /// noted in the README together with the reduction factors.
    pub fn defaults(id: ExperimentId) -> Self {
        match id {
            ExperimentId::GreenAlpha1 => Self {
                id,
                alpha: 1.0,
                s: 0.75,
                h: 0.125,
                tau: f64::NAN,
                half_width: 10.0,
                horizon: 1.0,
                refinements: 4,
                refine: RefinedParam::Space,
                cross_check: false,
            },
            ExperimentId::SineEigen => Self {
                id,
                alpha: 0.5,
                s: 0.75,
                h: 0.03125,
                tau: 0.0625,
                half_width: 4.0 * std::f64::consts::PI,
                horizon: 1.0,
                refinements: 6,
                refine: RefinedParam::Time,
                cross_check: false,
            },
            ExperimentId::CompactSupport => Self {
                id,
                alpha: 0.5,
                s: 0.75,
                h: 2.0f64.powi(-7),
                tau: 0.125,
                half_width: 2.0,
                horizon: 1.0,
                refinements: 6,
                refine: RefinedParam::Time,
                cross_check: false,
            },
            ExperimentId::VariableDiffusivity => Self {
                id,
                alpha: 0.5,
                s: 0.5,
                h: 0.03125,
                tau: 2.0f64.powi(-7),
                half_width: 4.0,
                horizon: 1.0,
                refinements: 3,
                refine: RefinedParam::Time,
                cross_check: false,
            },
            ExperimentId::DiscreteLaplacian => Self {
                id,
                alpha: 0.5,
                s: 1.0,
                h: 1.0,
                tau: 2.0f64.powi(-7),
                half_width: 32.0,
                horizon: 1.0,
                refinements: 3,
                refine: RefinedParam::Time,
                cross_check: false,
            },
        }
    }

    fn base_intervals(&self) -> usize {
        ((2.0 * self.half_width / self.h).round() as usize).max(2)
    }
}

/// Gaussian with the mass-1 normalization used by the variable-diffusivity
/// and lattice experiments.
pub fn gaussian_initial(eps: f64) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    let norm = 1.0 / (4.0 * std::f64::consts::PI * eps).sqrt();
    Arc::new(move |x: f64| norm * (-x * x / (4.0 * eps)).exp())
}

pub fn inverse_quadratic_diffusivity() -> Diffusivity {
    Diffusivity::SpaceTime(Arc::new(|x: f64, t: f64| 1.0 / (1.0 + x * x + t * t)))
}

/// The marching problem for one refinement level, plus its reference.
fn build_problem(
    cfg: &ExperimentConfig,
    intervals: usize,
    tau: f64,
) -> Result<(ProblemSpec, Option<ReferenceSolution>)> {
    let steps = (cfg.horizon / tau).round() as usize;
    let mesh = TimeMesh::new(cfg.horizon / steps as f64, steps)?;
    match cfg.id {
        ExperimentId::SineEigen => {
            let grid = SpatialGrid::new(cfg.half_width, intervals)?;
            let k_max = (4.0 * cfg.half_width / grid.spacing()).ceil() as usize;
            let kernel = fractional_laplacian_kernel(cfg.s, grid.spacing(), k_max)?;
            let reference = sine_solution(cfg.alpha, cfg.s)?;
            Ok((
                ProblemSpec {
                    alpha: cfg.alpha,
                    kernel,
                    diffusivity: Diffusivity::Constant(1.0),
                    initial: Arc::new(|x: f64| x.sin()),
                    grid,
                    mesh,
                    policy: BoundaryPolicy::Periodic,
                },
                Some(reference),
            ))
        }
        ExperimentId::CompactSupport => {
            let grid = SpatialGrid::new(cfg.half_width, intervals)?;
            let k_max = (4.0 * cfg.half_width / grid.spacing()).ceil() as usize;
            let kernel = fractional_laplacian_kernel(cfg.s, grid.spacing(), k_max)?;
            let problem = compact_support_solution(cfg.alpha, cfg.s)?;
            Ok((
                ProblemSpec {
                    alpha: cfg.alpha,
                    kernel,
                    diffusivity: Diffusivity::SpaceOnly(problem.diffusivity.clone()),
                    initial: problem.initial.clone(),
                    grid,
                    mesh,
                    policy: BoundaryPolicy::FrozenInitial,
                },
                Some(problem.reference),
            ))
        }
        ExperimentId::VariableDiffusivity => {
            let grid = SpatialGrid::new(cfg.half_width, intervals)?;
            let k_max = (4.0 * cfg.half_width / grid.spacing()).ceil() as usize;
            let kernel = fractional_laplacian_kernel(cfg.s, grid.spacing(), k_max)?;
            Ok((
                ProblemSpec {
                    alpha: cfg.alpha,
                    kernel,
                    diffusivity: inverse_quadratic_diffusivity(),
                    initial: gaussian_initial(0.01),
                    grid,
                    mesh,
                    policy: BoundaryPolicy::FrozenInitial,
                },
                None,
            ))
        }
        ExperimentId::DiscreteLaplacian => {
            let grid = SpatialGrid::with_spacing(1.0, (2.0 * cfg.half_width) as usize)?;
            let kernel = discrete_laplacian_kernel(1.0)?;
            Ok((
                ProblemSpec {
                    alpha: cfg.alpha,
                    kernel,
                    diffusivity: inverse_quadratic_diffusivity(),
                    initial: gaussian_initial(0.01),
                    grid,
                    mesh,
                    policy: BoundaryPolicy::FrozenInitial,
                },
                None,
            ))
        }
        ExperimentId::GreenAlpha1 => Err(Error::Domain(
            "green-alpha1 is an operator-only study; it does not march in time".into(),
        )),
    }
}

/// One CSV row of a refinement study.
#[derive(Debug, Clone)]
pub struct LevelRow {
    pub experiment: String,
    pub alpha: f64,
    pub s: f64,
    pub h: f64,
    pub tau: f64,
    pub half_width: f64,
    pub horizon: f64,
    pub error_max: f64,
    pub error_at_final: f64,
    pub order_est: f64,
    pub runtime_seconds: f64,
}

#[derive(Debug, Default)]
pub struct ExperimentOutcome {
    pub rows: Vec<LevelRow>,
    /// Worst fixed-point/direct disagreement across all levels (NaN when
    /// the cross-check was off).
    pub cross_check_max: f64,
    /// (level, message) for levels whose solve failed.
    pub failures: Vec<(usize, String)>,
}

struct LevelOutput {
    h: f64,
    tau: f64,
    error_max: f64,
    error_at_final: f64,
    runtime: f64,
    cross: f64,
    history: Option<SolutionHistory>,
    failure: Option<String>,
}

fn march_level(
    cfg: &ExperimentConfig,
    intervals: usize,
    tau: f64,
    keep_history: bool,
) -> LevelOutput {
    let start = Instant::now();
    let built = build_problem(cfg, intervals, tau);
    let (spec, reference) = match built {
        Ok(v) => v,
        Err(e) => {
            return LevelOutput {
                h: f64::NAN,
                tau,
                error_max: f64::NAN,
                error_at_final: f64::NAN,
                runtime: start.elapsed().as_secs_f64(),
                cross: f64::NAN,
                history: None,
                failure: Some(e.to_string()),
            }
        }
    };
    let n = spec.mesh.steps();
    let opts = MarchOptions {
        method: StepMethod::Auto,
        cross_check: if cfg.cross_check {
            Some(CrossCheck {
                steps: vec![1, (n / 2).max(1), n],
                fp_max_iter: 200_000,
            })
        } else {
            None
        },
        ..Default::default()
    };
    match march_with(&spec, &opts) {
        Ok((history, report)) => {
            let (error_max, error_at_final) = match &reference {
                Some(r) => {
                    let e = sup_error(&history, r);
                    (e.sup_space_time, e.sup_at_final)
                }
                None => (f64::NAN, f64::NAN),
            };
            LevelOutput {
                h: spec.grid.spacing(),
                tau: spec.mesh.tau(),
                error_max,
                error_at_final,
                runtime: start.elapsed().as_secs_f64(),
                cross: if cfg.cross_check { report.cross_check_max } else { f64::NAN },
                history: if keep_history { Some(history) } else { None },
                failure: None,
            }
        }
        Err(e) => LevelOutput {
            h: spec.grid.spacing(),
            tau,
            error_max: f64::NAN,
            error_at_final: f64::NAN,
            runtime: start.elapsed().as_secs_f64(),
            cross: f64::NAN,
            history: None,
            failure: Some(e.to_string()),
        },
    }
}

/// Run the refinement study described by `cfg`. Levels run as independent
/// parallel jobs; a failed level flags its row and the study continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    if cfg.id == ExperimentId::GreenAlpha1 {
        return run_green_alpha1(cfg);
    }
    if cfg.refinements == 0 {
        return Err(Error::Domain("refinement count must be >= 1".into()));
    }
    let base_m = cfg.base_intervals();
    let levels: Vec<(usize, f64)> = (0..cfg.refinements)
        .map(|l| match cfg.refine {
            RefinedParam::Time => (base_m, cfg.tau / 2f64.powi(l as i32)),
            RefinedParam::Space => (base_m << l, cfg.tau),
        })
        .collect();
    let keep = !cfg.id.has_exact_reference();
    let outputs: Vec<LevelOutput> = {
        use rayon::prelude::*;
        levels
            .par_iter()
            .map(|&(m, tau)| march_level(cfg, m, tau, keep))
            .collect()
    };

    let mut outcome = ExperimentOutcome {
        cross_check_max: if cfg.cross_check { 0.0 } else { f64::NAN },
        ..Default::default()
    };
    // For experiments without a closed form, the "errors" are sup-norm
    // differences of successive levels on their common grid.
    let mut diffs: Vec<(f64, f64)> = vec![(f64::NAN, f64::NAN); outputs.len()];
    if keep {
        for l in 1..outputs.len() {
            if let (Some(coarse), Some(fine)) = (&outputs[l - 1].history, &outputs[l].history) {
                let d = solution_difference(coarse, fine)?;
                let n_c = coarse.mesh().steps();
                let ratio_t = fine.mesh().steps() / n_c;
                let ratio_x = fine.grid().intervals() / coarse.grid().intervals();
                let d_final = coarse
                    .frame(n_c)
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| (v - fine.frame(n_c * ratio_t)[j * ratio_x]).abs())
                    .fold(0.0f64, f64::max);
                diffs[l] = (d, d_final);
            }
        }
    }

    for (l, out) in outputs.iter().enumerate() {
        if let Some(msg) = &out.failure {
            outcome.failures.push((l, msg.clone()));
        }
        if cfg.cross_check && out.cross.is_finite() {
            outcome.cross_check_max = outcome.cross_check_max.max(out.cross);
        }
        let (error_max, error_at_final) =
            if keep { diffs[l] } else { (out.error_max, out.error_at_final) };
        let order_est = if keep {
            if l >= 2 && diffs[l - 1].0 > 0.0 && diffs[l].0 > 0.0 {
                (diffs[l - 1].0 / diffs[l].0).log2()
            } else {
                f64::NAN
            }
        } else if l >= 1 && outputs[l - 1].error_max > 0.0 && out.error_max > 0.0 {
            (outputs[l - 1].error_max / out.error_max).log2()
        } else {
            f64::NAN
        };
        outcome.rows.push(LevelRow {
            experiment: cfg.id.name().to_string(),
            alpha: cfg.alpha,
            s: cfg.s,
            h: out.h,
            tau: out.tau,
            half_width: cfg.half_width,
            horizon: cfg.horizon,
            error_max,
            error_at_final,
            order_est,
            runtime_seconds: out.runtime,
        });
    }
    Ok(outcome)
}

/// Operator-only spatial consistency study at α = 1:
/// error(h) = sup_j |L_h G(·,1)(x_j) - ∂_t G(x_j, 1)|.
fn run_green_alpha1(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let rule = gauss_legendre(32)?;
    let x = cfg.half_width;
    // One shared kernel table serves every level; the scaled argument at
    // t = 1 ranges over the extended lattice |x| <= X + k_max h.
    let y_max = 9.0 * x + 2.0;
    let cutoff = (34.0f64).powf(1.0 / (2.0 * cfg.s)).max(2.0);
    let evaluator = Arc::new(GreenEvaluator::new(1.0, cfg.s, &rule, cutoff, y_max, 1e-10)?);

    let base_m = cfg.base_intervals();
    let levels: Vec<usize> = (0..cfg.refinements).map(|l| base_m << l).collect();
    use rayon::prelude::*;
    let per_level: Vec<Result<(f64, f64, f64)>> = levels
        .par_iter()
        .map(|&m| {
            let start = Instant::now();
            let grid = SpatialGrid::new(x, m)?;
            let h = grid.spacing();
            let k_max = (8.0 * x / h).ceil() as usize;
            let kernel = fractional_laplacian_kernel(cfg.s, h, k_max)?;
            // Lattice table of u0 = G(.,1) covering window and exterior reach.
            let lo = -(k_max as i64) - 1;
            let hi = m as i64 + k_max as i64 + 1;
            let values: Vec<f64> = (lo..=hi)
                .into_par_iter()
                .map(|j| {
                    evaluator
                        .evaluate(grid.node(0) + h * j as f64, 1.0)
                        .expect("t = 1 in range")
                })
                .collect();
            let x0 = grid.node(0);
            let lookup = move |xq: f64| {
                let idx = ((xq - x0) / h).round() as i64 - lo;
                values[idx as usize]
            };
            let field: Vec<f64> = (0..=m).map(|j| lookup(grid.node(j))).collect();
            let image = apply(&kernel, &grid, &field, &Extension::Frozen(&lookup))?;
            let err = (0..=m)
                .into_par_iter()
                .map(|j| {
                    let want = green_alpha1_time_derivative(grid.node(j), cfg.s, &rule);
                    (image[j] - want).abs()
                })
                .reduce(|| 0.0f64, f64::max);
            Ok((h, err, start.elapsed().as_secs_f64()))
        })
        .collect();

    let mut outcome = ExperimentOutcome { cross_check_max: f64::NAN, ..Default::default() };
    let mut prev_err = f64::NAN;
    for (l, res) in per_level.into_iter().enumerate() {
        match res {
            Ok((h, err, runtime)) => {
                let order_est = if l >= 1 && prev_err > 0.0 && err > 0.0 {
                    (prev_err / err).log2()
                } else {
                    f64::NAN
                };
                outcome.rows.push(LevelRow {
                    experiment: cfg.id.name().to_string(),
                    alpha: 1.0,
                    s: cfg.s,
                    h,
                    tau: f64::NAN,
                    half_width: cfg.half_width,
                    horizon: cfg.horizon,
                    error_max: err,
                    error_at_final: err,
                    order_est,
                    runtime_seconds: runtime,
                });
                prev_err = err;
            }
            Err(e) => outcome.failures.push((l, e.to_string())),
        }
    }
    Ok(outcome)
}

/// Aitken order estimate in one direction for one (α, s) cell:
/// three nested runs, difference norms on the common grid,
/// p = log2(d_coarse / d_fine).
pub fn aitken_cell(
    cfg: &ExperimentConfig,
    direction: RefinedParam,
) -> Result<(f64, f64, f64, f64)> {
    let base_m = cfg.base_intervals();
    let runs: Vec<(usize, f64)> = (0..3)
        .map(|l| match direction {
            RefinedParam::Time => (base_m, cfg.tau / 2f64.powi(l)),
            RefinedParam::Space => (base_m << l, cfg.tau),
        })
        .collect();
    use rayon::prelude::*;
    let hists: Vec<LevelOutput> = runs
        .par_iter()
        .map(|&(m, tau)| march_level(cfg, m, tau, true))
        .collect();
    for out in &hists {
        if let Some(msg) = &out.failure {
            return Err(Error::Domain(format!("cell run failed: {msg}")));
        }
    }
    let d1 = solution_difference(
        hists[0].history.as_ref().unwrap(),
        hists[1].history.as_ref().unwrap(),
    )?;
    let d2 = solution_difference(
        hists[1].history.as_ref().unwrap(),
        hists[2].history.as_ref().unwrap(),
    )?;
    let p = subdiff::aitken_order(d1, d2)?;
    let cross = hists
        .iter()
        .map(|o| if o.cross.is_finite() { o.cross } else { 0.0 })
        .fold(0.0f64, f64::max);
    Ok((d1, d2, p, cross))
}
