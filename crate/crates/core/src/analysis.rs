//! Error norms, Aitken order estimation, and executable validators for
//! the discrete fractional Grönwall inequalities and the L1 truncation
//! bound.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::ReferenceSolution;
use crate::solver::SolutionHistory;
use crate::specfun::{gamma, mittag_leffler};
use crate::timefrac::{caputo_l1, riemann_liouville_l1, L1Coefficients, TimeMesh};

/// Run metadata attached to error reports.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunMeta {
    pub alpha: f64,
    pub s: f64,
    pub h: f64,
    pub tau: f64,
    pub half_width: f64,
    pub horizon: f64,
}

/// Sup-norm errors of a run against a reference solution.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// max over all nodes and all time steps of |U - u|.
    pub sup_space_time: f64,
    /// max over space at the final time.
    pub sup_at_final: f64,
    /// per-frame sup error, frame 0 included.
    pub per_step: Vec<f64>,
    pub meta: RunMeta,
}

/// Exact maximum of |U - u_exact| over grid nodes and time frames.
pub fn sup_error(history: &SolutionHistory, reference: &ReferenceSolution) -> ErrorReport {
    let grid = history.grid();
    let mesh = history.mesh();
    let per_step: Vec<f64> = history
        .frames()
        .par_iter()
        .enumerate()
        .map(|(n, frame)| {
            let t = mesh.t(n);
            frame
                .iter()
                .enumerate()
                .map(|(j, &v)| (v - reference.eval(grid.node(j), t)).abs())
                .fold(0.0f64, f64::max)
        })
        .collect();
    let sup_space_time = per_step.iter().cloned().fold(0.0f64, f64::max);
    let sup_at_final = *per_step.last().unwrap();
    ErrorReport {
        sup_space_time,
        sup_at_final,
        per_step,
        meta: RunMeta {
            alpha: 0.0,
            s: 0.0,
            h: grid.spacing(),
            tau: mesh.tau(),
            half_width: grid.half_width(),
            horizon: mesh.horizon(),
        },
    }
}

/// Which grid parameter a refinement study varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinedParam {
    Space,
    Time,
}

/// Aitken estimate from one refinement triple.
#[derive(Debug, Clone, Copy)]
pub struct OrderEstimate {
    pub refined: RefinedParam,
    pub coarse_diff: f64,
    pub fine_diff: f64,
    pub p: f64,
}

/// p = log2(d_coarse / d_fine) from the two successive difference norms.
pub fn aitken_order(diff_coarse: f64, diff_fine: f64) -> Result<f64> {
    if !(diff_coarse > 0.0 && diff_fine > 0.0) {
        return Err(Error::DegenerateEstimate(format!(
            "difference norms must be positive, got ({diff_coarse}, {diff_fine})"
        )));
    }
    Ok((diff_coarse / diff_fine).log2())
}

/// Aitken estimate from three errors (or solutions restricted to a common
/// grid) at parameters ε, ε/2, ε/4.
pub fn aitken_from_errors(e0: f64, e1: f64, e2: f64) -> Result<f64> {
    aitken_order((e0 - e1).abs(), (e1 - e2).abs())
}

/// Sup-norm difference of two runs over their common space-time grid.
/// The finer run must refine the coarser one by powers of two in each
/// direction; no interpolation is ever applied.
pub fn solution_difference(coarse: &SolutionHistory, fine: &SolutionHistory) -> Result<f64> {
    let (gc, gf) = (coarse.grid(), fine.grid());
    let (mc, mf) = (coarse.mesh(), fine.mesh());
    if (gc.half_width() - gf.half_width()).abs() > 1e-12 * gc.half_width() {
        return Err(Error::Domain("runs live on different windows".into()));
    }
    if gf.intervals() % gc.intervals() != 0 || mf.steps() % mc.steps() != 0 {
        return Err(Error::Domain("grids do not nest".into()));
    }
    let space_ratio = gf.intervals() / gc.intervals();
    let time_ratio = mf.steps() / mc.steps();
    let diff = (1..=mc.steps())
        .into_par_iter()
        .map(|n| {
            let uc = coarse.frame(n);
            let uf = fine.frame(n * time_ratio);
            uc.iter()
                .enumerate()
                .map(|(j, &v)| (v - uf[j * space_ratio]).abs())
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0f64, f64::max);
    Ok(diff)
}

/// Least-squares slope of ln(y) against ln(x).
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Which discrete derivative a Grönwall instance refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeFlavor {
    Caputo,
    RiemannLiouville,
}

/// Data of one discrete fractional Grönwall inequality instance:
/// ∂_τ^α yⁿ ≤ λ₀ yⁿ + λ₁ y^{n-1} + Fⁿ for 1 ≤ n ≤ N, with the discrete
/// fractional integral of F dominated by F₁ + t_n^{α-1} F₂.
#[derive(Debug, Clone)]
pub struct GronwallInstance {
    pub alpha: f64,
    pub tau: f64,
    pub steps: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    /// Forcing F¹..F^N.
    pub forcing: Vec<f64>,
    pub f1: f64,
    pub f2: f64,
    pub flavor: DerivativeFlavor,
    /// Step threshold τ₀; must satisfy τ₀ < (λ₀ Γ(2-α))^{-1/α} when λ₀ > 0.
    pub tau0: f64,
}

/// Outcome of a Grönwall validation.
#[derive(Debug, Clone)]
pub enum GronwallOutcome {
    /// The hypothesis inequality itself fails, so the lemma does not apply.
    NotApplicable { step: usize, lhs: f64, rhs: f64 },
    /// Bound holds; margin is min over n of (bound - y).
    Holds { margin: f64 },
    /// Bound violated somewhere. Signals an implementation bug: the
    /// inequality is proved for every admissible instance.
    Violated { step: usize, excess: f64 },
}

const GRONWALL_SLACK: f64 = 1e-9;

/// Check hypothesis and conclusion of the discrete fractional Grönwall
/// inequality on a concrete sequence y⁰..y^N.
pub fn gronwall_validate(inst: &GronwallInstance, y: &[f64]) -> Result<GronwallOutcome> {
    if y.len() != inst.steps + 1 || inst.forcing.len() != inst.steps {
        return Err(Error::Domain("sequence/forcing lengths do not match steps".into()));
    }
    if !(inst.alpha > 0.0 && inst.alpha < 1.0) {
        return Err(Error::Domain("alpha must lie in (0,1)".into()));
    }
    if inst.lambda0 > 0.0 {
        let tau0_max = (inst.lambda0 * gamma(2.0 - inst.alpha)?).powf(-1.0 / inst.alpha);
        if inst.tau0 >= tau0_max {
            return Err(Error::Domain(format!(
                "tau0 = {} must stay below (lambda0 Γ(2-α))^(-1/α) = {tau0_max}",
                inst.tau0
            )));
        }
    }
    if inst.tau >= inst.tau0 {
        return Err(Error::Domain("tau must stay below tau0".into()));
    }
    let mesh = TimeMesh::new(inst.tau, inst.steps)?;
    let coeffs = L1Coefficients::new(inst.alpha, &mesh)?;

    // Hypothesis: the differential inequality at every step.
    for n in 1..=inst.steps {
        let d = match inst.flavor {
            DerivativeFlavor::Caputo => caputo_l1(&y[..=n], &coeffs)?,
            DerivativeFlavor::RiemannLiouville => riemann_liouville_l1(&y[..=n], &coeffs)?,
        };
        let rhs = inst.lambda0 * y[n] + inst.lambda1 * y[n - 1] + inst.forcing[n - 1];
        let scale = coeffs.scale().max(1.0);
        if d > rhs + GRONWALL_SLACK * scale {
            return Ok(GronwallOutcome::NotApplicable { step: n, lhs: d, rhs });
        }
    }
    // Hypothesis: the forcing bound (τ^α/Γ(α)) Σ (n-k)^{α-1} F^{k+1} ≤ F1 + t_n^{α-1} F2.
    let alpha = inst.alpha;
    let g_alpha = gamma(alpha)?;
    for n in 1..=inst.steps {
        let mut acc = 0.0;
        for k in 0..n {
            acc += ((n - k) as f64).powf(alpha - 1.0) * inst.forcing[k];
        }
        acc *= inst.tau.powf(alpha) / g_alpha;
        let t_n = mesh.t(n);
        let bound = inst.f1 + t_n.powf(alpha - 1.0) * inst.f2;
        if acc > bound + GRONWALL_SLACK * (1.0 + bound) {
            return Ok(GronwallOutcome::NotApplicable { step: n, lhs: acc, rhs: bound });
        }
    }

    let g2a = gamma(2.0 - alpha)?;
    let m = g_alpha * g2a / (1.0 - inst.lambda0 * inst.tau0.powf(alpha) * g2a);
    let lam = 2.0 * inst.lambda0.max(inst.lambda1) * m;
    // An overflowing Mittag-Leffler value means the bound is astronomically
    // large and holds trivially.
    let ml_or_inf = |a: f64, b: f64, z: f64| -> Result<f64> {
        match mittag_leffler(a, b, z) {
            Ok(v) => Ok(v),
            Err(Error::Accuracy(_)) if z > 0.0 => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    // n = 0 is degenerate (the hypothesis starts at n = 1 and the bound
    // reduces to y⁰ ≤ y⁰); the conclusion is checked from the first step.
    let mut margin = f64::INFINITY;
    for n in 1..=inst.steps {
        let t_n = mesh.t(n);
        let t_pow = t_n.powf(alpha - 1.0);
        let e_aa = ml_or_inf(alpha, alpha, lam * t_n.powf(alpha))?;
        let e_a = ml_or_inf(alpha, 1.0, lam * t_n.powf(alpha))?;
        let bound = match inst.flavor {
            DerivativeFlavor::RiemannLiouville => {
                (y[0] * inst.tau.powf(1.0 - alpha) + m * inst.f2) * g_alpha * e_aa * t_pow
                    + m * e_a * inst.f1
            }
            DerivativeFlavor::Caputo => {
                m * g_alpha * e_aa * inst.f2 * t_pow
                    + e_a / (1.0 - inst.lambda0 * inst.tau0.powf(alpha) * g2a)
                        * (y[0] + g_alpha * g2a * inst.f1)
            }
        };
        let gap = bound + GRONWALL_SLACK * (1.0 + bound.abs()) - y[n];
        if gap < 0.0 {
            return Ok(GronwallOutcome::Violated { step: n, excess: -gap });
        }
        margin = margin.min(gap);
    }

    // Constant-forcing special case: y⁰-anchored corollary bounds.
    if inst.lambda0 == 0.0 && inst.lambda1 == 0.0 {
        let g = inst.forcing.iter().cloned().fold(0.0f64, f64::max);
        for n in 1..=inst.steps {
            let t_n = mesh.t(n);
            let bound = match inst.flavor {
                DerivativeFlavor::Caputo => y[0] + g2a / alpha * t_n.powf(alpha) * g,
                DerivativeFlavor::RiemannLiouville => {
                    y[0] * inst.tau.powf(1.0 - alpha) * t_n.powf(alpha - 1.0)
                        + g2a / alpha * t_n.powf(alpha) * g
                }
            };
            let gap = bound + GRONWALL_SLACK * (1.0 + bound.abs()) - y[n];
            if gap < 0.0 {
                return Ok(GronwallOutcome::Violated { step: n, excess: -gap });
            }
            margin = margin.min(gap);
        }
    }
    Ok(GronwallOutcome::Holds { margin })
}

/// Solve the hypothesis inequality as an equality, producing an admissible
/// sequence for `gronwall_validate`. Returns None when 1 - λ₀ τ^α Γ(2-α)
/// would not be positive.
pub fn gronwall_equality_sequence(inst: &GronwallInstance, y0: f64) -> Result<Vec<f64>> {
    let mesh = TimeMesh::new(inst.tau, inst.steps)?;
    let coeffs = L1Coefficients::new(inst.alpha, &mesh)?;
    let mu0 = inst.lambda0 * inst.tau.powf(inst.alpha) * gamma(2.0 - inst.alpha)?;
    if mu0 >= 1.0 {
        return Err(Error::Domain("lambda0 tau^alpha too large for equality solve".into()));
    }
    let mut y = vec![y0];
    for n in 1..=inst.steps {
        // scale (y^n - hist) = λ₀ y^n + λ₁ y^{n-1} + F^n
        let hist = match inst.flavor {
            DerivativeFlavor::Caputo => crate::timefrac::history_term(&coeffs, n, |k| y[k]),
            DerivativeFlavor::RiemannLiouville => {
                (0..n).map(|k| coeffs.diffs()[n - k - 1] * y[k]).sum()
            }
        };
        let rhs = inst.lambda1 * y[n - 1] + inst.forcing[n - 1];
        let yn = (rhs / coeffs.scale() + hist) / (1.0 - mu0);
        y.push(yn);
    }
    Ok(y)
}

/// One row of a truncation probe: the measured defect of the L1 operator
/// against the analytic Caputo derivative.
#[derive(Debug, Clone, Copy)]
pub struct ProbeRow {
    pub tau: f64,
    pub n: usize,
    pub t_n: f64,
    pub defect: f64,
    /// defect / (t_{n-1}^{α-1} τ^{1-α}), the constant of the n > 1 bound.
    pub fitted_constant: f64,
}

/// Measure |∂_t^α y(t_n) - ∂_τ^α y(t_n)| over a family of meshes.
/// `y` is the function, `dty` its exact Caputo derivative.
pub fn truncation_probe(
    y: &(dyn Fn(f64) -> f64 + Sync),
    dty: &(dyn Fn(f64) -> f64 + Sync),
    alpha: f64,
    taus: &[f64],
    horizon: f64,
) -> Result<Vec<ProbeRow>> {
    let mut rows = Vec::new();
    for &tau in taus {
        let mesh = TimeMesh::with_horizon(tau, horizon)?;
        let coeffs = L1Coefficients::new(alpha, &mesh)?;
        let samples: Vec<f64> = (0..=mesh.steps()).map(|k| y(mesh.t(k))).collect();
        for n in 1..=mesh.steps() {
            let approx = caputo_l1(&samples[..=n], &coeffs)?;
            let t_n = mesh.t(n);
            let defect = (dty(t_n) - approx).abs();
            let fitted = if n > 1 {
                defect / (mesh.t(n - 1).powf(alpha - 1.0) * tau.powf(1.0 - alpha))
            } else {
                defect
            };
            rows.push(ProbeRow { tau, n, t_n, defect, fitted_constant: fitted });
        }
    }
    Ok(rows)
}

/// Outcome of the power-difference inequality check.
#[derive(Debug, Clone, Copy)]
pub enum CheckOutcome {
    Holds { lower_margin: f64, upper_margin: f64 },
    NotApplicable,
}

/// β a^{β-1}(a-b) ≤ a^β - b^β ≤ a^{β-1}(a-b) for a ≥ b > 0, β ∈ (0,1].
pub fn tech_inequality_check(a: f64, b: f64, beta: f64) -> CheckOutcome {
    if !(a >= b && b > 0.0 && beta > 0.0 && beta <= 1.0) {
        return CheckOutcome::NotApplicable;
    }
    let mid = a.powf(beta) - b.powf(beta);
    let lower = beta * a.powf(beta - 1.0) * (a - b);
    let upper = a.powf(beta - 1.0) * (a - b);
    let slack = 1e-12 * (1.0 + a.powf(beta));
    if lower <= mid + slack && mid <= upper + slack {
        CheckOutcome::Holds { lower_margin: mid - lower, upper_margin: upper - mid }
    } else {
        CheckOutcome::NotApplicable
    }
}
