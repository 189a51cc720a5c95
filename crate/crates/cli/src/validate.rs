//! Runtime validation suites driving the library's invariant checks.
//! Each suite prints one pass/fail line per check; a nonzero count of
//! failures maps to exit code 1.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subdiff::analysis::{
    gronwall_equality_sequence, gronwall_validate, tech_inequality_check, truncation_probe,
    CheckOutcome, DerivativeFlavor, GronwallInstance, GronwallOutcome,
};
use subdiff::error::Result;
use subdiff::solver::{
    march_with, BoundaryPolicy, CrossCheck, Diffusivity, MarchOptions, ProblemSpec, StepMethod,
};
use subdiff::spaceop::{
    apply_with_tol, discrete_laplacian_kernel, fractional_laplacian_kernel,
    fractional_laplacian_kernel_fourier, Extension, SpatialGrid,
};
use subdiff::specfun::{gamma, gauss_legendre, mittag_leffler};
use subdiff::timefrac::{caputo_l1, riemann_liouville_l1, L1Coefficients, TimeMesh};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name: name.to_string(), passed, detail }
}

pub const SUITES: [&str; 5] =
    ["special-functions", "weights", "truncation", "gronwall", "solver-invariants"];

pub fn run_suite(name: &str) -> Result<Vec<CheckResult>> {
    match name {
        "special-functions" => Ok(special_functions()),
        "weights" => Ok(weights()),
        "truncation" => Ok(truncation()),
        "gronwall" => Ok(gronwall()),
        "solver-invariants" => Ok(solver_invariants()),
        "all" => {
            let mut all = Vec::new();
            for s in SUITES {
                all.extend(run_suite(s)?);
            }
            Ok(all)
        }
        other => Err(subdiff::Error::Domain(format!(
            "unknown suite '{other}' (expected one of {SUITES:?} or 'all')"
        ))),
    }
}

fn special_functions() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x: f64 = rng.gen_range(0.1..50.0);
        let rel = ((gamma(x + 1.0).unwrap() - x * gamma(x).unwrap()) / gamma(x + 1.0).unwrap())
            .abs();
        worst = worst.max(rel);
    }
    out.push(check(
        "gamma-recurrence",
        worst < 1e-11,
        format!("worst relative defect {worst:.2e}"),
    ));

    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut worst = 0.0f64;
    let mut s = 0.05;
    while s < 1.0 {
        let lhs = gamma(1.0 + s).unwrap() * gamma(0.5 + s).unwrap();
        let rhs = 2.0f64.powf(-2.0 * s) * sqrt_pi * gamma(1.0 + 2.0 * s).unwrap();
        worst = worst.max(((lhs - rhs) / rhs).abs());
        s += 0.05;
    }
    out.push(check("gamma-duplication", worst < 1e-10, format!("worst {worst:.2e}")));

    let e1 = mittag_leffler(1.0, 1.0, 1.0).unwrap();
    let eh = mittag_leffler(0.5, 1.0, -1.0).unwrap();
    let d1 = (e1 - std::f64::consts::E).abs();
    let dh = (eh - 0.427_583_576_155_807).abs();
    out.push(check(
        "mittag-leffler-oracle-values",
        d1 < 1e-9 && dh < 1e-9,
        format!("|E_1(1)-e| = {d1:.2e}, |E_1/2(-1)-e erfc(1)| = {dh:.2e}"),
    ));

    let mut ok = true;
    for &alpha in &[0.25, 0.5, 0.75] {
        let mut prev = 1.0f64;
        let mut t = 0.1f64;
        while t <= 20.0 {
            let v = mittag_leffler(alpha, 1.0, -t.powf(alpha)).unwrap();
            ok &= v > 0.0 && v <= 1.0 && v <= prev + 1e-13;
            prev = v;
            t += 0.1;
        }
    }
    out.push(check("mittag-leffler-monotone-decay", ok, "t in (0,20]".into()));

    let rule = gauss_legendre(20).unwrap();
    let sum: f64 = rule.weights().iter().sum();
    let int = rule.integrate(-1.0, 1.0, f64::exp);
    let want = std::f64::consts::E - 1.0 / std::f64::consts::E;
    out.push(check(
        "quadrature-invariants",
        (sum - 2.0).abs() < 1e-13 && (int - want).abs() < 1e-13,
        format!("weight sum defect {:.2e}, exp integral defect {:.2e}", (sum - 2.0).abs(), (int - want).abs()),
    ));
    out
}

fn weights() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let k = fractional_laplacian_kernel(0.5, 1.0, 16).unwrap();
    let want = 4.0 / (3.0 * std::f64::consts::PI);
    out.push(check(
        "hand-value-omega1",
        (k.weights()[0] - want).abs() < 1e-12,
        format!("omega_1 = {}", k.weights()[0]),
    ));

    let mut a1 = true;
    for &s in &[0.25, 0.6, 0.9] {
        let k = fractional_laplacian_kernel(s, 0.25, 256).unwrap();
        a1 &= k.weights().iter().all(|w| *w >= 0.0) && k.total_sum().is_finite();
    }
    out.push(check("assumption-a1", a1, "nonnegativity and summability".into()));

    let s = 0.75;
    let moments: Vec<f64> = (3..=8)
        .map(|p| {
            let h = 2.0f64.powi(-p);
            let k_max = (8.0 / h).ceil() as usize;
            fractional_laplacian_kernel(s, h, k_max).unwrap().moment_constant()
        })
        .collect();
    let ratio = moments.iter().cloned().fold(f64::MIN, f64::max)
        / moments.iter().cloned().fold(f64::MAX, f64::min);
    out.push(check(
        "assumption-a2-moment-stable",
        ratio < 2.0,
        format!("max/min = {ratio:.3} over h in 2^-3..2^-8"),
    ));

    let rule = gauss_legendre(32).unwrap();
    let a = fractional_laplacian_kernel(0.75, 0.5, 60).unwrap();
    let b = fractional_laplacian_kernel_fourier(0.75, 0.5, 60, &rule).unwrap();
    let worst = a
        .weights()
        .iter()
        .zip(b.weights())
        .map(|(x, y)| ((x - y) / x).abs())
        .fold(0.0f64, f64::max);
    out.push(check(
        "gamma-vs-fourier",
        worst < 1e-9,
        format!("worst relative disagreement {worst:.2e} over k <= 60"),
    ));

    let m = 64usize;
    let grid = SpatialGrid::new(std::f64::consts::PI, m).unwrap();
    let kernel = fractional_laplacian_kernel(0.75, grid.spacing(), 4 * m).unwrap();
    let field: Vec<f64> = grid.nodes().iter().map(|x| x.sin()).collect();
    let image = apply_with_tol(&kernel, &grid, &field, &Extension::Periodic, 2.4e-9).unwrap();
    let symbol = (4.0 * (0.5 * grid.spacing()).sin().powi(2)
        / (grid.spacing() * grid.spacing()))
    .powf(0.75);
    let worst = image
        .iter()
        .zip(&field)
        .map(|(v, f)| (v + symbol * f).abs())
        .fold(0.0f64, f64::max);
    out.push(check(
        "discrete-symbol-identity",
        worst < 1e-8,
        format!("sup defect {worst:.2e}"),
    ));
    out
}

fn truncation() -> Vec<CheckResult> {
    let mut out = Vec::new();
    // Commutation identity on 200 random sequences.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let steps = rng.gen_range(3..30usize);
        let tau = rng.gen_range(0.05..0.5f64);
        let alpha = rng.gen_range(0.05..0.95f64);
        let mesh = TimeMesh::new(tau, steps + 1).unwrap();
        let coeffs = L1Coefficients::new(alpha, &mesh).unwrap();
        let f: Vec<f64> = (0..=steps + 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
        for n in 1..=steps {
            let lhs = caputo_l1(&f[..=n + 1], &coeffs).unwrap()
                - caputo_l1(&f[..=n], &coeffs).unwrap();
            let rhs = riemann_liouville_l1(&d[..=n], &coeffs).unwrap();
            worst = worst.max((lhs - rhs).abs() / (1.0 + coeffs.scale()));
        }
    }
    out.push(check(
        "commutation-identity",
        worst < 1e-12,
        format!("worst scaled defect {worst:.2e} over 200 sequences"),
    ));

    // tau^{1-alpha} rate of the compensated truncation bound.
    for &alpha in &[0.3f64, 0.5, 0.7] {
        let g = gamma(1.0 + alpha).unwrap();
        let y = move |t: f64| t.powf(alpha);
        let dty = move |_t: f64| g;
        let taus: Vec<f64> = (6..=11).map(|p| 2.0f64.powi(-p)).collect();
        let rows = truncation_probe(&y, &dty, alpha, &taus, 1.0).unwrap();
        let comp: Vec<f64> = taus
            .iter()
            .map(|&tau| {
                rows.iter()
                    .filter(|r| r.tau == tau && r.n > 1)
                    .map(|r| r.defect * (r.t_n - tau).powf(1.0 - alpha))
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let slope = subdiff::fit_log_slope(&taus, &comp);
        out.push(check(
            &format!("truncation-rate-alpha-{alpha}"),
            (slope - (1.0 - alpha)).abs() < 0.05,
            format!("compensated slope {slope:.4} vs {}", 1.0 - alpha),
        ));
    }
    out
}

fn gronwall() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for (seed, flavor, label) in [
        (555u64, DerivativeFlavor::Caputo, "gronwall-caputo-100"),
        (556, DerivativeFlavor::RiemannLiouville, "gronwall-riemann-liouville-100"),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = 0usize;
        for _ in 0..100 {
            let alpha = rng.gen_range(0.3..0.9);
            let lambda0: f64 = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) };
            let lambda1 = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) };
            let cap = if lambda0 > 0.0 {
                (lambda0 * gamma(2.0 - alpha).unwrap()).powf(-1.0 / alpha)
                    * rng.gen_range(0.3..0.7)
            } else {
                0.35
            };
            let tau0 = cap.min(0.35);
            let tau = tau0 * rng.gen_range(0.2..0.45);
            let steps = rng.gen_range(10..40usize).min((0.6 / tau) as usize).max(3);
            let forcing: Vec<f64> = (0..steps).map(|_| rng.gen_range(0.0..2.0)).collect();
            let g_alpha = gamma(alpha).unwrap();
            let mut max_plain = 0.0f64;
            for n in 1..=steps {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += ((n - k) as f64).powf(alpha - 1.0) * forcing[k];
                }
                max_plain = max_plain.max(acc * tau.powf(alpha) / g_alpha);
            }
            let inst = GronwallInstance {
                alpha,
                tau,
                steps,
                lambda0,
                lambda1,
                forcing,
                f1: max_plain,
                f2: 0.0,
                flavor,
                tau0,
            };
            let y = gronwall_equality_sequence(&inst, rng.gen_range(0.0..2.0)).unwrap();
            if !matches!(gronwall_validate(&inst, &y).unwrap(), GronwallOutcome::Holds { .. }) {
                failures += 1;
            }
        }
        out.push(check(label, failures == 0, format!("{failures} bound failures")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(999);
    let mut bad = 0usize;
    for _ in 0..10_000 {
        let b = rng.gen_range(1e-6..10.0f64);
        let a = b + rng.gen_range(0.0..10.0f64);
        let beta = rng.gen_range(1e-6..1.0f64);
        if !matches!(tech_inequality_check(a, b, beta), CheckOutcome::Holds { .. }) {
            bad += 1;
        }
    }
    out.push(check(
        "power-difference-inequality-10000",
        bad == 0,
        format!("{bad} violations"),
    ));
    out
}

fn solver_invariants() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(90210);
    let mut stable = true;
    let mut contract = true;
    let mut agree = true;
    let mut worst_cross = 0.0f64;
    for case in 0..20 {
        let alpha = rng.gen_range(0.2..0.85);
        let s = rng.gen_range(0.35..0.85);
        let half_width = rng.gen_range(1.5..3.0);
        let intervals = 2 * rng.gen_range(6..14usize);
        let grid = SpatialGrid::new(half_width, intervals).unwrap();
        let mesh = TimeMesh::new(rng.gen_range(0.02..0.1), rng.gen_range(6..12usize)).unwrap();
        let k_max = (4.0 * half_width / grid.spacing()).ceil() as usize;
        let kernel = if case % 4 == 0 {
            discrete_laplacian_kernel(grid.spacing()).unwrap()
        } else {
            fractional_laplacian_kernel(s, grid.spacing(), k_max).unwrap()
        };
        let a = rng.gen_range(0.2..2.0);
        let b = rng.gen_range(0.2..2.0);
        let m1 = rng.gen_range(-0.8..0.8);
        let m2 = rng.gen_range(-0.5..0.5);
        let freq = std::f64::consts::PI / half_width;
        let u0: Arc<dyn Fn(f64) -> f64 + Send + Sync> =
            Arc::new(move |x: f64| m1 * (freq * x).sin() + m2 * (2.0 * freq * x).cos());
        let spec = ProblemSpec {
            alpha,
            kernel,
            diffusivity: Diffusivity::SpaceTime(Arc::new(move |x: f64, t: f64| {
                1.0 / (1.0 + a * x * x + b * t * t)
            })),
            initial: u0.clone(),
            grid,
            mesh,
            policy: match case % 3 {
                0 => BoundaryPolicy::FrozenInitial,
                1 => BoundaryPolicy::ZeroIncrements,
                _ => BoundaryPolicy::Periodic,
            },
        };
        let steps = (1..=spec.mesh.steps()).collect();
        let opts = MarchOptions {
            method: StepMethod::Direct,
            cross_check: Some(CrossCheck { steps, fp_max_iter: 200_000 }),
            ..Default::default()
        };
        let (hist, report) = march_with(&spec, &opts).unwrap();
        for n in 0..=spec.mesh.steps() {
            stable &= hist.sup_norm(n) <= report.sup_initial + 1e-10;
        }
        worst_cross = worst_cross.max(report.cross_check_max);
        agree &= report.cross_check_max <= 1e-11;
        // contraction against a shifted twin
        let amp = rng.gen_range(0.05..0.4);
        let u0c = u0.clone();
        let mut spec_v = spec.clone();
        spec_v.initial = Arc::new(move |x: f64| u0c(x) + amp * (freq * x).cos());
        let (hv, _) = march_with(&spec_v, &MarchOptions::default()).unwrap();
        // sup over window and kernel reach of the initial difference is amp
        for n in 0..=spec.mesh.steps() {
            let d = hist
                .frame(n)
                .iter()
                .zip(hv.frame(n))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            contract &= d <= amp + 1e-10;
        }
    }
    out.push(check("stability-20-specs", stable, "sup norm never exceeds initial".into()));
    out.push(check("contraction-20-specs", contract, "pairwise difference bounded".into()));
    out.push(check(
        "fixed-point-vs-direct",
        agree,
        format!("worst step disagreement {worst_cross:.2e}"),
    ));
    out
}
