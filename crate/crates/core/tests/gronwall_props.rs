//! Randomized campaigns for the discrete fractional Grönwall validators
//! and the power-difference inequality. Sequences are produced by solving
//! the hypothesis with equality, so the validators must never report a
//! bound violation: the inequalities are proved, and a failure signals an
//! implementation bug.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subdiff::analysis::{
    gronwall_equality_sequence, gronwall_validate, tech_inequality_check, CheckOutcome,
    DerivativeFlavor, GronwallInstance, GronwallOutcome,
};
use subdiff::specfun::gamma;

fn random_instance(rng: &mut ChaCha8Rng, flavor: DerivativeFlavor) -> GronwallInstance {
    let alpha = rng.gen_range(0.3..0.9);
    let lambda0 = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) };
    let lambda1 = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) };
    let tau0_cap = if lambda0 > 0.0 {
        (lambda0 * gamma(2.0 - alpha).unwrap()).powf(-1.0 / alpha) * rng.gen_range(0.3..0.7)
    } else {
        0.35
    };
    let tau0 = tau0_cap.min(0.35);
    let tau = tau0 * rng.gen_range(0.2..0.45);
    let steps = rng.gen_range(10..40usize);
    // Keep the horizon modest so the Mittag-Leffler bounds stay finite.
    let steps = steps.min((0.6 / tau) as usize).max(3);
    let forcing: Vec<f64> = if rng.gen_bool(0.25) {
        vec![rng.gen_range(0.0..2.0); steps]
    } else {
        (0..steps).map(|_| rng.gen_range(0.0..2.0)).collect()
    };
    // Compute the discrete fractional integral of F and pick an admissible
    // (F1, F2) split.
    let g_alpha = gamma(alpha).unwrap();
    let mut max_plain = 0.0f64;
    let mut max_scaled = 0.0f64;
    for n in 1..=steps {
        let mut acc = 0.0;
        for k in 0..n {
            acc += ((n - k) as f64).powf(alpha - 1.0) * forcing[k];
        }
        acc *= tau.powf(alpha) / g_alpha;
        max_plain = max_plain.max(acc);
        max_scaled = max_scaled.max(acc / (tau * n as f64).powf(alpha - 1.0));
    }
    let (f1, f2) = if rng.gen_bool(0.5) { (max_plain, 0.0) } else { (0.0, max_scaled) };
    GronwallInstance {
        alpha,
        tau,
        steps,
        lambda0,
        lambda1,
        forcing,
        f1,
        f2,
        flavor,
        tau0,
    }
}

#[test]
fn caputo_campaign_100_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    for case in 0..100 {
        let inst = random_instance(&mut rng, DerivativeFlavor::Caputo);
        let y0 = rng.gen_range(0.0..2.0);
        let y = gronwall_equality_sequence(&inst, y0).unwrap();
        assert!(y.iter().all(|v| *v >= 0.0), "case {case}: negative sequence");
        match gronwall_validate(&inst, &y).unwrap() {
            GronwallOutcome::Holds { margin } => {
                assert!(margin >= 0.0, "case {case}: margin {margin}")
            }
            other => panic!("case {case}: {other:?} (alpha={})", inst.alpha),
        }
    }
}

#[test]
fn riemann_liouville_campaign_100_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(556);
    for case in 0..100 {
        let inst = random_instance(&mut rng, DerivativeFlavor::RiemannLiouville);
        let y0 = rng.gen_range(0.0..2.0);
        let y = gronwall_equality_sequence(&inst, y0).unwrap();
        match gronwall_validate(&inst, &y).unwrap() {
            GronwallOutcome::Holds { .. } => {}
            other => panic!("case {case}: {other:?} (alpha={})", inst.alpha),
        }
    }
}

#[test]
fn constant_forcing_simple_bounds() {
    // λ = 0 with constant forcing exercises the corollary bounds
    // y^n <= y0 + Γ(2-α)/α t_n^α G (Caputo) and the τ^{1-α} t_n^{α-1}
    // leading term (Riemann-Liouville).
    let mut rng = ChaCha8Rng::seed_from_u64(557);
    for flavor in [DerivativeFlavor::Caputo, DerivativeFlavor::RiemannLiouville] {
        for case in 0..25 {
            let alpha: f64 = rng.gen_range(0.25..0.9);
            let tau: f64 = rng.gen_range(0.01..0.05);
            let steps = rng.gen_range(8..30usize);
            let g: f64 = rng.gen_range(0.0..3.0);
            let forcing = vec![g; steps];
            let g_alpha = gamma(alpha).unwrap();
            let mut f1 = 0.0f64;
            for n in 1..=steps {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += ((n - k) as f64).powf(alpha - 1.0) * forcing[k];
                }
                f1 = f1.max(acc * tau.powf(alpha) / g_alpha);
            }
            let inst = GronwallInstance {
                alpha,
                tau,
                steps,
                lambda0: 0.0,
                lambda1: 0.0,
                forcing,
                f1,
                f2: 0.0,
                flavor,
                tau0: 0.2,
            };
            let y = gronwall_equality_sequence(&inst, rng.gen_range(0.0..1.0)).unwrap();
            match gronwall_validate(&inst, &y).unwrap() {
                GronwallOutcome::Holds { .. } => {}
                other => panic!("flavor {flavor:?} case {case}: {other:?}"),
            }
        }
    }
}

#[test]
fn hypothesis_violation_detected() {
    // A sequence that grows faster than the hypothesis admits must come
    // back as NotApplicable, not as a bound failure.
    let steps = 10;
    let inst = GronwallInstance {
        alpha: 0.5,
        tau: 0.05,
        steps,
        lambda0: 0.0,
        lambda1: 0.0,
        forcing: vec![0.0; steps],
        f1: 0.0,
        f2: 0.0,
        flavor: DerivativeFlavor::Caputo,
        tau0: 0.2,
    };
    let y: Vec<f64> = (0..=steps).map(|n| (n as f64).exp()).collect();
    match gronwall_validate(&inst, &y).unwrap() {
        GronwallOutcome::NotApplicable { .. } => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn power_difference_inequality_fuzz() {
    // 10^4 random (a, b, beta) triples with a >= b > 0, beta in (0,1].
    let mut rng = ChaCha8Rng::seed_from_u64(999);
    for case in 0..10_000 {
        let b = rng.gen_range(1e-6..10.0f64);
        let a = b + rng.gen_range(0.0..10.0f64);
        let beta = rng.gen_range(1e-6..1.0f64);
        match tech_inequality_check(a, b, beta) {
            CheckOutcome::Holds { .. } => {}
            CheckOutcome::NotApplicable => {
                panic!("case {case}: ({a}, {b}, {beta}) unexpectedly rejected")
            }
        }
    }
}
