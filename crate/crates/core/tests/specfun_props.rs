//! Identity-based property checks for the special functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subdiff::specfun::{gamma, gauss_legendre, mittag_leffler};

#[test]
fn gamma_recurrence_random() {
    // Γ(x+1) = x Γ(x) over 1000 random points in (0.1, 50).
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(0.1..50.0);
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        assert!(
            ((lhs - rhs) / rhs).abs() < 1e-11,
            "x={x}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn gamma_duplication_formula() {
    // Γ(1+s) Γ(1/2+s) = 2^{-2s} Γ(1/2) Γ(1+2s) on an s grid in (0,1).
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut s = 0.025f64;
    while s < 1.0 {
        let lhs = gamma(1.0 + s).unwrap() * gamma(0.5 + s).unwrap();
        let rhs = 2.0f64.powf(-2.0 * s) * sqrt_pi * gamma(1.0 + 2.0 * s).unwrap();
        assert!(((lhs - rhs) / rhs).abs() < 1e-10, "s={s}");
        s += 0.025;
    }
}

#[test]
fn mittag_leffler_decay_profile() {
    // E_alpha(-t^alpha) lies in (0,1] and decreases in t on (0,20].
    for &alpha in &[0.25, 0.5, 0.75] {
        let mut prev = 1.0f64;
        let mut t = 0.02f64;
        while t <= 20.0 {
            let v = mittag_leffler(alpha, 1.0, -t.powf(alpha)).unwrap();
            assert!(v > 0.0 && v <= 1.0);
            assert!(v <= prev + 1e-13, "alpha={alpha}, t={t}");
            prev = v;
            t += 0.02;
        }
    }
}

#[test]
fn quadrature_random_polynomials() {
    // A rule of order n integrates random polynomials of degree 2n-1
    // exactly; coefficients drawn from a fixed-seed generator.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for &order in &[3usize, 7, 12, 24] {
        let rule = gauss_legendre(order).unwrap();
        for _ in 0..20 {
            let coeffs: Vec<f64> =
                (0..2 * order).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let poly = |x: f64| {
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            };
            let exact: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    if k % 2 == 0 {
                        2.0 * c / (k as f64 + 1.0)
                    } else {
                        0.0
                    }
                })
                .sum();
            let got = rule.integrate(-1.0, 1.0, poly);
            assert!((got - exact).abs() < 1e-11 * (1.0 + exact.abs()), "order {order}");
        }
    }
}
