//! Gamma and log-gamma.
//!
//! Lanczos approximation (g = 7, 9 terms) with reflection for arguments
//! left of 1/2. `log_gamma` is the workhorse for weight assembly, where
//! ratios of huge Gamma values appear; `log_gamma_stirling` provides the
//! asymptotic form used for large arguments.

use crate::error::{Error, Result};

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn lanczos_series(z: f64) -> f64 {
    // z = x - 1 with x >= 0.5
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// Γ(x) for real non-pole arguments.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("gamma of NaN".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Domain(format!("gamma pole at x = {x}")));
    }
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1-x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI / (s * gamma(1.0 - x)?));
    }
    if x > 140.0 {
        // The product form overflows in t^{z+1/2} long before Γ does.
        return Ok(log_gamma(x)?.exp());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(SQRT_TWO_PI * t.powf(z + 0.5) * (-t).exp() * lanczos_series(z))
}

/// ln Γ(x) for x > 0. Stays finite far past the overflow point of Γ itself.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return Ok((std::f64::consts::PI / s).ln() - log_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(SQRT_TWO_PI.ln() + (z + 0.5) * t.ln() - t + lanczos_series(z).ln())
}

/// Stirling series for ln Γ(x), accurate to ~1e-15 relative for x ≥ 30.
pub fn log_gamma_stirling(x: f64) -> f64 {
    debug_assert!(x >= 20.0);
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv / 12.0 * (1.0 - inv2 / 30.0 * (1.0 - 2.0 * inv2 / 7.0 * (1.0 - 0.75 * inv2)));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// ln |Γ(-s)| for s in (0,1), via Γ(-s) = Γ(2-s) / (s (s-1)).
pub fn log_abs_gamma_neg(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("log_abs_gamma_neg wants s in (0,1), got {s}")));
    }
    Ok(log_gamma(2.0 - s)? - (s * (1.0 - s)).ln())
}
