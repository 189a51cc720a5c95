//! Uniform time mesh, L1 convolution coefficients, and discrete Caputo /
//! Riemann-Liouville derivatives acting on stored histories.
//!
//! The discrete Caputo derivative of order α ∈ (0,1) reads
//!
//!   ∂_τ^α yⁿ = τ^{-α}/Γ(2-α) ( yⁿ − b_{n-1} y⁰ − Σ_{k=1}^{n-1} (b_{n-k-1} − b_{n-k}) y^k ),
//!
//! with b_i = (i+1)^{1-α} − i^{1-α}. The Riemann-Liouville variant starts
//! the sum at k = 0 and drops the separate initial-value term. Histories
//! are kept in full: the convolution is dense and every step sees all
//! previous ones.

use crate::error::{Error, Result};
use crate::specfun::gamma;

/// Uniform time grid t_n = n τ, n = 0..=steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMesh {
    tau: f64,
    steps: usize,
}

impl TimeMesh {
    pub fn new(tau: f64, steps: usize) -> Result<Self> {
        if !(tau > 0.0) || steps == 0 {
            return Err(Error::Domain(format!(
                "time mesh needs tau > 0 and steps >= 1 (tau={tau}, steps={steps})"
            )));
        }
        Ok(Self { tau, steps })
    }

    /// Mesh covering [0, horizon] with the step count implied by `tau`.
    pub fn with_horizon(tau: f64, horizon: f64) -> Result<Self> {
        if !(tau > 0.0 && horizon > 0.0) {
            return Err(Error::Domain("horizon and tau must be positive".into()));
        }
        let steps = (horizon / tau).round() as usize;
        if steps == 0 || ((steps as f64) * tau - horizon).abs() > 1e-9 * horizon {
            return Err(Error::Domain(format!(
                "horizon {horizon} is not an integer multiple of tau {tau}"
            )));
        }
        Self::new(tau, steps)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.tau * self.steps as f64
    }

    pub fn t(&self, n: usize) -> f64 {
        self.tau * n as f64
    }
}

/// L1 weights b_i and the scale τ^{-α}/Γ(2-α) for a given mesh.
#[derive(Debug, Clone)]
pub struct L1Coefficients {
    alpha: f64,
    b: Vec<f64>,
    diffs: Vec<f64>,
    scale: f64,
}

impl L1Coefficients {
    /// Coefficients for all steps of `mesh`. Each b_i comes from the closed
    /// formula rather than a recurrence, so no error accumulates along i.
    pub fn new(alpha: f64, mesh: &TimeMesh) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let n = mesh.steps();
        let e = 1.0 - alpha;
        // b_0..b_N: the Riemann-Liouville form at step N reaches b_N.
        let b: Vec<f64> = (0..=n)
            .map(|i| {
                let i = i as f64;
                (i + 1.0).powf(e) - i.powf(e)
            })
            .collect();
        let diffs: Vec<f64> = b.windows(2).map(|w| w[0] - w[1]).collect();
        let scale = mesh.tau().powf(-alpha) / gamma(2.0 - alpha)?;
        Ok(Self { alpha, b, diffs, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Positive differences b_i − b_{i+1}; these multiply the interior
    /// history terms and their positivity is what makes the scheme monotone.
    pub fn diffs(&self) -> &[f64] {
        &self.diffs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Discrete Caputo derivative at the last entry of `history` (y⁰..yⁿ).
pub fn caputo_l1(history: &[f64], coeffs: &L1Coefficients) -> Result<f64> {
    let n = history.len().checked_sub(1).ok_or(Error::InsufficientHistory)?;
    if n == 0 {
        return Err(Error::InsufficientHistory);
    }
    if n >= coeffs.b.len() {
        return Err(Error::Domain(format!(
            "history has {n} steps but coefficients cover only {}",
            coeffs.b.len()
        )));
    }
    // y^n - b_{n-1} y^0 - sum_{k=1}^{n-1} (b_{n-k-1}-b_{n-k}) y^k, compensated.
    let mut sum = history[n] - coeffs.b[n - 1] * history[0];
    let mut comp = 0.0f64;
    for k in 1..n {
        let term = -coeffs.diffs[n - k - 1] * history[k];
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(coeffs.scale * sum)
}

/// Discrete Riemann-Liouville derivative at the last entry of `history`.
pub fn riemann_liouville_l1(history: &[f64], coeffs: &L1Coefficients) -> Result<f64> {
    let n = history.len().checked_sub(1).ok_or(Error::InsufficientHistory)?;
    if n == 0 {
        return Err(Error::InsufficientHistory);
    }
    if n >= coeffs.b.len() {
        return Err(Error::Domain(format!(
            "history has {n} steps but coefficients cover only {}",
            coeffs.b.len()
        )));
    }
    let mut sum = history[n];
    let mut comp = 0.0f64;
    for k in 0..n {
        let term = -coeffs.diffs[n - k - 1] * history[k];
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(coeffs.scale * sum)
}

/// History-term combination used by the implicit solver:
/// b_{n-1} y⁰ + Σ_{k=1}^{n-1} (b_{n-k-1} − b_{n-k}) y^k.
pub(crate) fn history_term(
    coeffs: &L1Coefficients,
    n: usize,
    value_at: impl Fn(usize) -> f64,
) -> f64 {
    let mut sum = coeffs.b[n - 1] * value_at(0);
    let mut comp = 0.0f64;
    for k in 1..n {
        let term = coeffs.diffs[n - k - 1] * value_at(k);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::mittag_leffler;

    fn mesh(tau: f64, steps: usize) -> TimeMesh {
        TimeMesh::new(tau, steps).unwrap()
    }

    #[test]
    fn b_values_alpha_half() {
        let c = L1Coefficients::new(0.5, &mesh(0.1, 8)).unwrap();
        assert!((c.b()[0] - 1.0).abs() < 1e-15);
        assert!((c.b()[1] - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn b_monotone_positive() {
        for &alpha in &[0.1, 0.25, 0.5, 0.77, 0.95] {
            let c = L1Coefficients::new(alpha, &mesh(0.05, 400)).unwrap();
            for w in c.b().windows(2) {
                assert!(w[0] > w[1] && w[1] > 0.0, "alpha={alpha}");
            }
            for &d in c.diffs() {
                assert!(d > 0.0);
            }
        }
    }

    #[test]
    fn alpha_out_of_range() {
        assert!(L1Coefficients::new(1.0, &mesh(0.1, 4)).is_err());
        assert!(L1Coefficients::new(0.0, &mesh(0.1, 4)).is_err());
    }

    #[test]
    fn constant_history_annihilated() {
        let m = mesh(0.125, 32);
        let c = L1Coefficients::new(0.6, &m).unwrap();
        for n in 1..=32 {
            let hist = vec![3.7; n + 1];
            let v = caputo_l1(&hist, &c).unwrap();
            assert!(v.abs() < 1e-11, "n={n}: {v}");
        }
    }

    #[test]
    fn linear_history_is_exact() {
        // L1 equals the Caputo derivative of the piecewise-linear
        // interpolant, which reproduces ∂_t^α t = t^{1-α}/Γ(2-α) exactly.
        let m = mesh(0.05, 40);
        for &alpha in &[0.3, 0.5, 0.8] {
            let c = L1Coefficients::new(alpha, &m).unwrap();
            for n in [1usize, 7, 40] {
                let hist: Vec<f64> = (0..=n).map(|k| m.t(k)).collect();
                let got = caputo_l1(&hist, &c).unwrap();
                let want = m.t(n).powf(1.0 - alpha) / gamma(2.0 - alpha).unwrap();
                assert!((got - want).abs() < 1e-11 * want.max(1.0), "alpha={alpha} n={n}");
            }
        }
    }

    #[test]
    fn eigenfunction_residual_decays_with_tau() {
        // y = E_alpha(-t^alpha) satisfies ∂_t^α y = -y; the discrete defect
        // at fixed t shrinks as tau -> tau/2.
        let alpha = 0.6;
        let t_star = 1.0;
        let mut defects = Vec::new();
        for &steps in &[64usize, 128, 256] {
            let m = mesh(t_star / steps as f64, steps);
            let c = L1Coefficients::new(alpha, &m).unwrap();
            let hist: Vec<f64> = (0..=steps)
                .map(|k| mittag_leffler(alpha, 1.0, -m.t(k).powf(alpha)).unwrap())
                .collect();
            let lhs = caputo_l1(&hist, &c).unwrap();
            defects.push((lhs + hist[steps]).abs());
        }
        assert!(defects[1] < defects[0] && defects[2] < defects[1], "{defects:?}");
    }

    #[test]
    fn riemann_liouville_single_pulse() {
        let m = mesh(0.2, 4);
        let c = L1Coefficients::new(0.4, &m).unwrap();
        let hist = [1.0, 0.0];
        let got = riemann_liouville_l1(&hist, &c).unwrap();
        let want = -c.scale() * (c.b()[0] - c.b()[1]);
        assert!((got - want).abs() < 1e-14);
        assert!(riemann_liouville_l1(&[0.0, 0.0, 0.0], &c).unwrap().abs() < 1e-15);
    }

    #[test]
    fn insufficient_history_rejected() {
        let c = L1Coefficients::new(0.5, &mesh(0.1, 4)).unwrap();
        assert!(matches!(caputo_l1(&[1.0], &c), Err(Error::InsufficientHistory)));
        assert!(matches!(riemann_liouville_l1(&[], &c), Err(Error::InsufficientHistory)));
    }
}
