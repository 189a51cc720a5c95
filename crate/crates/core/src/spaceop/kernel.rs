//! Symmetric weight kernels ω_k(h) for the nonlocal operator
//! L_h u(x) = Σ_{k≥1} (u(x+kh) + u(x-kh) - 2u(x)) ω_k(h).
//!
//! The fractional-Laplacian kernel comes from powers of the discrete
//! Laplacian and has two independent constructions: the closed Gamma-ratio
//! formula and quadrature of its Fourier integral. Both must agree; the
//! tests hold them to 1e-9 of each other.

use crate::error::{Error, Result};
use crate::specfun::{log_abs_gamma_neg, log_gamma, log_gamma_stirling, QuadratureRule};

/// Switch from Lanczos log-gamma differences to the Stirling form.
const ASYMPTOTIC_K: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
enum KernelForm {
    /// ω_k = h^{-2s} 2^{2s} Γ(1/2+s) Γ(k-s) / (√π |Γ(-s)| Γ(k+1+s)).
    FractionalLaplacian { s: f64 },
    /// ω_1 = 1/h², nothing else.
    DiscreteLaplacian,
    /// Finite table with no analytic continuation (Fourier-built kernels).
    Tabulated,
}

/// Truncated symmetric weight sequence with order metadata and the analytic
/// description needed to account for the un-stored tail.
#[derive(Debug, Clone)]
pub struct WeightKernel {
    weights: Vec<f64>,
    spacing: f64,
    order_r: f64,
    moment_const: f64,
    total_sum: f64,
    form: KernelForm,
}

impl WeightKernel {
    /// Stored weights ω_1 .. ω_{k_max}.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn k_max(&self) -> usize {
        self.weights.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Operator order metadata r ∈ [0,2].
    pub fn order_r(&self) -> f64 {
        self.order_r
    }

    /// Measured Σ_k min{(kh)^r, 1} ω_k at r = `order_r`.
    pub fn moment_constant(&self) -> f64 {
        self.moment_const
    }

    /// Σ_{k≥1} ω_k including the analytic tail where one exists.
    pub fn total_sum(&self) -> f64 {
        self.total_sum
    }

    /// Weight mass beyond the stored table.
    pub fn tail_mass(&self) -> f64 {
        let stored: f64 = self.weights.iter().sum();
        (self.total_sum - stored).max(0.0)
    }

    /// Moment sum Σ min{(kh)^r, 1} ω_k for an arbitrary probe order;
    /// the tail counts with factor one.
    pub fn moment_sum(&self, r: f64) -> f64 {
        let h = self.spacing;
        let mut acc = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            let kh = (i as f64 + 1.0) * h;
            acc += kh.powf(r).min(1.0) * w;
        }
        acc + self.tail_mass()
    }

    /// ω_k for any k ≥ 1, continuing past the stored table by the exact
    /// ratio recurrence ω_{k+1} = ω_k (k-s)/(k+1+s) where the form allows.
    pub(crate) fn stream(&self) -> WeightStream<'_> {
        WeightStream { kernel: self, k: 0, last: 0.0 }
    }
}

pub(crate) struct WeightStream<'a> {
    kernel: &'a WeightKernel,
    k: usize,
    last: f64,
}

impl Iterator for WeightStream<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        self.k += 1;
        let k = self.k;
        let stored = self.kernel.weights.len();
        if k <= stored {
            self.last = self.kernel.weights[k - 1];
            return Some(self.last);
        }
        match self.kernel.form {
            KernelForm::FractionalLaplacian { s } => {
                let kf = (k - 1) as f64;
                self.last *= (kf - s) / (kf + 1.0 + s);
                Some(self.last)
            }
            KernelForm::DiscreteLaplacian | KernelForm::Tabulated => Some(0.0),
        }
    }
}

fn check_nonnegative(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Domain(
            "kernel weights must be finite and nonnegative".into(),
        ));
    }
    Ok(())
}

fn fractional_moment(weights: &[f64], h: f64, r: f64, tail: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        let kh = (i as f64 + 1.0) * h;
        acc += kh.powf(r).min(1.0) * w;
    }
    acc + tail
}

/// Fractional-Laplacian weights of order 2s via the Gamma-ratio formula,
/// evaluated in log space. Above `ASYMPTOTIC_K` the Stirling form of
/// ln Γ replaces the Lanczos evaluation.
pub fn fractional_laplacian_kernel(s: f64, h: f64, k_max: usize) -> Result<WeightKernel> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!(
            "fractional order s must lie strictly in (0,1), got {s}"
        )));
    }
    if !(h > 0.0) || k_max == 0 {
        return Err(Error::Domain("need h > 0 and k_max >= 1".into()));
    }
    // ln of the k-independent prefactor h^{-2s} 2^{2s} Γ(1/2+s) / (√π |Γ(-s)|).
    let ln_pref = -2.0 * s * h.ln() + 2.0 * s * 2.0f64.ln() + log_gamma(0.5 + s)?
        - 0.5 * std::f64::consts::PI.ln()
        - log_abs_gamma_neg(s)?;
    let ratio_ln = |k: f64| -> Result<f64> {
        if k as usize >= ASYMPTOTIC_K {
            Ok(log_gamma_stirling(k - s) - log_gamma_stirling(k + 1.0 + s))
        } else {
            Ok(log_gamma(k - s)? - log_gamma(k + 1.0 + s)?)
        }
    };
    let mut weights = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        weights.push((ln_pref + ratio_ln(k as f64)?).exp());
    }
    check_nonnegative(&weights)?;
    // Σ_{k≥1} Γ(k-s)/Γ(k+1+s) = Γ(1-s)/(2s Γ(1+s)) gives the closed total.
    let total_sum =
        (ln_pref + log_gamma(1.0 - s)? - (2.0 * s).ln() - log_gamma(1.0 + s)?).exp();
    let stored: f64 = weights.iter().sum();
    let tail = (total_sum - stored).max(0.0);
    let order_r = (2.0 * s + 0.1).min(2.0);
    let moment_const = fractional_moment(&weights, h, order_r, tail);
    Ok(WeightKernel {
        weights,
        spacing: h,
        order_r,
        moment_const,
        total_sum,
        form: KernelForm::FractionalLaplacian { s },
    })
}

/// Same weights from the Fourier integral
/// ω_k = (-1)^{k+1}/(2π h^{2s}) ∫_0^{2π} (4 cos²(x/2))^s e^{ikx} dx.
///
/// The integrand has a |x-π|^{2s} cusp at π, so panels grade geometrically
/// into it; the rule supplied by the caller integrates each panel. The
/// result is checked against a once-refined paneling and rejected if the
/// two disagree beyond 1e-10 relative.
pub fn fractional_laplacian_kernel_fourier(
    s: f64,
    h: f64,
    k_max: usize,
    rule: &QuadratureRule,
) -> Result<WeightKernel> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!(
            "fractional order s must lie strictly in (0,1), got {s}"
        )));
    }
    if !(h > 0.0) || k_max == 0 {
        return Err(Error::Domain("need h > 0 and k_max >= 1".into()));
    }
    let pi = std::f64::consts::PI;
    // Panels on [0, π] grade geometrically into the |x-π|^{2s} cusp and are
    // additionally split so each panel holds at most a couple of periods of
    // cos(kx). The cos factor is even about π with the symbol, so
    // ∫_0^{2π} = 2 ∫_0^π.
    let graded_cuts = |k: usize| -> Vec<f64> {
        let mut cuts = vec![0.0];
        for j in 1..=46 {
            cuts.push(pi * (1.0 - 2.0f64.powi(-j)));
        }
        cuts.push(pi);
        let max_w = (rule.order() as f64 / 4.0) / (k.max(1) as f64);
        let mut split = Vec::with_capacity(cuts.len() * 2);
        for pair in cuts.windows(2) {
            let w = pair[1] - pair[0];
            let pieces = (w / max_w).ceil().max(1.0) as usize;
            for i in 0..pieces {
                split.push(pair[0] + w * i as f64 / pieces as f64);
            }
        }
        split.push(pi);
        split
    };
    let weight_k = |k: usize, cuts: &[f64]| -> f64 {
        // 4 cos²(x/2) rather than 2 + 2 cos x: the latter cancels
        // catastrophically near the cusp at π.
        let integrand = |x: f64| {
            let c = (0.5 * x).cos();
            (4.0 * c * c).powf(s) * ((k as f64) * x).cos()
        };
        let integral = 2.0 * rule.integrate_panels(cuts, integrand);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign / (2.0 * pi * h.powf(2.0 * s)) * integral
    };
    let scale = h.powf(-2.0 * s);
    let mut weights = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let cuts = graded_cuts(k);
        let mut refined = Vec::with_capacity(cuts.len() * 2);
        for pair in cuts.windows(2) {
            refined.push(pair[0]);
            refined.push(0.5 * (pair[0] + pair[1]));
        }
        refined.push(pi);
        let w = weight_k(k, &cuts);
        let w2 = weight_k(k, &refined);
        if (w - w2).abs() > 2e-10 * w2.abs() + 1e-14 * scale {
            return Err(Error::Accuracy(format!(
                "Fourier weight quadrature not converged at k = {k}: {w} vs {w2}"
            )));
        }
        weights.push(w2);
    }
    check_nonnegative(&weights)?;
    let total_sum: f64 = weights.iter().sum();
    let order_r = (2.0 * s + 0.1).min(2.0);
    let moment_const = fractional_moment(&weights, h, order_r, 0.0);
    Ok(WeightKernel {
        weights,
        spacing: h,
        order_r,
        moment_const,
        total_sum,
        form: KernelForm::Tabulated,
    })
}

/// Classical three-point Laplacian: ω_1 = 1/h², ω_k = 0 for k ≥ 2.
pub fn discrete_laplacian_kernel(h: f64) -> Result<WeightKernel> {
    if !(h > 0.0) {
        return Err(Error::Domain("need h > 0".into()));
    }
    let w1 = 1.0 / (h * h);
    Ok(WeightKernel {
        weights: vec![w1],
        spacing: h,
        order_r: 2.0,
        moment_const: (h * h).min(1.0) * w1,
        total_sum: w1,
        form: KernelForm::DiscreteLaplacian,
    })
}
