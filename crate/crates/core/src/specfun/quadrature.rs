//! Gauss-Legendre rules on (-1, 1).

use crate::error::{Error, Result};

/// Nodes and weights of a Gauss-Legendre rule. Exact for polynomials of
/// degree up to `2 * order - 1`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫_a^b f by mapping the rule onto [a, b]. Compensated accumulation:
    /// kernel-weight integrals are extracted from integrands a million
    /// times their size, so every bit matters.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let term = w * f(mid + half * x);
            let y = term - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        acc * half
    }

    /// Panel-wise integration over a sorted boundary list. Panel results
    /// are accumulated with compensation: oscillatory integrals cancel
    /// across panels and plain summation would cap the attainable accuracy.
    pub fn integrate_panels<F: Fn(f64) -> f64>(&self, boundaries: &[f64], f: F) -> f64 {
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for pair in boundaries.windows(2) {
            let term = self.integrate(pair[0], pair[1], &f);
            let y = term - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        acc
    }
}

/// Legendre P_n and its derivative at x, by upward recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Gauss-Legendre rule of the given order (node count ≥ 1).
///
/// Nodes are Newton-refined roots of P_n to 1e-15; weights are
/// 2 / ((1-x²) P_n'(x)²).
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Domain("quadrature order must be >= 1".into()));
    }
    if order == 1 {
        return Ok(QuadratureRule { nodes: vec![0.0], weights: vec![2.0] });
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n / 2;
    for i in 0..(half + n % 2) {
        // Tricomi-style initial guess, then Newton.
        let mut x =
            (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_and_derivative(n, x);
                x -= p2 / d2;
                dp = d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Roots come out ordered from +1 downwards; mirror them.
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[half] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[half] = 2.0 / (d * d);
    }
    Ok(QuadratureRule { nodes, weights })
}
