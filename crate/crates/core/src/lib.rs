//! Numerical machinery for space-time nonlocal diffusion equations
//! ∂ₜ^α u = D(x,t) L u in one spatial dimension.
//!
//! The Caputo derivative of order α ∈ (0,1) is discretized by the L1
//! scheme on a uniform mesh; the spatial operator L is a symmetric
//! nonnegative weight kernel acting through centered second differences
//! (fractional Laplacian and discrete Laplacian kernels are built in).
//! Implicit marching solves each step either through the contraction map
//! the scheme induces or by direct factorization. Reference solutions,
//! convergence-order estimation and inequality validators round out the
//! toolbox.
//!
//! Module map:
//! * [`specfun`] — Gamma, Mittag-Leffler, Gauss-Legendre quadrature;
//! * [`timefrac`] — time mesh, L1 coefficients, discrete derivatives;
//! * [`spaceop`] — grids, weight kernels, operator apply/assembly;
//! * [`solver`] — implicit marching over the full history;
//! * [`exact`] — closed-form and quadrature reference solutions;
//! * [`analysis`] — error norms, Aitken orders, Grönwall/truncation
//!   validators.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod solver;
pub mod spaceop;
pub mod specfun;
pub mod timefrac;

pub use analysis::{
    aitken_from_errors, aitken_order, fit_log_slope, gronwall_validate, solution_difference,
    sup_error, tech_inequality_check, truncation_probe, DerivativeFlavor, ErrorReport,
    GronwallInstance, GronwallOutcome, OrderEstimate, RefinedParam, RunMeta,
};
pub use error::{Error, Result};
pub use exact::{
    compact_support_solution, green_alpha1_time_derivative, green_function,
    green_selfsimilar_solution, sine_solution, CompactSupportProblem, GreenEvaluator,
    ReferenceSolution,
};
pub use solver::{
    march, march_with, step_direct, step_fixed_point, BoundaryPolicy, CrossCheck, Diffusivity,
    MarchOptions, MarchReport, ProblemSpec, SolutionHistory, StepMethod, StepReport,
};
pub use spaceop::{
    apply, assemble_matrix, discrete_laplacian_kernel, fractional_laplacian_kernel,
    fractional_laplacian_kernel_fourier, Extension, SpatialGrid, WeightKernel,
};
pub use specfun::{gamma, gauss_legendre, log_gamma, mittag_leffler, QuadratureRule};
pub use timefrac::{caputo_l1, riemann_liouville_l1, L1Coefficients, TimeMesh};
