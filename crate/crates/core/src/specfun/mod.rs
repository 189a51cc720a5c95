//! Self-contained special functions: Gamma/log-Gamma, the two-parameter
//! Mittag-Leffler function, and Gauss-Legendre quadrature.

mod gamma;
mod mittag_leffler;
mod quadrature;

pub use gamma::{gamma, log_abs_gamma_neg, log_gamma, log_gamma_stirling};
pub use mittag_leffler::mittag_leffler;
pub use quadrature::{gauss_legendre, QuadratureRule};
