//! Spatial grid, weight kernels for the generic nonlocal operator L_h,
//! and operator application / matrix assembly.

mod kernel;
mod operator;

pub use kernel::{
    discrete_laplacian_kernel, fractional_laplacian_kernel, fractional_laplacian_kernel_fourier,
    WeightKernel,
};
pub use operator::{
    apply, apply_with_tol, assemble_matrix, assemble_matrix_with_tol, AssembledOperator,
    Extension, SpatialGrid,
};
