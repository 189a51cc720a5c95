//! Spatial grid, boundary policies, operator application and assembly.
//!
//! Out-of-window values are supplied by one of three policies:
//!
//! * `Frozen` — exterior values come from a fixed function (the initial
//!   data in the solver). Exact for problems whose solution never moves
//!   outside the window and the natural default.
//! * `ZeroIncrements` — increments u(x±kh) − u(x) are dropped outside the
//!   window, i.e. the weight sum is truncated.
//! * `Periodic` — indices wrap with period equal to the window width.
//!   Weights are folded onto the window by residue class, so the full
//!   infinite stencil acts on one period.
//!
//! The diagonal always carries the analytically known total weight mass
//! (`Frozen`/`Periodic`), which keeps the far tail of the kernel from
//! polluting convergence measurements.

use rayon::prelude::*;

use super::kernel::WeightKernel;
use crate::error::{Error, Result};

/// Uniform nodes x_j = -X + j h, j = 0..=intervals, with `intervals`·h = 2X.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    half_width: f64,
    spacing: f64,
    intervals: usize,
}

impl SpatialGrid {
    /// Grid over [-half_width, half_width] with the given interval count;
    /// the spacing is derived so the window closes exactly.
    pub fn new(half_width: f64, intervals: usize) -> Result<Self> {
        if !(half_width > 0.0) || intervals < 2 {
            return Err(Error::Domain(format!(
                "grid needs half_width > 0 and at least 2 intervals (X={half_width}, M={intervals})"
            )));
        }
        Ok(Self { half_width, spacing: 2.0 * half_width / intervals as f64, intervals })
    }

    /// Grid built from an exact spacing (lattice problems); the half-width
    /// becomes M·h/2.
    pub fn with_spacing(spacing: f64, intervals: usize) -> Result<Self> {
        if !(spacing > 0.0) || intervals < 2 {
            return Err(Error::Domain("grid needs h > 0 and at least 2 intervals".into()));
        }
        Ok(Self { half_width: 0.5 * spacing * intervals as f64, spacing, intervals })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn n_nodes(&self) -> usize {
        self.intervals + 1
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + self.spacing * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|j| self.node(j)).collect()
    }
}

/// Out-of-window value policy for one operator application.
pub enum Extension<'a> {
    /// Exterior values from a function of x (typically the initial data).
    Frozen(&'a (dyn Fn(f64) -> f64 + Sync)),
    /// Truncate the weight sum at the window edge.
    ZeroIncrements,
    /// Wrap indices modulo the window.
    Periodic,
}

/// Hard cap on streamed tail terms when folding a kernel periodically.
const FOLD_CAP: usize = 30_000_000;

/// Default relative mass left un-folded before the stream stops.
const DEFAULT_FOLD_REL: f64 = 1e-11;

/// Assembled action of L_h on one grid under one policy:
/// (L_h u)_j = Σ_m W[j,m] u_m + g_j − d_j u_j.
pub struct AssembledOperator {
    n: usize,
    neighbor: Vec<f64>,
    diag_weight: Vec<f64>,
    exterior: Vec<f64>,
    row_sums: Vec<f64>,
    exterior_abs_sup: f64,
    fold_remainder: f64,
}

impl AssembledOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbor_row(&self, j: usize) -> &[f64] {
        &self.neighbor[j * self.n..(j + 1) * self.n]
    }

    pub fn diag_weights(&self) -> &[f64] {
        &self.diag_weight
    }

    /// Affine boundary term g (zero unless the policy is `Frozen`).
    pub fn exterior_term(&self) -> &[f64] {
        &self.exterior
    }

    /// Per-row neighbor weight mass, used for contraction estimates.
    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    /// Largest |exterior value| folded into g.
    pub fn exterior_abs_sup(&self) -> f64 {
        self.exterior_abs_sup
    }

    /// Un-folded weight mass left behind by a capped periodic fold.
    pub fn fold_remainder(&self) -> f64 {
        self.fold_remainder
    }

    /// L_h u as matrix action. Rows run in parallel; each row is a
    /// sequential dot product, so results do not depend on thread count.
    pub fn apply_to(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.n);
        (0..self.n)
            .into_par_iter()
            .map(|j| {
                let row = self.neighbor_row(j);
                let mut acc = 0.0;
                for (w, v) in row.iter().zip(u) {
                    acc += w * v;
                }
                acc + self.exterior[j] - self.diag_weight[j] * u[j]
            })
            .collect()
    }
}

/// Fold kernel weights onto residue classes mod `period`. Streams the
/// analytic continuation of the kernel until the remaining mass drops
/// below `tol` (or the cap is reached) and reports what was left.
fn fold_periodic(kernel: &WeightKernel, period: usize, tol: f64) -> (Vec<f64>, f64) {
    let total = kernel.total_sum();
    let mut bins = vec![0.0f64; period];
    let mut running = 0.0;
    let mut k = 0usize;
    for w in kernel.stream() {
        k += 1;
        bins[k % period] += w;
        running += w;
        if total - running <= tol || k >= FOLD_CAP || (k >= kernel.k_max() && w == 0.0) {
            break;
        }
    }
    (bins, (total - running).max(0.0))
}

/// Assemble L_h for `kernel` on `grid` under `ext`.
pub fn assemble_matrix(
    kernel: &WeightKernel,
    grid: &SpatialGrid,
    ext: &Extension<'_>,
) -> Result<AssembledOperator> {
    assemble_matrix_with_tol(kernel, grid, ext, DEFAULT_FOLD_REL * kernel.total_sum().max(1.0))
}

/// As `assemble_matrix` with an explicit periodic fold tolerance
/// (absolute weight mass allowed to stay un-folded).
pub fn assemble_matrix_with_tol(
    kernel: &WeightKernel,
    grid: &SpatialGrid,
    ext: &Extension<'_>,
    fold_tol: f64,
) -> Result<AssembledOperator> {
    if (kernel.spacing() - grid.spacing()).abs() > 1e-12 * grid.spacing() {
        return Err(Error::Domain(format!(
            "kernel spacing {} does not match grid spacing {}",
            kernel.spacing(),
            grid.spacing()
        )));
    }
    let n = grid.n_nodes();
    let m = grid.intervals();
    let k_max = kernel.k_max();
    let weights = kernel.weights();

    let mut neighbor = vec![0.0f64; n * n];
    let mut exterior = vec![0.0f64; n];
    let mut diag_weight = vec![0.0f64; n];
    let mut exterior_abs_sup = 0.0f64;
    let mut fold_remainder = 0.0f64;

    match ext {
        Extension::Periodic => {
            let (bins, rem) = fold_periodic(kernel, m, fold_tol);
            fold_remainder = rem;
            let folded_mass: f64 = bins.iter().sum();
            neighbor
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(j, row)| {
                    for (off, &b) in bins.iter().enumerate() {
                        if b == 0.0 {
                            continue;
                        }
                        row[(j + off) % m] += b;
                        row[(j + m - off) % m] += b;
                    }
                });
            diag_weight.fill(2.0 * folded_mass);
        }
        Extension::ZeroIncrements => {
            neighbor
                .par_chunks_mut(n)
                .zip(diag_weight.par_iter_mut())
                .enumerate()
                .for_each(|(j, (row, d))| {
                    let mut mass = 0.0;
                    for (i, &w) in weights.iter().enumerate() {
                        let k = i + 1;
                        if j + k < n {
                            row[j + k] += w;
                            mass += w;
                        }
                        if k <= j {
                            row[j - k] += w;
                            mass += w;
                        }
                        if j + k >= n && k > j {
                            break;
                        }
                    }
                    *d = mass;
                });
        }
        Extension::Frozen(f) => {
            // Exterior lattice values, one ring past the stored kernel; the
            // whole un-stored tail mass is closed onto that outermost ring.
            let left: Vec<f64> =
                (1..=k_max + 1).map(|k| f(grid.node(0) - k as f64 * grid.spacing())).collect();
            let right: Vec<f64> = (1..=k_max + 1)
                .map(|k| f(grid.node(m) + k as f64 * grid.spacing()))
                .collect();
            exterior_abs_sup = left
                .iter()
                .chain(&right)
                .fold(0.0f64, |a, &v| a.max(v.abs()));
            let tail = kernel.tail_mass();
            exterior
                .par_iter_mut()
                .zip(neighbor.par_chunks_mut(n))
                .enumerate()
                .for_each(|(j, (g, row))| {
                    let mut acc = 0.0;
                    for (i, &w) in weights.iter().enumerate() {
                        let k = i + 1;
                        if j + k < n {
                            row[j + k] += w;
                        } else {
                            acc += w * right[j + k - n];
                        }
                        if k <= j {
                            row[j - k] += w;
                        } else {
                            acc += w * left[k - j - 1];
                        }
                    }
                    // Tail closure: remaining mass sees the first dropped ring.
                    let far_r = if j + k_max + 1 < n { f(grid.node(j + k_max + 1)) } else { right[j + k_max + 1 - n] };
                    let far_l = if k_max + 1 <= j { f(grid.node(j - k_max - 1)) } else { left[k_max - j] };
                    acc += tail * (far_l + far_r);
                    *g = acc;
                });
            diag_weight.fill(2.0 * kernel.total_sum());
        }
    }

    let row_sums: Vec<f64> = neighbor
        .par_chunks(n)
        .map(|row| row.iter().sum::<f64>())
        .collect();

    Ok(AssembledOperator {
        n,
        neighbor,
        diag_weight,
        exterior,
        row_sums,
        exterior_abs_sup,
        fold_remainder,
    })
}

/// Direct (matrix-free) application of L_h. Independent of
/// `assemble_matrix`; the two routes are held together by tests.
pub fn apply(
    kernel: &WeightKernel,
    grid: &SpatialGrid,
    field: &[f64],
    ext: &Extension<'_>,
) -> Result<Vec<f64>> {
    apply_with_tol(kernel, grid, field, ext, DEFAULT_FOLD_REL * kernel.total_sum().max(1.0))
}

pub fn apply_with_tol(
    kernel: &WeightKernel,
    grid: &SpatialGrid,
    field: &[f64],
    ext: &Extension<'_>,
    fold_tol: f64,
) -> Result<Vec<f64>> {
    let n = grid.n_nodes();
    if field.len() != n {
        return Err(Error::Domain(format!(
            "field has {} values but the grid has {n} nodes",
            field.len()
        )));
    }
    if (kernel.spacing() - grid.spacing()).abs() > 1e-12 * grid.spacing() {
        return Err(Error::Domain("kernel/grid spacing mismatch".into()));
    }
    let m = grid.intervals();
    let weights = kernel.weights();
    let k_max = kernel.k_max();

    let out: Vec<f64> = match ext {
        Extension::Periodic => {
            let (bins, _) = fold_periodic(kernel, m, fold_tol);
            (0..n)
                .into_par_iter()
                .map(|j| {
                    let mut acc = 0.0;
                    for (off, &b) in bins.iter().enumerate() {
                        if b == 0.0 {
                            continue;
                        }
                        acc += b
                            * (field[(j + off) % m] + field[(j + m - off) % m]
                                - 2.0 * field[j]);
                    }
                    acc
                })
                .collect()
        }
        Extension::ZeroIncrements => (0..n)
            .into_par_iter()
            .map(|j| {
                let mut acc = 0.0;
                for (i, &w) in weights.iter().enumerate() {
                    let k = i + 1;
                    if j + k < n {
                        acc += w * (field[j + k] - field[j]);
                    }
                    if k <= j {
                        acc += w * (field[j - k] - field[j]);
                    }
                }
                acc
            })
            .collect(),
        Extension::Frozen(f) => {
            let h = grid.spacing();
            let tail = kernel.tail_mass();
            (0..n)
                .into_par_iter()
                .map(|j| {
                    let x = grid.node(j);
                    let mut acc = 0.0;
                    for (i, &w) in weights.iter().enumerate() {
                        let k = i + 1;
                        let up = if j + k < n { field[j + k] } else { f(x + k as f64 * h) };
                        let dn = if k <= j { field[j - k] } else { f(x - k as f64 * h) };
                        acc += w * (up + dn - 2.0 * field[j]);
                    }
                    let far = (k_max + 1) as f64 * h;
                    let far_r = if j + k_max + 1 < n { field[j + k_max + 1] } else { f(x + far) };
                    let far_l = if k_max + 1 <= j { field[j - k_max - 1] } else { f(x - far) };
                    acc + tail * (far_l + far_r - 2.0 * field[j])
                })
                .collect()
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaceop::kernel::{discrete_laplacian_kernel, fractional_laplacian_kernel};

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }

    #[test]
    fn grid_geometry() {
        let g = SpatialGrid::new(2.0, 8).unwrap();
        assert_eq!(g.n_nodes(), 9);
        assert!((g.node(0) + 2.0).abs() < 1e-15);
        assert!((g.node(8) - 2.0).abs() < 1e-15);
        assert!((g.node(4)).abs() < 1e-15);
        assert!((g.intervals() as f64 * g.spacing() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn constant_fields_are_annihilated() {
        let grid = SpatialGrid::new(2.0, 32).unwrap();
        let kernel = fractional_laplacian_kernel(0.75, grid.spacing(), 512).unwrap();
        let field = vec![1.3; grid.n_nodes()];
        let c = |_x: f64| 1.3;
        for ext in [Extension::Frozen(&c), Extension::ZeroIncrements, Extension::Periodic] {
            let out = apply(&kernel, &grid, &field, &ext).unwrap();
            assert!(max_abs(&out) < 1e-10 * kernel.total_sum(), "{}", max_abs(&out));
        }
    }

    #[test]
    fn discrete_laplacian_on_quadratic() {
        let grid = SpatialGrid::new(4.0, 16).unwrap();
        let kernel = discrete_laplacian_kernel(grid.spacing()).unwrap();
        let field: Vec<f64> = grid.nodes().iter().map(|x| x * x).collect();
        let sq = |x: f64| x * x;
        let out = apply(&kernel, &grid, &field, &Extension::Frozen(&sq)).unwrap();
        for v in out {
            assert!((v - 2.0).abs() < 1e-11, "{v}");
        }
    }

    #[test]
    fn tridiagonal_pattern() {
        let grid = SpatialGrid::new(1.0, 4).unwrap();
        let kernel = discrete_laplacian_kernel(grid.spacing()).unwrap();
        let op = assemble_matrix(&kernel, &grid, &Extension::ZeroIncrements).unwrap();
        let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
        for j in 1..4 {
            let row = op.neighbor_row(j);
            assert!((row[j - 1] - inv_h2).abs() < 1e-14);
            assert!((row[j + 1] - inv_h2).abs() < 1e-14);
            assert!((op.diag_weights()[j] - 2.0 * inv_h2).abs() < 1e-14);
        }
    }

    #[test]
    fn matrix_matches_apply_on_random_fields() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let grid = SpatialGrid::new(1.5, 24).unwrap();
        let kernel = fractional_laplacian_kernel(0.6, grid.spacing(), 160).unwrap();
        let frozen_fn = |x: f64| (1.3 * x).cos();
        for ext in [Extension::Frozen(&frozen_fn), Extension::ZeroIncrements, Extension::Periodic]
        {
            let op = assemble_matrix(&kernel, &grid, &ext).unwrap();
            for _ in 0..50 {
                let field: Vec<f64> =
                    (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let direct = apply(&kernel, &grid, &field, &ext).unwrap();
                let via_matrix = op.apply_to(&field);
                for (a, b) in direct.iter().zip(&via_matrix) {
                    assert!((a - b).abs() < 1e-12 * kernel.total_sum().max(1.0));
                }
            }
        }
    }

    #[test]
    fn symmetric_data_symmetric_image() {
        let grid = SpatialGrid::new(2.0, 20).unwrap();
        let kernel = fractional_laplacian_kernel(0.5, grid.spacing(), 100).unwrap();
        let field: Vec<f64> = grid.nodes().iter().map(|x| (-x * x).exp()).collect();
        let even = |x: f64| (-x * x).exp();
        let out = apply(&kernel, &grid, &field, &Extension::Frozen(&even)).unwrap();
        let n = out.len();
        for j in 0..n {
            assert!((out[j] - out[n - 1 - j]).abs() < 1e-12 * kernel.total_sum());
        }
    }

    #[test]
    fn periodic_symbol_identity_single_mode() {
        // apply(e^{iξx}) = -(4 sin²(ξh/2)/h²)^s e^{iξx} on a 2π-periodic grid;
        // real arithmetic via the sine mode.
        let s = 0.75;
        let m = 64usize;
        let grid = SpatialGrid::new(std::f64::consts::PI, m).unwrap();
        let h = grid.spacing();
        let kernel = fractional_laplacian_kernel(s, h, 4 * m).unwrap();
        let field: Vec<f64> = grid.nodes().iter().map(|x| x.sin()).collect();
        let out =
            apply_with_tol(&kernel, &grid, &field, &Extension::Periodic, 1e-9).unwrap();
        let symbol = (4.0 * (0.5 * h).sin().powi(2) / (h * h)).powf(s);
        for (j, &v) in out.iter().enumerate() {
            let want = -symbol * field[j];
            assert!((v - want).abs() < 1e-8, "node {j}: {v} vs {want}");
        }
    }
}
