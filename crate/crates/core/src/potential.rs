//! Kernels of the discrete operators, scalar potentials via discrete
//! integrals and the discrete Neumann problem for div- and curl-free fields.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::krylov::{lsmr, to_dense, KrylovOptions, LinearMap, SolveStats, StopReason};
use crate::maps::{DiffOperator, OperatorMap};
use crate::sbp::V0Inverse;
use crate::tensor::TensorOps;

/// Largest number of columns handed to the dense SVD.
pub const DENSE_COLUMN_LIMIT: usize = 4000;

/// Default relative tolerance for "discretely curl free" and similar gates.
pub const CONDITION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub operator_name: String,
    pub matrix_shape: (usize, usize),
    pub numerical_rank: usize,
    pub kernel_dim: usize,
    pub expected_dim: Option<usize>,
    /// Absolute singular value threshold.
    pub tolerance_used: f64,
}

impl KernelReport {
    pub fn image_dim(&self) -> usize {
        self.numerical_rank
    }

    /// `true` when there is no expectation or it is met exactly.
    pub fn matches_expected(&self) -> bool {
        self.expected_dim.is_none_or(|e| e == self.kernel_dim)
    }

    pub fn expecting(mut self, dim: usize) -> Self {
        self.expected_dim = Some(dim);
        self
    }
}

fn check_size(matrix: &DMatrix<f64>) -> Result<()> {
    if matrix.ncols() > DENSE_COLUMN_LIMIT {
        return Err(Error::TooLarge {
            cols: matrix.ncols(),
            limit: DENSE_COLUMN_LIMIT,
        });
    }
    Ok(())
}

/// Wide matrices are padded with zero rows so that the SVD is always taken
/// of a matrix with at least as many rows as columns.
fn padded(matrix: &DMatrix<f64>) -> DMatrix<f64> {
    if matrix.nrows() >= matrix.ncols() {
        matrix.clone()
    } else {
        let mut out = DMatrix::zeros(matrix.ncols(), matrix.ncols());
        out.rows_mut(0, matrix.nrows()).copy_from(matrix);
        out
    }
}

fn rank_threshold(singular_values: &DVector<f64>, rows: usize, cols: usize, factor: f64) -> f64 {
    singular_values.max() * rows.max(cols) as f64 * f64::EPSILON * factor
}

/// Numerical rank and kernel dimension of a dense matrix, counting singular
/// values above `sigma_max * max(rows, cols) * eps * tol_factor`.
pub fn kernel_dimension(matrix: &DMatrix<f64>, tol_factor: f64) -> Result<KernelReport> {
    check_size(matrix)?;
    let (rows, cols) = matrix.shape();
    let sv = padded(matrix).singular_values();
    let threshold = rank_threshold(&sv, rows, cols, tol_factor);
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    Ok(KernelReport {
        operator_name: "matrix".into(),
        matrix_shape: (rows, cols),
        numerical_rank: rank,
        kernel_dim: cols - rank,
        expected_dim: None,
        tolerance_used: threshold,
    })
}

/// Orthonormal basis of the numerical kernel, one column per vector.
pub fn kernel_basis(matrix: &DMatrix<f64>, tol_factor: f64) -> Result<DMatrix<f64>> {
    check_size(matrix)?;
    let (rows, cols) = matrix.shape();
    let svd = padded(matrix).svd(false, true);
    let threshold = rank_threshold(&svd.singular_values, rows, cols, tol_factor);
    let v_t = svd.v_t.expect("requested V^T");
    let kernel: Vec<usize> = (0..cols)
        .filter(|&k| svd.singular_values[k] <= threshold)
        .collect();
    let mut basis = DMatrix::zeros(cols, kernel.len());
    for (j, &k) in kernel.iter().enumerate() {
        basis.set_column(j, &v_t.row(k).transpose());
    }
    Ok(basis)
}

/// Dense matrix of a differential operator acting on flat field data.
pub fn operator_matrix(ops: &TensorOps, operator: DiffOperator) -> Result<DMatrix<f64>> {
    let map = OperatorMap::new(ops, operator)?;
    if map.ncols() > DENSE_COLUMN_LIMIT {
        return Err(Error::TooLarge {
            cols: map.ncols(),
            limit: DENSE_COLUMN_LIMIT,
        });
    }
    Ok(to_dense(&map))
}

pub fn operator_kernel(
    ops: &TensorOps,
    operator: DiffOperator,
    tol_factor: f64,
) -> Result<KernelReport> {
    let mut report = kernel_dimension(&operator_matrix(ops, operator)?, tol_factor)?;
    report.operator_name = format!("{} ({}D)", operator.name(), ops.dim());
    Ok(report)
}

/// Ranks of `div` and of `div` restricted to `ker curl`.
pub fn divergence_ranks_on_curl_kernel(ops: &TensorOps, tol_factor: f64) -> Result<(usize, usize)> {
    let div = operator_matrix(ops, DiffOperator::Divergence)?;
    let curl = operator_matrix(ops, DiffOperator::Curl)?;
    let full = kernel_dimension(&div, tol_factor)?.numerical_rank;
    let basis = kernel_basis(&curl, tol_factor)?;
    let restricted = kernel_dimension(&(&div * basis), tol_factor)?.numerical_rank;
    Ok((full, restricted))
}

/// Residuals of the conditions under which a discrete vector field has a
/// scalar potential: vanishing curl and `u_i` orthogonal to `osc_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialConditions {
    /// `||curl u||_M dx_min / ||u||_M`
    pub curl_residual: f64,
    /// `|<u_i, osc_i>_M| / (||u_i||_M ||osc_i||_M)` per axis.
    pub oscillation_components: Vec<f64>,
}

impl PotentialConditions {
    pub fn satisfied(&self, tol: f64) -> bool {
        self.curl_residual <= tol && self.oscillation_components.iter().all(|&c| c <= tol)
    }

    fn describe_violations(&self, tol: f64) -> String {
        let mut parts = Vec::new();
        if self.curl_residual > tol {
            parts.push(format!("curl residual {:.3e}", self.curl_residual));
        }
        for (i, &c) in self.oscillation_components.iter().enumerate() {
            if c > tol {
                parts.push(format!("oscillation component {} = {c:.3e}", i + 1));
            }
        }
        format!("{} (tolerance {tol:.1e})", parts.join(", "))
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `||A u||_M * dx_min / ||u||_M`, i.e. the residual relative to the scale of
/// a single difference quotient of `u`.
fn relative_residual(ops: &TensorOps, u: &GridField, operator: DiffOperator) -> Result<f64> {
    let map = OperatorMap::new(ops, operator)?;
    let mut out = vec![0.0; map.nrows()];
    map.apply(u.as_slice(), &mut out);
    let n = ops.n_nodes();
    let residual: f64 = out.chunks(n).map(|c| ops.dot(c, c)).sum::<f64>().sqrt();
    let dx = ops
        .axes()
        .iter()
        .map(|a| a.grid().dx())
        .fold(f64::INFINITY, f64::min);
    Ok(ratio(residual * dx, ops.m_norm(u)?))
}

fn check_vector_field(ops: &TensorOps, u: &GridField) -> Result<()> {
    if u.shape() != ops.shape() || u.n_components() != ops.dim() || u.is_scalar() {
        return Err(Error::KindMismatch(format!(
            "expected a {}-component vector field on shape {:?}",
            ops.dim(),
            ops.shape()
        )));
    }
    Ok(())
}

pub fn check_potential_conditions(ops: &TensorOps, u: &GridField) -> Result<PotentialConditions> {
    check_vector_field(ops, u)?;
    let curl_residual = relative_residual(ops, u, DiffOperator::Curl)?;
    let oscillation_components = ops
        .oscillations()
        .singles
        .iter()
        .enumerate()
        .map(|(i, osc)| {
            let ui = u.component(i);
            let norms = (ops.dot(ui, ui) * ops.dot(osc, osc)).sqrt();
            ratio(ops.dot(ui, osc).abs(), norms)
        })
        .collect();
    Ok(PotentialConditions {
        curl_residual,
        oscillation_components,
    })
}

/// Scalar potential of a discretely curl-free field satisfying the
/// oscillation conditions, built from axis-wise discrete integrals
/// `phi = sum_i (D_i^{-1} u_i)(x_j = x_j,min for j > i)`, each term extended
/// constantly along the later axes.
pub fn scalar_potential_integral(ops: &TensorOps, u: &GridField) -> Result<GridField> {
    scalar_potential_integral_with_tolerance(ops, u, CONDITION_TOLERANCE)
}

pub fn scalar_potential_integral_with_tolerance(
    ops: &TensorOps,
    u: &GridField,
    tol: f64,
) -> Result<GridField> {
    let conditions = check_potential_conditions(ops, u)?;
    if !conditions.satisfied(tol) {
        return Err(Error::ConditionsViolated(
            conditions.describe_violations(tol),
        ));
    }
    let n = ops.n_nodes();
    let dim = ops.dim();
    let mut phi = vec![0.0; n];
    let mut integral = vec![0.0; n];
    for axis in 0..dim {
        let inverse = V0Inverse::new(ops.axis(axis))?;
        ops.try_map_lines(axis, u.component(axis), &mut integral, |line, out| {
            out.copy_from_slice(&inverse.apply(line)?);
            Ok::<(), Error>(())
        })?;
        for (k, p) in phi.iter_mut().enumerate() {
            let mut idx = ops.index_of(k);
            idx[axis + 1..].iter_mut().for_each(|i| *i = 0);
            *p += integral[ops.flat_index(&idx)];
        }
    }
    ops.scalar_field(phi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannOptions {
    /// Relative tolerance for the div/curl-free gate and the compatibility
    /// of the boundary data.
    pub tolerance: f64,
    pub krylov: KrylovOptions,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        Self {
            tolerance: CONDITION_TOLERANCE,
            krylov: KrylovOptions::with_tol(1e-13),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NeumannSolution {
    /// Mean-zero potential.
    pub phi: GridField,
    pub stats: SolveStats,
}

/// `M^{-1/2} (sum_i D_i^T M D_i) M^{-1/2}`, symmetric positive semidefinite.
struct ScaledNeumannMap<'a> {
    ops: &'a TensorOps,
    sqrt_mass: Vec<f64>,
}

impl LinearMap for ScaledNeumannMap<'_> {
    fn nrows(&self) -> usize {
        self.ops.n_nodes()
    }

    fn ncols(&self) -> usize {
        self.ops.n_nodes()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let z: Vec<f64> = x.iter().zip(&self.sqrt_mass).map(|(v, s)| v / s).collect();
        y.iter_mut().for_each(|v| *v = 0.0);
        for axis in 0..self.ops.dim() {
            let mut d = self.ops.partial(axis, &z);
            d.iter_mut().zip(self.ops.mass()).for_each(|(v, m)| *v *= m);
            for (acc, t) in y.iter_mut().zip(self.ops.partial_transpose(axis, &d)) {
                *acc += t;
            }
        }
        y.iter_mut().zip(&self.sqrt_mass).for_each(|(v, s)| *v /= s);
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        self.apply(y, x)
    }
}

/// Solves `sum_i D_i^T M D_i phi = sum_i E_i u_i` for a div- and curl-free
/// field `u`, whose gradient then reproduces `u`.
pub fn harmonic_neumann_potential(
    ops: &TensorOps,
    u: &GridField,
    options: &NeumannOptions,
) -> Result<NeumannSolution> {
    check_vector_field(ops, u)?;
    let div = relative_residual(ops, u, DiffOperator::Divergence)?;
    let curl = relative_residual(ops, u, DiffOperator::Curl)?;
    if div > options.tolerance || curl > options.tolerance {
        return Err(Error::NotDivCurlFree { div, curl });
    }

    let n = ops.n_nodes();
    let mut rhs = vec![0.0; n];
    for axis in 0..ops.dim() {
        for ((r, e), v) in rhs
            .iter_mut()
            .zip(ops.boundary_weights(axis))
            .zip(u.component(axis))
        {
            *r += e * v;
        }
    }
    let total: f64 = rhs.iter().sum();
    let magnitude: f64 = rhs.iter().map(|v| v.abs()).sum();
    if ratio(total.abs(), magnitude) > options.tolerance {
        return Err(Error::ConditionsViolated(format!(
            "boundary data incompatible: sum {total:.3e} of {magnitude:.3e}"
        )));
    }

    let map = ScaledNeumannMap {
        ops,
        sqrt_mass: ops.mass().iter().map(|m| m.sqrt()).collect(),
    };
    let b: Vec<f64> = rhs.iter().zip(&map.sqrt_mass).map(|(r, s)| r / s).collect();
    let (psi, stats) = lsmr(&map, &b, &options.krylov)?;
    if stats.stop_reason == StopReason::MaxIter {
        return Err(Error::SolverStalled(format!(
            "Neumann solve hit the iteration limit ({} iterations, residual {:.3e})",
            stats.iterations, stats.final_residual_norm
        )));
    }
    let phi: Vec<f64> = psi.iter().zip(&map.sqrt_mass).map(|(p, s)| p / s).collect();
    let phi = ops.remove_mean(&ops.scalar_field(phi)?);
    Ok(NeumannSolution { phi, stats })
}
