//! One-dimensional diagonal-norm summation-by-parts derivative operators.
//!
//! An operator `D` on `N` uniform nodes comes with a diagonal mass matrix `M`
//! and the boundary matrix `E = diag(-1, 0, ..., 0, 1)` such that
//! `M D + D^T M = E`. Application is matrix free: a dense closure block at
//! each boundary and a central stencil in between.

mod coefficients;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orders with embedded coefficient tables.
pub const SUPPORTED_ORDERS: [usize; 4] = [2, 4, 6, 8];

/// Uniform grid on `[x_min, x_max]` with `n` nodes, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "interval [{x_min}, {x_max}] is empty or not finite"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("{n} nodes, need at least 2")));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    /// Coordinate of node `i` (zero based).
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
}

/// Smallest admissible number of nodes for the given order, such that the two
/// boundary closures do not overlap.
pub fn minimum_nodes(order: usize) -> Result<usize> {
    coefficients::for_order(order)
        .map(|c| 2 * c.closure.len())
        .ok_or(Error::UnsupportedOrder(order))
}

#[derive(Debug, Clone)]
pub struct SbpOperator1D {
    grid: Grid1D,
    order: usize,
    /// Left closure rows, already divided by `dx`; row `i` starts at column 0.
    top: Vec<Vec<f64>>,
    /// Right closure rows in column order; row `n - r + i` starts at column
    /// `n - width`.
    bottom: Vec<Vec<f64>>,
    /// Full interior row `[-a_p, .., -a_1, 0, a_1, .., a_p] / dx`.
    interior: Vec<f64>,
    mass: Vec<f64>,
}

impl SbpOperator1D {
    /// Builds the classical operator of interior order `order` and validates
    /// the SBP identity and the accuracy conditions.
    pub fn new(order: usize, grid: Grid1D) -> Result<Self> {
        let op = Self::assemble(order, grid)?;
        op.validate()?;
        Ok(op)
    }

    fn assemble(order: usize, grid: Grid1D) -> Result<Self> {
        let coeffs = coefficients::for_order(order).ok_or(Error::UnsupportedOrder(order))?;
        let r = coeffs.closure.len();
        let min = 2 * r;
        if grid.n < min {
            return Err(Error::GridTooSmall {
                order,
                n: grid.n,
                min,
            });
        }
        let n = grid.n;
        let dx = grid.dx();
        let width = coeffs.closure[0].len();

        let top: Vec<Vec<f64>> = coeffs
            .closure
            .iter()
            .map(|row| row.iter().map(|c| c / dx).collect())
            .collect();
        let mut bottom = vec![vec![0.0; width]; r];
        for (i, row) in coeffs.closure.iter().enumerate() {
            // Row n-1-i, column n-1-j carries -closure[i][j].
            for (j, c) in row.iter().enumerate() {
                bottom[r - 1 - i][width - 1 - j] = -c / dx;
            }
        }
        let p = coeffs.stencil.len();
        let mut interior = vec![0.0; 2 * p + 1];
        for (k, a) in coeffs.stencil.iter().enumerate() {
            interior[p + 1 + k] = a / dx;
            interior[p - 1 - k] = -a / dx;
        }

        let mut mass = vec![dx; n];
        for (i, w) in coeffs.weights.iter().enumerate() {
            mass[i] = w * dx;
            mass[n - 1 - i] = w * dx;
        }

        Ok(Self {
            grid,
            order,
            top,
            bottom,
            interior,
            mass,
        })
    }

    fn validate(&self) -> Result<()> {
        let scale = self.md_max();
        let residual = self.sbp_residual();
        if residual > 1e-13 * scale {
            return Err(Error::InvalidOperator(format!(
                "SBP residual {residual:.3e} exceeds {:.3e}",
                1e-13 * scale
            )));
        }
        let accuracy = self.accuracy_defect();
        if accuracy > 1e-12 {
            return Err(Error::InvalidOperator(format!(
                "accuracy defect {accuracy:.3e} exceeds 1e-12"
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Order of accuracy of the boundary closure rows.
    pub fn boundary_order(&self) -> usize {
        self.order / 2
    }

    pub fn len(&self) -> usize {
        self.grid.n
    }

    pub fn is_empty(&self) -> bool {
        self.grid.n == 0
    }

    pub fn closure_rows(&self) -> usize {
        self.top.len()
    }

    /// Diagonal of the mass matrix `M`.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Diagonal of `E`: `-1` at the left node, `1` at the right node.
    pub fn boundary_diagonal(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.len()];
        e[0] = -1.0;
        e[self.len() - 1] = 1.0;
        e
    }

    /// Nonzero band of row `i` as `(first column, coefficients)`.
    pub fn row(&self, i: usize) -> (usize, &[f64]) {
        let n = self.len();
        let r = self.top.len();
        if i < r {
            (0, &self.top[i])
        } else if i >= n - r {
            let width = self.bottom[0].len();
            (n - width, &self.bottom[i - (n - r)])
        } else {
            let p = self.interior.len() / 2;
            (i - p, &self.interior)
        }
    }

    /// Matrix entry `D[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (start, coeffs) = self.row(i);
        if j >= start && j < start + coeffs.len() {
            coeffs[j - start]
        } else {
            0.0
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: len,
            });
        }
        Ok(())
    }

    /// `out = D u` without length checks beyond debug assertions.
    pub fn apply_d_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        for (i, o) in out.iter_mut().enumerate() {
            let (start, coeffs) = self.row(i);
            let mut acc = 0.0;
            for (c, x) in coeffs.iter().zip(&u[start..start + coeffs.len()]) {
                acc += c * x;
            }
            *o = acc;
        }
    }

    /// `out = D^T w` (Euclidean transpose).
    pub fn apply_dt_into(&self, w: &[f64], out: &mut [f64]) {
        debug_assert_eq!(w.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        out.fill(0.0);
        for (i, wi) in w.iter().enumerate() {
            let (start, coeffs) = self.row(i);
            for (o, c) in out[start..start + coeffs.len()].iter_mut().zip(coeffs) {
                *o += c * wi;
            }
        }
    }

    /// `out = D* u = M^{-1} D^T M u`.
    pub fn apply_d_star_into(&self, u: &[f64], out: &mut [f64]) {
        let weighted: Vec<f64> = u.iter().zip(&self.mass).map(|(x, m)| x * m).collect();
        self.apply_dt_into(&weighted, out);
        for (o, m) in out.iter_mut().zip(&self.mass) {
            *o /= m;
        }
    }

    pub fn apply_d(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u.len())?;
        let mut out = vec![0.0; u.len()];
        self.apply_d_into(u, &mut out);
        Ok(out)
    }

    pub fn apply_dt(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w.len())?;
        let mut out = vec![0.0; w.len()];
        self.apply_dt_into(w, &mut out);
        Ok(out)
    }

    pub fn apply_d_star(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u.len())?;
        let mut out = vec![0.0; u.len()];
        self.apply_d_star_into(u, &mut out);
        Ok(out)
    }

    /// `<u, w>_M`.
    pub fn inner(&self, u: &[f64], w: &[f64]) -> f64 {
        u.iter()
            .zip(w)
            .zip(&self.mass)
            .map(|((a, b), m)| a * b * m)
            .sum()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            let (start, coeffs) = self.row(i);
            for (k, c) in coeffs.iter().enumerate() {
                d[(i, start + k)] = *c;
            }
        }
        d
    }

    fn md_max(&self) -> f64 {
        (0..self.len())
            .flat_map(|i| {
                let (_, coeffs) = self.row(i);
                let m = self.mass[i];
                coeffs.iter().map(move |c| (m * c).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Max-abs entry of `M D + D^T M - E`.
    pub fn sbp_residual(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let (start, coeffs) = self.row(i);
            for k in 0..coeffs.len() {
                let j = start + k;
                let mut value = self.mass[i] * coeffs[k] + self.mass[j] * self.entry(j, i);
                if i == j && i == 0 {
                    value += 1.0;
                } else if i == j && i == n - 1 {
                    value -= 1.0;
                }
                worst = worst.max(value.abs());
            }
        }
        // E has entries outside the band only if the corners are outside it,
        // which cannot happen since every row contains its diagonal.
        worst
    }

    /// Largest relative defect when differentiating monomials of degree up to
    /// `2p` (interior rows) and `p` (closure rows) in the scaled coordinate
    /// `(x - x_min) / L`.
    pub fn accuracy_defect(&self) -> f64 {
        let n = self.len();
        let length = self.grid.length();
        let xi: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .map(|x| (x - self.grid.x_min) / length)
            .collect();
        let r = self.top.len();
        let mut worst: f64 = 0.0;
        for degree in 0..=self.order {
            let values: Vec<f64> = xi.iter().map(|x| x.powi(degree as i32)).collect();
            for i in 0..n {
                let closure = i < r || i >= n - r;
                if closure && degree > self.boundary_order() {
                    continue;
                }
                let (start, coeffs) = self.row(i);
                let mut acc = 0.0;
                let mut scale = 0.0;
                for (c, v) in coeffs.iter().zip(&values[start..start + coeffs.len()]) {
                    acc += c * v;
                    scale += (c * v).abs();
                }
                let exact = if degree == 0 {
                    0.0
                } else {
                    degree as f64 * xi[i].powi(degree as i32 - 1) / length
                };
                let scale = scale.max(exact.abs()).max(1.0 / self.grid.dx());
                worst = worst.max((acc - exact).abs() / scale);
            }
        }
        worst
    }

    /// Copy of the operator with the coefficient `a_1` of the interior stencil
    /// shifted by `delta / dx` on the right side only. Skips validation; used
    /// for negative controls.
    pub fn perturbed(&self, delta: f64) -> Self {
        let mut op = self.clone();
        let p = op.interior.len() / 2;
        op.interior[p + 1] += delta / self.grid.dx();
        op
    }

    /// Builds an operator whose interior stencil is corrupted by `delta`,
    /// bypassing the constructor checks.
    pub fn new_perturbed(order: usize, grid: Grid1D, delta: f64) -> Result<Self> {
        Ok(Self::assemble(order, grid)?.perturbed(delta))
    }

    /// Basis vector of `ker D*`, see [`OscillationVector1D`].
    pub fn grid_oscillation(&self) -> Result<OscillationVector1D> {
        let svd = self.dense().svd(true, false);
        let u = svd.u.as_ref().expect("left singular vectors requested");
        let sigma = &svd.singular_values;
        let sigma_max = sigma.max();
        let tol = sigma_max * (self.len().max(2) as f64) * f64::EPSILON;
        let small: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] <= tol).collect();
        if small.len() != 1 {
            return Err(Error::NullspaceDimensionUnexpected(small.len()));
        }
        // Left null vector y of D spans ker D^T; ker D* = M^{-1} ker D^T.
        let y = u.column(small[0]);
        let mut values: Vec<f64> = y.iter().zip(&self.mass).map(|(y, m)| y / m).collect();
        let norm = self.inner(&values, &values).sqrt();
        let sign = if values[0] < 0.0 { -1.0 } else { 1.0 };
        for v in &mut values {
            *v *= sign / norm;
        }
        Ok(OscillationVector1D { values })
    }

    /// Discrete integral `D^{-1}: V1 -> V0`, see [`V0Inverse`].
    pub fn v0_inverse(&self) -> Result<V0Inverse> {
        V0Inverse::new(self)
    }

    /// Solves `D v = u` with `v[0] = 0`. Factorises on every call; use
    /// [`SbpOperator1D::v0_inverse`] to reuse the factorisation.
    pub fn invert_on_v0(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.v0_inverse()?.apply(u)
    }
}

/// Grid oscillation: unit `M`-norm basis vector of `ker D*` with a positive
/// first entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationVector1D {
    pub values: Vec<f64>,
}

/// Relative tolerance on the oscillation content accepted by [`V0Inverse`].
pub const IMAGE_TOLERANCE: f64 = 1e-8;

/// Dense QR factorisation of `D` restricted to grid functions vanishing at
/// the left node. Intended for verification-scale grids.
#[derive(Debug, Clone)]
pub struct V0Inverse {
    q_t: DMatrix<f64>,
    r: DMatrix<f64>,
    mass: Vec<f64>,
    osc: Vec<f64>,
    tolerance: f64,
}

impl V0Inverse {
    pub fn new(op: &SbpOperator1D) -> Result<Self> {
        let n = op.len();
        let d = op.dense();
        let reduced = d.columns(1, n - 1).into_owned();
        let qr = reduced.qr();
        Ok(Self {
            q_t: qr.q().transpose(),
            r: qr.r(),
            mass: op.mass().to_vec(),
            osc: op.grid_oscillation()?.values,
            tolerance: IMAGE_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Relative size of the `osc` component, `|<u, osc>_M| / ||u||_M`.
    pub fn oscillation_content(&self, u: &[f64]) -> f64 {
        let dot = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .zip(&self.mass)
                .map(|((x, y), m)| x * y * m)
                .sum()
        };
        let norm = dot(u, u).sqrt();
        if norm == 0.0 {
            0.0
        } else {
            dot(u, &self.osc).abs() / norm
        }
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: u.len(),
            });
        }
        let component = self.oscillation_content(u);
        if component > self.tolerance {
            return Err(Error::NotInImage {
                component,
                tolerance: self.tolerance,
            });
        }
        Ok(self.apply_unchecked(u))
    }

    /// Least-squares inverse without the image check.
    pub fn apply_unchecked(&self, u: &[f64]) -> Vec<f64> {
        let rhs = &self.q_t * DVector::from_column_slice(u);
        let tail = self
            .r
            .solve_upper_triangular(&rhs)
            .expect("D restricted to V0 has full column rank");
        let mut v = Vec::with_capacity(self.len());
        v.push(0.0);
        v.extend(tail.iter());
        v
    }
}
