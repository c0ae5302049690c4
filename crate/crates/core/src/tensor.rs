//! Tensor-product vector calculus in two and three space dimensions.
//!
//! With per-axis operators `D_x, D_y[, D_z]` the partial derivatives are
//! `D_1 = D_x (x) I_y`, `D_2 = I_x (x) D_y` (and the 3D analogues), the mass
//! matrix is `M = M_x (x) M_y [(x) M_z]` and `E_i` replaces the `i`-th mass
//! factor by the 1D boundary matrix. Vector fields use the block mass
//! `I_d (x) M`.
//!
//! Axis `a` has stride `N_{a+1} * .. * N_d` in the flat layout, so every
//! partial derivative is a strided sweep over grid lines.

use crate::error::{Error, Result};
use crate::field::{node_count, FieldKind, GridField};
use crate::sbp::{Grid1D, SbpOperator1D};

/// Which 1D matrix to apply along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisOp {
    /// `D`
    Derivative,
    /// `D^T`
    Transpose,
    /// `D* = M^{-1} D^T M`
    Adjoint,
}

/// Tensor products of axis oscillation vectors and constants.
#[derive(Debug, Clone)]
pub struct OscillationFields {
    /// `osc_i`, oscillating along axis `i` only.
    pub singles: Vec<Vec<f64>>,
    /// `osc_ij` for `i < j`, listed as `((i, j), values)`.
    pub pairs: Vec<((usize, usize), Vec<f64>)>,
    /// `osc_123` in three dimensions.
    pub triple: Option<Vec<f64>>,
}

impl OscillationFields {
    pub fn pair(&self, i: usize, j: usize) -> Option<&[f64]> {
        let key = (i.min(j), i.max(j));
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_slice())
    }

    /// All listed oscillation fields.
    pub fn all(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.singles.iter().map(Vec::as_slice).collect();
        out.extend(self.pairs.iter().map(|(_, v)| v.as_slice()));
        if let Some(t) = &self.triple {
            out.push(t);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TensorOps {
    axes: Vec<SbpOperator1D>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    mass: Vec<f64>,
    osc: OscillationFields,
}

fn outer_product(factors: &[&[f64]]) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for a in &out {
            for b in *f {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

impl TensorOps {
    /// Builds the operator bundle for interior order `order` on the given
    /// axis grids (two or three of them).
    pub fn new(order: usize, grids: &[Grid1D]) -> Result<Self> {
        let axes = grids
            .iter()
            .map(|g| SbpOperator1D::new(order, *g))
            .collect::<Result<Vec<_>>>()?;
        Self::from_axes(axes)
    }

    /// Same grid on every axis.
    pub fn uniform(order: usize, dim: usize, x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Grid1D::new(x_min, x_max, n)?;
        Self::new(order, &vec![g; dim])
    }

    /// Bundles already constructed axis operators (possibly unvalidated ones).
    pub fn from_axes(axes: Vec<SbpOperator1D>) -> Result<Self> {
        let dim = axes.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::WrongDimension {
                expected: 2,
                actual: dim,
            });
        }
        let shape: Vec<usize> = axes.iter().map(SbpOperator1D::len).collect();
        let mut strides = vec![1; dim];
        for a in (0..dim - 1).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let masses: Vec<&[f64]> = axes.iter().map(SbpOperator1D::mass).collect();
        let mass = outer_product(&masses);

        let axis_osc = axes
            .iter()
            .map(SbpOperator1D::grid_oscillation)
            .collect::<Result<Vec<_>>>()?;
        let ones: Vec<Vec<f64>> = shape.iter().map(|&n| vec![1.0; n]).collect();
        let build = |osc_axes: &[usize]| -> Vec<f64> {
            let factors: Vec<&[f64]> = (0..dim)
                .map(|a| {
                    if osc_axes.contains(&a) {
                        axis_osc[a].values.as_slice()
                    } else {
                        ones[a].as_slice()
                    }
                })
                .collect();
            outer_product(&factors)
        };
        let singles = (0..dim).map(|a| build(&[a])).collect();
        let mut pairs = Vec::new();
        for i in 0..dim {
            for j in i + 1..dim {
                pairs.push(((i, j), build(&[i, j])));
            }
        }
        let triple = (dim == 3).then(|| build(&[0, 1, 2]));

        Ok(Self {
            axes,
            shape,
            strides,
            mass,
            osc: OscillationFields {
                singles,
                pairs,
                triple,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn n_nodes(&self) -> usize {
        node_count(&self.shape)
    }

    pub fn order(&self) -> usize {
        self.axes[0].order()
    }

    pub fn axis(&self, a: usize) -> &SbpOperator1D {
        &self.axes[a]
    }

    pub fn axes(&self) -> &[SbpOperator1D] {
        &self.axes
    }

    /// Diagonal of `M` over all nodes.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn oscillations(&self) -> &OscillationFields {
        &self.osc
    }

    /// Multi-index of a flat node index.
    pub fn index_of(&self, flat: usize) -> Vec<usize> {
        self.shape
            .iter()
            .zip(&self.strides)
            .map(|(n, s)| (flat / s) % n)
            .collect()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Node coordinates of flat index `flat`.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        self.index_of(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, op)| op.grid().node(i))
            .collect()
    }

    pub fn sample_scalar(&self, f: impl Fn(&[f64]) -> f64) -> GridField {
        let data = (0..self.n_nodes())
            .map(|k| f(&self.coordinates(k)))
            .collect();
        GridField::new(self.shape.clone(), FieldKind::Scalar, data).expect("layout matches")
    }

    /// Samples a vector function with `components` outputs.
    pub fn sample_vector(&self, components: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> GridField {
        let n = self.n_nodes();
        let mut data = vec![0.0; n * components];
        for k in 0..n {
            let v = f(&self.coordinates(k));
            for c in 0..components {
                data[c * n + k] = v[c];
            }
        }
        GridField::new(self.shape.clone(), FieldKind::Vector(components), data)
            .expect("layout matches")
    }

    pub fn scalar_field(&self, data: Vec<f64>) -> Result<GridField> {
        GridField::new(self.shape.clone(), FieldKind::Scalar, data)
    }

    pub fn vector_field(&self, components: Vec<Vec<f64>>) -> Result<GridField> {
        GridField::vector(&self.shape, components)
    }

    pub fn zeros_scalar(&self) -> GridField {
        GridField::zeros(&self.shape, FieldKind::Scalar)
    }

    pub fn zeros_vector(&self) -> GridField {
        GridField::zeros(&self.shape, FieldKind::Vector(self.dim()))
    }

    /// Applies the 1D matrix `op` along `axis` to a flat scalar array.
    pub fn apply_axis(&self, axis: usize, op: AxisOp, src: &[f64], dst: &mut [f64]) {
        let d = &self.axes[axis];
        let result: Result<()> = self.try_map_lines(axis, src, dst, |line, out| {
            match op {
                AxisOp::Derivative => d.apply_d_into(line, out),
                AxisOp::Transpose => d.apply_dt_into(line, out),
                AxisOp::Adjoint => d.apply_d_star_into(line, out),
            }
            Ok(())
        });
        result.expect("infallible line map");
    }

    /// Runs `f` on every grid line along `axis`, reading from `src` and
    /// writing the line result into `dst`.
    pub fn try_map_lines<E>(
        &self,
        axis: usize,
        src: &[f64],
        dst: &mut [f64],
        mut f: impl FnMut(&[f64], &mut [f64]) -> std::result::Result<(), E>,
    ) -> std::result::Result<(), E> {
        assert_eq!(src.len(), self.n_nodes());
        assert_eq!(dst.len(), self.n_nodes());
        let n = self.shape[axis];
        let stride = self.strides[axis];
        let block = n * stride;
        let mut line = vec![0.0; n];
        let mut out = vec![0.0; n];
        for base in (0..src.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = src[start + i * stride];
                }
                f(&line, &mut out)?;
                for (i, v) in out.iter().enumerate() {
                    dst[start + i * stride] = *v;
                }
            }
        }
        Ok(())
    }

    /// `D_axis f` on a flat scalar array.
    pub fn partial(&self, axis: usize, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.apply_axis(axis, AxisOp::Derivative, f, &mut out);
        out
    }

    pub fn partial_transpose(&self, axis: usize, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.apply_axis(axis, AxisOp::Transpose, f, &mut out);
        out
    }

    pub fn partial_adjoint(&self, axis: usize, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.apply_axis(axis, AxisOp::Adjoint, f, &mut out);
        out
    }

    fn check_scalar(&self, f: &GridField) -> Result<()> {
        self.check_shape(f)?;
        if !f.is_scalar() {
            return Err(Error::KindMismatch(format!(
                "expected a scalar field, got {:?}",
                f.kind()
            )));
        }
        Ok(())
    }

    fn check_vector(&self, u: &GridField, components: usize) -> Result<()> {
        self.check_shape(u)?;
        if u.kind() != FieldKind::Vector(components) {
            return Err(Error::KindMismatch(format!(
                "expected a {components}-component vector field, got {:?}",
                u.kind()
            )));
        }
        Ok(())
    }

    fn check_shape(&self, f: &GridField) -> Result<()> {
        if f.shape() != self.shape.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: self.n_nodes(),
                actual: f.n_nodes(),
            });
        }
        Ok(())
    }

    pub fn gradient(&self, f: &GridField) -> Result<GridField> {
        self.check_scalar(f)?;
        let comps = (0..self.dim())
            .map(|a| self.partial(a, f.as_slice()))
            .collect();
        self.vector_field(comps)
    }

    pub fn divergence(&self, u: &GridField) -> Result<GridField> {
        self.check_vector(u, self.dim())?;
        let mut acc = vec![0.0; self.n_nodes()];
        for a in 0..self.dim() {
            for (s, v) in acc.iter_mut().zip(self.partial(a, u.component(a))) {
                *s += v;
            }
        }
        self.scalar_field(acc)
    }

    /// 2D: `curl u = -D_2 u_1 + D_1 u_2` (scalar). 3D: the classical curl.
    pub fn curl(&self, u: &GridField) -> Result<GridField> {
        self.check_vector(u, self.dim())?;
        match self.dim() {
            2 => {
                let a = self.partial(1, u.component(0));
                let b = self.partial(0, u.component(1));
                self.scalar_field(b.iter().zip(&a).map(|(b, a)| b - a).collect())
            }
            _ => {
                let diff = |i: usize, ci: usize, j: usize, cj: usize| -> Vec<f64> {
                    let p = self.partial(i, u.component(ci));
                    let q = self.partial(j, u.component(cj));
                    p.iter().zip(&q).map(|(p, q)| p - q).collect()
                };
                self.vector_field(vec![diff(1, 2, 2, 1), diff(2, 0, 0, 2), diff(0, 1, 1, 0)])
            }
        }
    }

    /// 2D only: `rot v = (D_2 v, -D_1 v)`.
    pub fn rot(&self, v: &GridField) -> Result<GridField> {
        if self.dim() != 2 {
            return Err(Error::WrongDimension {
                expected: 2,
                actual: self.dim(),
            });
        }
        self.check_scalar(v)?;
        let first = self.partial(1, v.as_slice());
        let second = self.partial(0, v.as_slice()).iter().map(|x| -x).collect();
        self.vector_field(vec![first, second])
    }

    /// The solenoidal operator of this dimension: `rot` (scalar potential) in
    /// 2D, `curl` (vector potential) in 3D.
    pub fn solenoidal(&self, potential: &GridField) -> Result<GridField> {
        if self.dim() == 2 {
            self.rot(potential)
        } else {
            self.curl(potential)
        }
    }

    /// `<a, b>_M` with the block mass `I_d (x) M` for vector fields.
    pub fn inner_product(&self, a: &GridField, b: &GridField) -> Result<f64> {
        self.check_shape(a)?;
        if !a.same_layout(b) {
            return Err(Error::DimensionMismatch {
                expected: a.as_slice().len(),
                actual: b.as_slice().len(),
            });
        }
        Ok(a.components()
            .zip(b.components())
            .map(|(x, y)| self.dot(x, y))
            .sum())
    }

    pub fn m_norm(&self, a: &GridField) -> Result<f64> {
        Ok(self.inner_product(a, a)?.sqrt())
    }

    /// `<x, y>_M` on flat scalar arrays.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.mass)
            .map(|((a, b), m)| a * b * m)
            .sum()
    }

    /// Diagonal of `E_axis` over all nodes.
    pub fn boundary_weights(&self, axis: usize) -> Vec<f64> {
        let factors: Vec<Vec<f64>> = self
            .axes
            .iter()
            .enumerate()
            .map(|(a, op)| {
                if a == axis {
                    op.boundary_diagonal()
                } else {
                    op.mass().to_vec()
                }
            })
            .collect();
        let refs: Vec<&[f64]> = factors.iter().map(Vec::as_slice).collect();
        outer_product(&refs)
    }

    /// `f^T E_axis g`.
    pub fn boundary_form(&self, axis: usize, f: &[f64], g: &[f64]) -> f64 {
        self.boundary_weights(axis)
            .iter()
            .zip(f)
            .zip(g)
            .map(|((e, a), b)| e * a * b)
            .sum()
    }

    /// Removes the single-axis oscillations `osc_1..osc_d` from each
    /// component by `M`-orthogonal projection.
    pub fn filter(&self, u: &GridField) -> Result<GridField> {
        let basis: Vec<&[f64]> = self.osc.singles.iter().map(Vec::as_slice).collect();
        self.project_out(u, &basis)
    }

    /// Like [`TensorOps::filter`], but also removes the pair and triple
    /// oscillation fields.
    pub fn filter_extended(&self, u: &GridField) -> Result<GridField> {
        let basis = self.osc.all();
        self.project_out(u, &basis)
    }

    fn project_out(&self, u: &GridField, basis: &[&[f64]]) -> Result<GridField> {
        self.check_shape(u)?;
        let mut out = u.clone();
        for c in 0..u.n_components() {
            let comp = u.component(c);
            let coeffs: Vec<f64> = basis
                .iter()
                .map(|b| self.dot(b, comp) / self.dot(b, b))
                .collect();
            let target = out.component_mut(c);
            for (b, k) in basis.iter().zip(coeffs) {
                for (t, v) in target.iter_mut().zip(b.iter()) {
                    *t -= k * v;
                }
            }
        }
        Ok(out)
    }

    /// Mean `<f, 1>_M / <1, 1>_M` of a flat scalar array.
    pub fn mean(&self, f: &[f64]) -> f64 {
        let total: f64 = self.mass.iter().sum();
        f.iter().zip(&self.mass).map(|(v, m)| v * m).sum::<f64>() / total
    }

    /// Returns `f - mean(f)`.
    pub fn remove_mean(&self, f: &GridField) -> GridField {
        let mut out = f.clone();
        for c in 0..f.n_components() {
            let m = self.mean(f.component(c));
            for v in out.component_mut(c) {
                *v -= m;
            }
        }
        out
    }

    /// Collects the values of a flat scalar array on the hyperplane where
    /// every axis in `fixed` sits at its first node.
    pub fn restrict_to_first_nodes(&self, f: &[f64], fixed: &[usize]) -> Vec<f64> {
        (0..self.n_nodes())
            .filter(|&k| {
                let idx = self.index_of(k);
                fixed.iter().all(|&a| idx[a] == 0)
            })
            .map(|k| f[k])
            .collect()
    }
}
