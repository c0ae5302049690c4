//! The discrete differential operators as matrix-free [`LinearMap`]s.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::LinearMap;
use crate::tensor::{AxisOp, TensorOps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffOperator {
    Gradient,
    Divergence,
    /// Scalar-valued in 2D, vector-valued in 3D.
    Curl,
    /// 2D only.
    Rot,
}

impl DiffOperator {
    pub fn name(self) -> &'static str {
        match self {
            DiffOperator::Gradient => "grad",
            DiffOperator::Divergence => "div",
            DiffOperator::Curl => "curl",
            DiffOperator::Rot => "rot",
        }
    }
}

/// One block `sign * D_axis` mapping input component `input` to output
/// component `output`.
#[derive(Debug, Clone, Copy)]
struct Term {
    output: usize,
    input: usize,
    axis: usize,
    sign: f64,
}

const fn term(output: usize, input: usize, axis: usize, sign: f64) -> Term {
    Term {
        output,
        input,
        axis,
        sign,
    }
}

/// A differential operator acting on flat field data (components
/// concatenated), optionally in the mass-scaled form
/// `sqrt(M_out) A sqrt(M_in)^{-1}`.
#[derive(Debug, Clone)]
pub struct OperatorMap<'a> {
    ops: &'a TensorOps,
    operator: DiffOperator,
    in_components: usize,
    out_components: usize,
    terms: Vec<Term>,
    sqrt_mass: Option<Vec<f64>>,
}

impl<'a> OperatorMap<'a> {
    pub fn new(ops: &'a TensorOps, operator: DiffOperator) -> Result<Self> {
        let d = ops.dim();
        let (in_components, out_components, terms) = match (operator, d) {
            (DiffOperator::Gradient, _) => (1, d, (0..d).map(|i| term(i, 0, i, 1.0)).collect()),
            (DiffOperator::Divergence, _) => (d, 1, (0..d).map(|i| term(0, i, i, 1.0)).collect()),
            (DiffOperator::Curl, 2) => (2, 1, vec![term(0, 0, 1, -1.0), term(0, 1, 0, 1.0)]),
            (DiffOperator::Curl, 3) => (
                3,
                3,
                vec![
                    term(0, 2, 1, 1.0),
                    term(0, 1, 2, -1.0),
                    term(1, 0, 2, 1.0),
                    term(1, 2, 0, -1.0),
                    term(2, 1, 0, 1.0),
                    term(2, 0, 1, -1.0),
                ],
            ),
            (DiffOperator::Rot, 2) => (1, 2, vec![term(0, 0, 1, 1.0), term(1, 0, 0, -1.0)]),
            (DiffOperator::Curl, _) => {
                return Err(Error::WrongDimension {
                    expected: 3,
                    actual: d,
                })
            }
            (DiffOperator::Rot, _) => {
                return Err(Error::WrongDimension {
                    expected: 2,
                    actual: d,
                })
            }
        };
        Ok(Self {
            ops,
            operator,
            in_components,
            out_components,
            terms,
            sqrt_mass: None,
        })
    }

    /// The operator conjugated with the square root of the mass matrix, so
    /// that Euclidean least squares in the scaled variables is `M`-weighted
    /// least squares in the original ones.
    pub fn scaled(mut self) -> Self {
        self.sqrt_mass = Some(self.ops.mass().iter().map(|m| m.sqrt()).collect());
        self
    }

    pub fn operator(&self) -> DiffOperator {
        self.operator
    }

    pub fn in_components(&self) -> usize {
        self.in_components
    }

    pub fn out_components(&self) -> usize {
        self.out_components
    }

    fn run(&self, src: &[f64], dst: &mut [f64], transpose: bool) {
        let n = self.ops.n_nodes();
        let mut input = src.to_vec();
        if let Some(s) = &self.sqrt_mass {
            for (v, w) in input.chunks_mut(n).flat_map(|c| c.iter_mut().zip(s)) {
                *v = if transpose { *v * w } else { *v / w };
            }
        }
        dst.iter_mut().for_each(|v| *v = 0.0);
        let mut buf = vec![0.0; n];
        let axis_op = if transpose {
            AxisOp::Transpose
        } else {
            AxisOp::Derivative
        };
        for t in &self.terms {
            let (from, to) = if transpose {
                (t.output, t.input)
            } else {
                (t.input, t.output)
            };
            self.ops
                .apply_axis(t.axis, axis_op, &input[from * n..(from + 1) * n], &mut buf);
            for (d, b) in dst[to * n..(to + 1) * n].iter_mut().zip(&buf) {
                *d += t.sign * b;
            }
        }
        if let Some(s) = &self.sqrt_mass {
            for (v, w) in dst.chunks_mut(n).flat_map(|c| c.iter_mut().zip(s)) {
                *v = if transpose { *v / w } else { *v * w };
            }
        }
    }
}

impl LinearMap for OperatorMap<'_> {
    fn nrows(&self) -> usize {
        self.out_components * self.ops.n_nodes()
    }

    fn ncols(&self) -> usize {
        self.in_components * self.ops.n_nodes()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.run(x, y, false)
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        self.run(y, x, true)
    }
}
