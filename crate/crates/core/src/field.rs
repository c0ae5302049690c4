//! Scalar and vector grid functions on a tensor-product grid.
//!
//! Node `(i_1, .., i_d)` lives at flat index `((i_1 N_2 + i_2) N_3 + i_3)`,
//! i.e. the first axis is outermost, matching `D_1 = D_x (x) I_y (x) I_z`.
//! Vector components are stored one after another.

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Scalar,
    Vector(usize),
}

impl FieldKind {
    pub fn components(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    shape: Vec<usize>,
    kind: FieldKind,
    data: Vec<f64>,
}

pub(crate) fn node_count(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl GridField {
    pub fn new(shape: Vec<usize>, kind: FieldKind, data: Vec<f64>) -> Result<Self> {
        let expected = node_count(&shape) * kind.components();
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        if let FieldKind::Vector(0) = kind {
            return Err(Error::KindMismatch(
                "vector field without components".into(),
            ));
        }
        Ok(Self { shape, kind, data })
    }

    pub fn scalar(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        Self::new(shape.to_vec(), FieldKind::Scalar, data)
    }

    pub fn vector(shape: &[usize], components: Vec<Vec<f64>>) -> Result<Self> {
        let count = components.len();
        let data: Vec<f64> = components.into_iter().flatten().collect();
        Self::new(shape.to_vec(), FieldKind::Vector(count), data)
    }

    pub fn zeros(shape: &[usize], kind: FieldKind) -> Self {
        let len = node_count(shape) * kind.components();
        Self {
            shape: shape.to_vec(),
            kind,
            data: vec![0.0; len],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.shape, self.kind)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn is_scalar(&self) -> bool {
        self.kind == FieldKind::Scalar
    }

    pub fn n_components(&self) -> usize {
        self.kind.components()
    }

    pub fn n_nodes(&self) -> usize {
        node_count(&self.shape)
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.n_nodes();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.n_nodes();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn components(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n_nodes().max(1))
    }

    /// Flat data, components concatenated.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Same shape and kind, new data.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.shape.clone(), self.kind, data)
    }

    pub fn same_layout(&self, other: &GridField) -> bool {
        self.shape == other.shape && self.kind == other.kind
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            kind: self.kind,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> GridField {
        assert!(
            self.same_layout(other),
            "field layout mismatch: {:?}/{:?} vs {:?}/{:?}",
            self.shape,
            self.kind,
            other.shape,
            other.kind
        );
        GridField {
            shape: self.shape.clone(),
            kind: self.kind,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for &GridField {
    type Output = GridField;

    fn add(self, rhs: &GridField) -> GridField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &GridField {
    type Output = GridField;

    fn sub(self, rhs: &GridField) -> GridField {
        self.zip_with(rhs, |a, b| a - b)
    }
}
