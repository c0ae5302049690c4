//! Experiment configuration: an optional flat key-value file (TOML, or JSON
//! for `.json` paths) overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use sbp_hodge::sbp::minimum_nodes;
use sbp_hodge::{Grid1D, KrylovOptions, ProjectionOrder, SbpOperator1D, Solver, TensorOps};
use serde::{Deserialize, Serialize};

/// Environment variable enabling the corrupted-operator negative control.
pub const BREAK_OPERATOR_ENV: &str = "SBP_HODGE_BREAK_OPERATOR";

/// Size of the stencil corruption used by the negative control.
pub const BREAK_DELTA: f64 = 1e-3;

/// Relative tolerance on `M D + D^T M - E` accepted for experiment operators.
pub const SBP_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub order: Option<usize>,
    pub n: Option<SizeList>,
    pub dim: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub solver: Option<String>,
    pub projection_order: Option<String>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub k1: Option<f64>,
    pub k3: Option<f64>,
    pub eps_a: Option<f64>,
    pub eps_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SizeList {
    One(usize),
    Many(Vec<usize>),
}

impl SizeList {
    pub fn into_vec(self) -> Vec<usize> {
        match self {
            SizeList::One(n) => vec![n],
            SizeList::Many(v) => v,
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(anyhow::Error::from)
        } else {
            toml::from_str(&text).map_err(anyhow::Error::from)
        };
        parsed.with_context(|| format!("parsing config file {}", path.display()))
    }
}

/// Resolved settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub order: usize,
    pub sizes: Vec<usize>,
    pub dim: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub solver: Solver,
    pub projection_order: ProjectionOrder,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub break_operator: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            order: 2,
            sizes: vec![6],
            dim: 2,
            x_min: -1.0,
            x_max: 1.0,
            solver: Solver::Lsqr,
            projection_order: ProjectionOrder::GradFirst,
            tol: 1e-10,
            out: None,
            seed: 0,
            break_operator: false,
        }
    }
}

impl ExperimentConfig {
    pub fn krylov(&self) -> KrylovOptions {
        KrylovOptions::with_tol(self.tol)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let min = minimum_nodes(self.order)?;
        if self.sizes.is_empty() {
            bail!("no grid sizes given");
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < min) {
            bail!(
                "grid size {n} is below the minimum {min} for order {}",
                self.order
            );
        }
        if !(2..=3).contains(&self.dim) {
            bail!("dimension must be 2 or 3, got {}", self.dim);
        }
        if self.x_min.is_nan() || self.x_max.is_nan() || self.x_min >= self.x_max {
            bail!("empty domain [{}, {}]", self.x_min, self.x_max);
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            bail!("tolerance must be positive, got {}", self.tol);
        }
        Ok(())
    }

    /// Operators for an `n^dim` grid, corrupted when the negative control is
    /// enabled.
    pub fn operators(&self, dim: usize, n: usize) -> sbp_hodge::Result<TensorOps> {
        build_operators(
            self.order,
            dim,
            self.x_min,
            self.x_max,
            n,
            self.break_operator,
        )
    }
}

pub fn build_operators(
    order: usize,
    dim: usize,
    x_min: f64,
    x_max: f64,
    n: usize,
    broken: bool,
) -> sbp_hodge::Result<TensorOps> {
    let grid = Grid1D::new(x_min, x_max, n)?;
    let axes = (0..dim)
        .map(|_| axis_operator(order, grid, broken))
        .collect::<sbp_hodge::Result<Vec<_>>>()?;
    TensorOps::from_axes(axes)
}

/// One-dimensional operator whose SBP identity has been checked.
pub fn axis_operator(order: usize, grid: Grid1D, broken: bool) -> sbp_hodge::Result<SbpOperator1D> {
    let op = if broken {
        SbpOperator1D::new_perturbed(order, grid, BREAK_DELTA)?
    } else {
        SbpOperator1D::new(order, grid)?
    };
    let dense = op.dense();
    let scale = dense
        .row_iter()
        .zip(op.mass())
        .map(|(row, m)| m * row.amax())
        .fold(0.0, f64::max);
    let residual = op.sbp_residual();
    if residual > SBP_TOLERANCE * scale {
        return Err(sbp_hodge::Error::InvalidOperator(format!(
            "order {order} operator on {} nodes violates M D + D^T M = E (residual {residual:.3e})",
            op.len()
        )));
    }
    Ok(op)
}

pub fn break_operator_from_env() -> bool {
    std::env::var(BREAK_OPERATOR_ENV).is_ok_and(|v| v == "1")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let toml_path = dir.path().join("run.toml");
        std::fs::write(&toml_path, "order = 4\nn = [17, 33]\nsolver = \"lsmr\"\n").unwrap();
        let c = ConfigFile::load(&toml_path).unwrap();
        assert_eq!(c.order, Some(4));
        assert_eq!(c.n.unwrap().into_vec(), vec![17, 33]);

        let json_path = dir.path().join("run.json");
        std::fs::write(&json_path, r#"{"n": 21, "tol": 1e-12}"#).unwrap();
        let c = ConfigFile::load(&json_path).unwrap();
        assert_eq!(c.n.unwrap().into_vec(), vec![21]);
        assert_eq!(c.tol, Some(1e-12));

        std::fs::write(&toml_path, "colour = 3\n").unwrap();
        assert!(ConfigFile::load(&toml_path).is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.order = 6;
        c.sizes = vec![11];
        assert!(c.validate().is_err());
        c.order = 5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn broken_operators_are_rejected_by_the_tensor_setup() {
        assert!(build_operators(2, 2, 0.0, 1.0, 6, false).is_ok());
        assert!(build_operators(2, 2, 0.0, 1.0, 6, true).is_err());
        for order in [2, 4, 6, 8] {
            let grid = Grid1D::new(-1.0, 1.0, 40).unwrap();
            assert!(axis_operator(order, grid, false).is_ok());
            assert!(axis_operator(order, grid, true).is_err());
        }
    }
}
