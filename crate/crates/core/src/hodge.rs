//! Discrete Helmholtz Hodge decompositions `u = grad phi + curl v + r`
//! (`rot v` in 2D) by two successive `M`-orthogonal projections.
//!
//! Each projection is a least-norm least-squares problem in the `M`-norm.
//! Substituting `psi = sqrt(M) phi` turns it into a Euclidean problem for
//! `sqrt(M_vec) grad sqrt(M)^{-1}`, which is handed to LSQR or LSMR.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::GridField;
use crate::krylov::{KrylovOptions, LinearMap, SolveStats, Solver, StopReason};
use crate::maps::{DiffOperator, OperatorMap};
use crate::tensor::TensorOps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionOrder {
    #[default]
    GradFirst,
    CurlFirst,
}

impl FromStr for ProjectionOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "grad-first" | "grad" => Ok(ProjectionOrder::GradFirst),
            "curl-first" | "curl" | "rot-first" | "rot" => Ok(ProjectionOrder::CurlFirst),
            other => Err(format!(
                "unknown projection order '{other}' (expected grad-first or curl-first)"
            )),
        }
    }
}

impl fmt::Display for ProjectionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjectionOrder::GradFirst => "grad-first",
            ProjectionOrder::CurlFirst => "curl-first",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HodgeOptions {
    pub solver: Solver,
    pub krylov: KrylovOptions,
    pub order: ProjectionOrder,
}

/// Result of projecting onto the image of `grad` or of `rot`/`curl`.
#[derive(Debug, Clone)]
pub struct Projection {
    /// `phi` (mean zero) or the least-norm vector potential `v`.
    pub potential: GridField,
    /// `grad phi` or `rot v` / `curl v`.
    pub image: GridField,
    pub stats: SolveStats,
}

/// Compact solver summary for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub final_normal_residual_norm: f64,
    pub stop_reason: StopReason,
}

impl From<&SolveStats> for StageSummary {
    fn from(s: &SolveStats) -> Self {
        Self {
            iterations: s.iterations,
            final_residual_norm: s.final_residual_norm,
            final_normal_residual_norm: s.final_normal_residual_norm,
            stop_reason: s.stop_reason,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodgeDiagnostics {
    pub projection_order: ProjectionOrder,
    pub solver: Solver,
    /// `<w - grad phi, grad phi>_M`, `w` being the input of the gradient stage.
    pub grad_orthogonality: f64,
    /// `<w - s, s>_M`, `s` the solenoidal part and `w` the input of its stage.
    pub sol_orthogonality: f64,
    /// `<r, grad phi>_M`
    pub remainder_grad_inner: f64,
    /// `<r, s>_M`
    pub remainder_sol_inner: f64,
    pub norm_u: f64,
    pub norm_grad_phi: f64,
    pub norm_sol_part: f64,
    pub norm_remainder: f64,
    pub grad_stage: StageSummary,
    pub sol_stage: StageSummary,
}

#[derive(Debug, Clone)]
pub struct HodgeDecomposition {
    pub phi: GridField,
    pub v: GridField,
    pub grad_phi: GridField,
    pub sol_part: GridField,
    pub remainder: GridField,
    pub diagnostics: HodgeDiagnostics,
}

fn solve_scaled(
    ops: &TensorOps,
    operator: DiffOperator,
    u: &GridField,
    solver: Solver,
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, SolveStats)> {
    let map = OperatorMap::new(ops, operator)?.scaled();
    let n = ops.n_nodes();
    if u.as_slice().len() != map.nrows() {
        return Err(crate::Error::DimensionMismatch {
            expected: map.nrows(),
            actual: u.as_slice().len(),
        });
    }
    let sqrt_mass: Vec<f64> = ops.mass().iter().map(|m| m.sqrt()).collect();
    let b: Vec<f64> = u
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, v)| v * sqrt_mass[k % n])
        .collect();
    let (psi, stats) = solver.solve(&map, &b, opts)?;
    let x = psi
        .iter()
        .enumerate()
        .map(|(k, p)| p / sqrt_mass[k % n])
        .collect();
    Ok((x, stats))
}

fn check_input(ops: &TensorOps, u: &GridField) -> Result<()> {
    if u.shape() != ops.shape() || u.is_scalar() || u.n_components() != ops.dim() {
        return Err(crate::Error::KindMismatch(format!(
            "expected a {}-component vector field on shape {:?}",
            ops.dim(),
            ops.shape()
        )));
    }
    Ok(())
}

/// `M`-orthogonal projection of `u` onto `im grad`.
pub fn project_im_grad(
    ops: &TensorOps,
    u: &GridField,
    solver: Solver,
    opts: &KrylovOptions,
) -> Result<Projection> {
    check_input(ops, u)?;
    let (phi, stats) = solve_scaled(ops, DiffOperator::Gradient, u, solver, opts)?;
    let phi = ops.remove_mean(&ops.scalar_field(phi)?);
    let image = ops.gradient(&phi)?;
    Ok(Projection {
        potential: phi,
        image,
        stats,
    })
}

/// `M`-orthogonal projection of `u` onto `im rot` (2D) or `im curl` (3D).
pub fn project_im_curl(
    ops: &TensorOps,
    u: &GridField,
    solver: Solver,
    opts: &KrylovOptions,
) -> Result<Projection> {
    check_input(ops, u)?;
    let operator = if ops.dim() == 2 {
        DiffOperator::Rot
    } else {
        DiffOperator::Curl
    };
    let (v, stats) = solve_scaled(ops, operator, u, solver, opts)?;
    let potential = if ops.dim() == 2 {
        ops.scalar_field(v)?
    } else {
        let n = ops.n_nodes();
        ops.vector_field(v.chunks(n).map(<[f64]>::to_vec).collect())?
    };
    let image = ops.solenoidal(&potential)?;
    Ok(Projection {
        potential,
        image,
        stats,
    })
}

pub fn helmholtz(
    ops: &TensorOps,
    u: &GridField,
    options: &HodgeOptions,
) -> Result<HodgeDecomposition> {
    check_input(ops, u)?;
    let HodgeOptions {
        solver,
        krylov,
        order,
    } = *options;
    let (grad, sol, grad_input, sol_input) = match order {
        ProjectionOrder::GradFirst => {
            let grad = project_im_grad(ops, u, solver, &krylov)?;
            let rest = u - &grad.image;
            let sol = project_im_curl(ops, &rest, solver, &krylov)?;
            (grad, sol, u.clone(), rest)
        }
        ProjectionOrder::CurlFirst => {
            let sol = project_im_curl(ops, u, solver, &krylov)?;
            let rest = u - &sol.image;
            let grad = project_im_grad(ops, &rest, solver, &krylov)?;
            (grad, sol, rest, u.clone())
        }
    };
    let remainder = &(u - &grad.image) - &sol.image;

    let ip = |a: &GridField, b: &GridField| ops.inner_product(a, b);
    let diagnostics = HodgeDiagnostics {
        projection_order: order,
        solver,
        grad_orthogonality: ip(&(&grad_input - &grad.image), &grad.image)?,
        sol_orthogonality: ip(&(&sol_input - &sol.image), &sol.image)?,
        remainder_grad_inner: ip(&remainder, &grad.image)?,
        remainder_sol_inner: ip(&remainder, &sol.image)?,
        norm_u: ops.m_norm(u)?,
        norm_grad_phi: ops.m_norm(&grad.image)?,
        norm_sol_part: ops.m_norm(&sol.image)?,
        norm_remainder: ops.m_norm(&remainder)?,
        grad_stage: (&grad.stats).into(),
        sol_stage: (&sol.stats).into(),
    };
    Ok(HodgeDecomposition {
        phi: grad.potential,
        v: sol.potential,
        grad_phi: grad.image,
        sol_part: sol.image,
        remainder,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_projection_order() {
        assert_eq!("grad-first".parse(), Ok(ProjectionOrder::GradFirst));
        assert_eq!("CURL_FIRST".parse(), Ok(ProjectionOrder::CurlFirst));
        assert!("sideways".parse::<ProjectionOrder>().is_err());
        assert_eq!(ProjectionOrder::CurlFirst.to_string(), "curl-first");
    }

    #[test]
    fn zero_field_decomposes_into_zeros() {
        let ops = TensorOps::uniform(2, 2, -1.0, 1.0, 8).unwrap();
        let d = helmholtz(&ops, &ops.zeros_vector(), &HodgeOptions::default()).unwrap();
        for f in [&d.phi, &d.v, &d.grad_phi, &d.sol_part, &d.remainder] {
            assert_eq!(f.max_abs(), 0.0);
        }
    }

    #[test]
    fn gradient_is_recovered() {
        let ops = TensorOps::uniform(4, 2, -1.0, 1.0, 12).unwrap();
        let f = ops.remove_mean(&ops.sample_scalar(|x| (x[0] + 2.0 * x[1]).sin()));
        let u = ops.gradient(&f).unwrap();
        let p = project_im_grad(&ops, &u, Solver::Lsqr, &KrylovOptions::with_tol(1e-13)).unwrap();
        let err = ops.m_norm(&(&p.potential - &f)).unwrap() / ops.m_norm(&f).unwrap();
        assert!(err < 1e-8, "{err}");
        assert!(ops.mean(p.potential.as_slice()).abs() < 1e-13);
    }
}
