//! Remainder of the planar test problem.

use std::path::Path;

use sbp_hodge::{helmholtz, GridField, HodgeDecomposition, HodgeOptions, TensorOps};
use serde::Serialize;

use super::{write_field, write_json};
use crate::config::ExperimentConfig;
use crate::problems::planar;

#[derive(Debug, Clone, Serialize)]
pub struct RemainderSummary {
    pub order: usize,
    pub n: usize,
    /// `||r||_inf / ||u||_inf`
    pub remainder_max_ratio: f64,
    /// `||r||_M / ||u||_M`
    pub remainder_norm_ratio: f64,
    /// `|<u - grad phi, grad phi>_M| / ||u||_M^2` and friends.
    pub grad_orthogonality_relative: f64,
    pub sol_orthogonality_relative: f64,
    /// `max |u - grad phi - sol_part - r|`
    pub additivity_defect: f64,
    pub diagnostics: sbp_hodge::HodgeDiagnostics,
}

pub struct RemainderRun {
    pub ops: TensorOps,
    pub u: GridField,
    pub decomposition: HodgeDecomposition,
    pub summary: RemainderSummary,
}

pub fn remainder(cfg: &ExperimentConfig) -> anyhow::Result<RemainderRun> {
    let n = cfg.sizes[0];
    let ops = cfg.operators(2, n)?;
    let u = ops.sample_vector(2, planar::u);
    let options = HodgeOptions {
        solver: cfg.solver,
        krylov: cfg.krylov(),
        order: cfg.projection_order,
    };
    let d = helmholtz(&ops, &u, &options)?;
    let diag = d.diagnostics.clone();
    let u2 = diag.norm_u.powi(2);
    let defect = &(&(&u - &d.grad_phi) - &d.sol_part) - &d.remainder;
    let summary = RemainderSummary {
        order: cfg.order,
        n,
        remainder_max_ratio: d.remainder.max_abs() / u.max_abs(),
        remainder_norm_ratio: diag.norm_remainder / diag.norm_u,
        grad_orthogonality_relative: diag.grad_orthogonality.abs() / u2,
        sol_orthogonality_relative: diag.sol_orthogonality.abs() / u2,
        additivity_defect: defect.max_abs(),
        diagnostics: diag,
    };
    Ok(RemainderRun {
        ops,
        u,
        decomposition: d,
        summary,
    })
}

impl RemainderRun {
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        write_field(dir, "u.csv", &self.ops, &self.u)?;
        write_field(dir, "grad_phi.csv", &self.ops, &self.decomposition.grad_phi)?;
        write_field(dir, "rot_v.csv", &self.ops, &self.decomposition.sol_part)?;
        write_field(
            dir,
            "remainder.csv",
            &self.ops,
            &self.decomposition.remainder,
        )?;
        write_json(dir, "diagnostics.json", &self.summary)
    }
}
