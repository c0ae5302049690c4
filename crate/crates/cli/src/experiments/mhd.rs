//! Separation of linear MHD wave-mode currents in the plane `x3 = 0`.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use sbp_hodge::{
    helmholtz, GridField, HodgeDiagnostics, HodgeOptions, KrylovOptions, ProjectionOrder, Solver,
    TensorOps,
};
use serde::Serialize;

use super::{everywhere, relative_error, write_field, write_json};
use crate::config::build_operators;
use crate::problems::WaveField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MhdConfig {
    pub k1: f64,
    pub k3: f64,
    pub eps_a: f64,
    pub eps_m: f64,
    pub n: usize,
    pub order: usize,
    pub projection_order: ProjectionOrder,
}

impl MhdConfig {
    pub fn wave(&self) -> WaveField {
        WaveField {
            k1: self.k1,
            k3: self.k3,
            eps_a: self.eps_a,
            eps_m: self.eps_m,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.eps_a < 0.0 || self.eps_m < 0.0 {
            anyhow::bail!("wave amplitudes must be nonnegative");
        }
        if self.eps_a == 0.0 && self.eps_m == 0.0 {
            anyhow::bail!("at least one wave amplitude must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoPlaneNode {
    pub n: usize,
}

impl fmt::Display for NoPlaneNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no grid node on the plane x3 = 0 with {} nodes on [-1, 1]",
            self.n
        )
    }
}

impl std::error::Error for NoPlaneNode {}

#[derive(Debug, Clone, Serialize)]
pub struct MhdReport {
    pub config: MhdConfig,
    pub alfven_global_error: f64,
    pub alfven_interior_error: f64,
    pub magnetosonic_global_error: f64,
    pub magnetosonic_interior_error: f64,
    /// Discrete `j_perp` against the analytic current.
    pub current_interior_error: f64,
    pub diagnostics: HodgeDiagnostics,
}

pub struct MhdRun {
    pub ops: TensorOps,
    pub j_perp: GridField,
    pub grad_phi: GridField,
    pub rot_v: GridField,
    pub remainder: GridField,
    pub report: MhdReport,
}

/// Central square with half the side length of `[-1, 1]^2`.
pub fn in_interior(x: &[f64]) -> bool {
    x.iter().all(|c| c.abs() <= 0.5 + 1e-12)
}

/// `(j1, j2)` of the discrete `curl B` on the plane `x3 = 0`.
fn perpendicular_current(cfg: &MhdConfig, broken: bool) -> anyhow::Result<Vec<Vec<f64>>> {
    let n = cfg.n;
    if n.is_multiple_of(2) {
        return Err(NoPlaneNode { n }.into());
    }
    let ops3 = build_operators(cfg.order, 3, -1.0, 1.0, n, broken)?;
    let wave = cfg.wave();
    let j = ops3.curl(&ops3.sample_vector(3, |x| wave.b(x)))?;
    let mid = n / 2;
    let plane: Vec<usize> = (0..n * n).map(|p| p * n + mid).collect();
    Ok((0..2)
        .map(|c| plane.iter().map(|&k| j.component(c)[k]).collect())
        .collect())
}

pub fn mhd(
    cfg: &MhdConfig,
    solver: Solver,
    krylov: KrylovOptions,
    broken: bool,
) -> anyhow::Result<MhdRun> {
    cfg.validate()?;
    let j = perpendicular_current(cfg, broken)?;
    let ops = build_operators(cfg.order, 2, -1.0, 1.0, cfg.n, broken)?;
    let j_perp = ops.vector_field(j)?;
    let options = HodgeOptions {
        solver,
        krylov,
        order: cfg.projection_order,
    };
    let d = helmholtz(&ops, &j_perp, &options)?;
    let wave = cfg.wave();
    let alfven = ops.sample_vector(2, |x| wave.alfven_current(x));
    let magnetosonic = ops.sample_vector(2, |x| wave.magnetosonic_current(x));
    let exact = &alfven + &magnetosonic;
    let report = MhdReport {
        config: *cfg,
        alfven_global_error: relative_error(&ops, &d.grad_phi, &alfven, everywhere),
        alfven_interior_error: relative_error(&ops, &d.grad_phi, &alfven, in_interior),
        magnetosonic_global_error: relative_error(&ops, &d.sol_part, &magnetosonic, everywhere),
        magnetosonic_interior_error: relative_error(&ops, &d.sol_part, &magnetosonic, in_interior),
        current_interior_error: relative_error(&ops, &j_perp, &exact, in_interior),
        diagnostics: d.diagnostics,
    };
    Ok(MhdRun {
        ops,
        j_perp,
        grad_phi: d.grad_phi,
        rot_v: d.sol_part,
        remainder: d.remainder,
        report,
    })
}

/// Errors for `k1 = k3 = k` over the given wavenumbers.
pub fn k_sweep(
    base: &MhdConfig,
    ks: &[f64],
    solver: Solver,
    krylov: KrylovOptions,
    broken: bool,
) -> anyhow::Result<Vec<MhdReport>> {
    ks.par_iter()
        .map(|&k| {
            let cfg = MhdConfig {
                k1: k,
                k3: k,
                ..*base
            };
            mhd(&cfg, solver, krylov, broken).map(|run| run.report)
        })
        .collect()
}

pub fn write_sweep_csv(path: &Path, reports: &[MhdReport]) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record([
        "k",
        "alfven_global",
        "alfven_interior",
        "magnetosonic_global",
        "magnetosonic_interior",
    ])?;
    for r in reports {
        out.write_record([
            r.config.k1.to_string(),
            r.alfven_global_error.to_string(),
            r.alfven_interior_error.to_string(),
            r.magnetosonic_global_error.to_string(),
            r.magnetosonic_interior_error.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

impl MhdRun {
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        write_field(dir, "j_perp.csv", &self.ops, &self.j_perp)?;
        write_field(dir, "grad_phi.csv", &self.ops, &self.grad_phi)?;
        write_field(dir, "rot_v.csv", &self.ops, &self.rot_v)?;
        write_field(dir, "remainder.csv", &self.ops, &self.remainder)?;
        write_json(dir, "report.json", &self.report)
    }
}
