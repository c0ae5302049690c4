//! Convergence of the decomposition for the planar and spatial test problems.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use sbp_hodge::hodge::project_im_curl;
use sbp_hodge::{helmholtz, GridField, HodgeOptions, TensorOps};
use serde::Serialize;

use super::{everywhere, relative_error, write_json};
use crate::config::ExperimentConfig;
use crate::problems::{planar, spatial};

/// Negative least-squares slope of `log(err)` against `log(n)`.
pub fn eoc(sizes: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Relative `M`-norm errors keyed by quantity.
    pub errors: BTreeMap<String, f64>,
    /// Slopes against the previous row; empty for the first row.
    pub eoc: BTreeMap<String, f64>,
    pub iterations: (usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub dim: usize,
    pub order: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slopes over all rows.
    pub eoc: BTreeMap<String, f64>,
}

impl ConvergenceTable {
    pub fn write_csv(&self, path: &Path) -> anyhow::Result<()> {
        let keys: Vec<&String> = self.rows[0].errors.keys().collect();
        let mut out = csv::Writer::from_path(path)?;
        let mut header = vec!["n".to_string()];
        header.extend(keys.iter().map(|k| format!("err_{k}")));
        header.extend(keys.iter().map(|k| format!("eoc_{k}")));
        out.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.n.to_string()];
            rec.extend(keys.iter().map(|k| row.errors[*k].to_string()));
            rec.extend(
                keys.iter()
                    .map(|k| row.eoc.get(*k).map_or(String::new(), f64::to_string)),
            );
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        let stem = format!("convergence_{}d_order{}", self.dim, self.order);
        self.write_csv(&dir.join(format!("{stem}.csv")))?;
        write_json(dir, &format!("{stem}.json"), self)
    }
}

fn mean_adjusted_error(ops: &TensorOps, computed: &GridField, exact: &GridField) -> f64 {
    relative_error(
        ops,
        &ops.remove_mean(computed),
        &ops.remove_mean(exact),
        everywhere,
    )
}

fn errors_for(cfg: &ExperimentConfig, dim: usize, n: usize) -> anyhow::Result<ConvergenceRow> {
    let ops = cfg.operators(dim, n)?;
    let options = HodgeOptions {
        solver: cfg.solver,
        krylov: cfg.krylov(),
        order: cfg.projection_order,
    };
    let mut errors = BTreeMap::new();
    let (u, phi, u_irr, u_sol) = if dim == 2 {
        (
            ops.sample_vector(2, planar::u),
            ops.sample_scalar(planar::phi),
            ops.sample_vector(2, planar::u_irr),
            ops.sample_vector(2, planar::u_sol),
        )
    } else {
        (
            ops.sample_vector(3, spatial::u),
            ops.sample_scalar(spatial::phi),
            ops.sample_vector(3, spatial::u_irr),
            ops.sample_vector(3, spatial::u_sol),
        )
    };
    let d = helmholtz(&ops, &u, &options)?;
    errors.insert("phi".into(), mean_adjusted_error(&ops, &d.phi, &phi));
    errors.insert(
        "u_irr".into(),
        relative_error(&ops, &d.grad_phi, &u_irr, everywhere),
    );
    errors.insert(
        "u_sol".into(),
        relative_error(&ops, &d.sol_part, &u_sol, everywhere),
    );
    errors.insert(
        "remainder".into(),
        ops.m_norm(&d.remainder)? / ops.m_norm(&u)?,
    );
    if dim == 2 {
        let v = ops.sample_scalar(planar::v);
        errors.insert("v".into(), mean_adjusted_error(&ops, &d.v, &v));
    } else {
        let v = ops.sample_vector(3, spatial::v);
        errors.insert("v".into(), relative_error(&ops, &d.v, &v, everywhere));
        // Gauge-free comparison: the least-norm potential of curl(v_exact).
        let reference = project_im_curl(&ops, &ops.curl(&v)?, cfg.solver, &cfg.krylov())?;
        errors.insert(
            "v_projected".into(),
            relative_error(&ops, &d.v, &reference.potential, everywhere),
        );
    }
    Ok(ConvergenceRow {
        n,
        errors,
        eoc: BTreeMap::new(),
        iterations: (
            d.diagnostics.grad_stage.iterations,
            d.diagnostics.sol_stage.iterations,
        ),
    })
}

/// Runs the decomposition for every configured size (in parallel) and
/// tabulates errors and convergence orders.
pub fn convergence(cfg: &ExperimentConfig, dim: usize) -> anyhow::Result<ConvergenceTable> {
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        anyhow::bail!("a convergence study needs at least two grid sizes");
    }
    let mut rows = sizes
        .par_iter()
        .map(|&n| errors_for(cfg, dim, n))
        .collect::<anyhow::Result<Vec<_>>>()?;
    for i in 1..rows.len() {
        let (prev, cur) = rows.split_at_mut(i);
        let (a, b) = (&prev[i - 1], &mut cur[0]);
        for (k, e) in &b.errors {
            let slope = eoc(&[a.n, b.n], &[a.errors[k], *e]);
            b.eoc.insert(k.clone(), slope);
        }
    }
    let eoc = rows[0]
        .errors
        .keys()
        .map(|k| {
            let errs: Vec<f64> = rows.iter().map(|r| r.errors[k]).collect();
            (k.clone(), eoc(&sizes, &errs))
        })
        .collect();
    Ok(ConvergenceTable {
        dim,
        order: cfg.order,
        rows,
        eoc,
    })
}
