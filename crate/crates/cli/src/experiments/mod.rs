pub mod convergence;
pub mod mhd;
pub mod oscillations;
pub mod remainder;
pub mod theorems;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use sbp_hodge::{field_io, GridField, TensorOps};
use serde::Serialize;

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value)?;
    Ok(())
}

pub fn write_field(
    dir: &Path,
    name: &str,
    ops: &TensorOps,
    field: &GridField,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    field_io::write_csv(ops, field, BufWriter::new(file))?;
    Ok(())
}

/// `||a - b||_M / ||b||_M` over the nodes selected by `keep`.
pub fn relative_error(
    ops: &TensorOps,
    a: &GridField,
    b: &GridField,
    keep: impl Fn(&[f64]) -> bool,
) -> f64 {
    let weights: Vec<f64> = (0..ops.n_nodes())
        .map(|k| {
            if keep(&ops.coordinates(k)) {
                ops.mass()[k]
            } else {
                0.0
            }
        })
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for (ca, cb) in a.components().zip(b.components()) {
        for ((x, y), w) in ca.iter().zip(cb).zip(&weights) {
            num += w * (x - y).powi(2);
            den += w * y * y;
        }
    }
    (num / den).sqrt()
}

pub fn everywhere(_: &[f64]) -> bool {
    true
}
