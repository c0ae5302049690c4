//! One-dimensional grid oscillation vectors.

use std::io::Write;

use sbp_hodge::Grid1D;
use serde::Serialize;

use crate::config::axis_operator;

#[derive(Debug, Clone, Serialize)]
pub struct OscillationDump {
    pub order: usize,
    pub n: usize,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// `<osc, 1>_M`
    pub mass_weighted_sum: f64,
    pub m_norm: f64,
    /// Magnitude at the central node.
    pub interior_magnitude: f64,
    /// Largest relative deviation of `|osc_i|` from the central magnitude
    /// over the central half of the grid.
    pub interior_spread: f64,
    /// Signs alternate across the central half of the grid.
    pub interior_alternates: bool,
    /// Signs alternate across the whole grid.
    pub alternates_everywhere: bool,
    /// Largest relative deviation of `|osc_i|` from the central magnitude
    /// over the whole grid.
    pub max_deviation: f64,
}

impl OscillationDump {
    /// Indices `[n/4, n - n/4)`.
    pub fn interior_range(n: usize) -> std::ops::Range<usize> {
        n / 4..n - n / 4
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> anyhow::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["index", "x", "osc"])?;
        for (i, (x, v)) in self.x.iter().zip(&self.values).enumerate() {
            out.write_record([i.to_string(), x.to_string(), v.to_string()])?;
        }
        let mut inner = out.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        writeln!(inner, "# <osc,1>_M = {:e}", self.mass_weighted_sum)?;
        Ok(())
    }
}

fn alternates(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] * w[1] < 0.0)
}

pub fn oscillations(order: usize, grid: Grid1D, broken: bool) -> anyhow::Result<OscillationDump> {
    let op = axis_operator(order, grid, broken)?;
    let values = op.grid_oscillation()?.values;
    let n = values.len();
    let mass = op.mass();
    let mass_weighted_sum = values.iter().zip(mass).map(|(v, m)| v * m).sum();
    let m_norm = op.inner(&values, &values).sqrt();
    let c = values[n / 2].abs();
    let deviation = |range: std::ops::Range<usize>| {
        values[range]
            .iter()
            .map(|v| (v.abs() - c).abs() / c)
            .fold(0.0, f64::max)
    };
    let interior = OscillationDump::interior_range(n);
    Ok(OscillationDump {
        order,
        n,
        x: grid.nodes(),
        interior_magnitude: c,
        interior_spread: deviation(interior.clone()),
        interior_alternates: alternates(&values[interior]),
        alternates_everywhere: alternates(&values),
        max_deviation: deviation(0..n),
        mass_weighted_sum,
        m_norm,
        values,
    })
}
