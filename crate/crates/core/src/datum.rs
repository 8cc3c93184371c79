//! Initial-datum constructors: self-similar profiles, smooth bumps, zero
//! data, tabulated profiles from disk, and the mollified ladder data
//! `u_{0,h} = min(u_0, h) * cutoff_h`.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DiscreteField, RadialGrid};
use crate::io::read_two_column;
use crate::numerics::quintic_taper;
use crate::oracles::BarenblattSpec;

/// Declarative initial-datum specification, as it appears in run configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatumSpec {
    Zero,
    /// `amplitude * exp(1 - 1/(1 - (r/radius)^2))` inside `radius`, 0 outside.
    Bump { amplitude: f64, radius: f64 },
    /// Self-similar source-free profile at time `t0` with the given mass
    /// (uses the `m`, `p` of the run and the grid dimension).
    Barenblatt { mass: f64, t0: f64 },
    /// Two-column `(r, u)` table, linearly interpolated, zero beyond the
    /// last tabulated radius.
    File { path: PathBuf },
}

/// Smooth compactly supported mollifier bump, normalized to `amplitude` at
/// the origin.
pub fn bump_profile(amplitude: f64, radius: f64, r: f64) -> f64 {
    let x = r / radius;
    if x >= 1.0 {
        return 0.0;
    }
    amplitude * (1.0 - 1.0 / (1.0 - x * x)).exp()
}

impl DatumSpec {
    /// Realize the datum on a grid. `m`, `p` are the evolution exponents
    /// (needed by the self-similar profile).
    pub fn build(&self, grid: &Arc<RadialGrid>, m: f64, p: f64) -> Result<DiscreteField> {
        match self {
            DatumSpec::Zero => Ok(DiscreteField::zeros(grid.clone())),
            DatumSpec::Bump { amplitude, radius } => {
                if !(*amplitude >= 0.0) || !(*radius > 0.0) {
                    return Err(Error::Config(format!(
                        "bump needs amplitude >= 0 and radius > 0, got ({amplitude}, {radius})"
                    )));
                }
                Ok(DiscreteField::from_profile(grid.clone(), |r| {
                    bump_profile(*amplitude, *radius, r)
                }))
            }
            DatumSpec::Barenblatt { mass, t0 } => {
                let spec = BarenblattSpec::new(m, p, grid.manifold().dimension(), *mass, *t0)?;
                spec.sample(grid.clone(), *t0)
            }
            DatumSpec::File { path } => {
                let table = read_two_column(path)?;
                if table.is_empty() {
                    return Err(Error::Config(format!(
                        "datum table {} is empty",
                        path.display()
                    )));
                }
                if table.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Config(format!(
                        "datum table {} must have strictly increasing radii",
                        path.display()
                    )));
                }
                Ok(DiscreteField::from_profile(grid.clone(), |r| {
                    interp_linear(&table, r)
                }))
            }
        }
    }
}

fn interp_linear(table: &[(f64, f64)], r: f64) -> f64 {
    let last = table.len() - 1;
    if r <= table[0].0 {
        return table[0].1;
    }
    if r >= table[last].0 {
        return 0.0;
    }
    let idx = table.partition_point(|&(x, _)| x <= r) - 1;
    let (x0, y0) = table[idx];
    let (x1, y1) = table[idx + 1];
    y0 + (y1 - y0) * (r - x0) / (x1 - x0)
}

/// Mollified ladder datum: cap at `h` and cut off smoothly at radius `h`
/// (quintic taper over the outer 10%). Monotone non-decreasing in `h`
/// pointwise, stabilizing once `h` dominates both the sup and the support.
pub fn ladder_datum(u0: &DiscreteField, h: f64) -> Result<DiscreteField> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("ladder level must be positive, got {h}")));
    }
    let grid = u0.grid().clone();
    let centers = grid.cell_centers().to_vec();
    let values = u0
        .values()
        .iter()
        .zip(&centers)
        .map(|(&v, &r)| v.min(h) * quintic_taper((r - 0.9 * h) / (0.1 * h)))
        .collect();
    DiscreteField::new(grid, values)
}
