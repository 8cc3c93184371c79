//! The (k, R, h) approximation ladder: solve the truncated ball problem
//! along an increasing triple sequence of truncation levels, ball radii and
//! mollified data, and report how probe norms move between consecutive
//! levels.
//!
//! Grids share one cell width across levels so coarser balls are exact
//! sub-grids of larger ones; once every threshold exceeds the run's dynamic
//! range the levels produce bitwise-identical trajectories.

use serde::{Deserialize, Serialize};

use crate::datum::{ladder_datum, DatumSpec};
use crate::error::{Error, Result};
use crate::evolution::{solve, EvolutionParams, Termination};
use crate::geometry::ModelManifold;
use crate::grid::build_grid;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderSpec {
    /// Truncation levels, non-decreasing (`inf` allowed).
    pub k_levels: Vec<f64>,
    /// Ball radii, non-decreasing; each must be an integer multiple of the
    /// cell width implied by the last level.
    pub r_levels: Vec<f64>,
    /// Datum mollification levels, non-decreasing.
    pub h_levels: Vec<f64>,
    /// Times at which norms are probed.
    pub probe_times: Vec<f64>,
    /// Convergence tolerance on consecutive probe-norm differences.
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeNorms {
    pub t_requested: f64,
    pub t_actual: f64,
    pub sup: f64,
    pub l1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderLevel {
    pub k: f64,
    pub radius: f64,
    pub h: f64,
    pub n_cells: usize,
    pub termination: String,
    pub probes: Vec<ProbeNorms>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LadderDiff {
    pub sup: f64,
    pub l1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderReport {
    pub levels: Vec<LadderLevel>,
    /// Max absolute probe-norm differences between consecutive levels.
    pub diffs: Vec<LadderDiff>,
    /// True when the final consecutive difference is below tolerance.
    pub converged: bool,
}

fn validate_spec(spec: &LadderSpec, params: &EvolutionParams) -> Result<()> {
    let n = spec.k_levels.len();
    if n < 2 {
        return Err(Error::Config("ladder needs at least two levels".into()));
    }
    if spec.r_levels.len() != n || spec.h_levels.len() != n {
        return Err(Error::Config(
            "ladder level sequences must have equal lengths".into(),
        ));
    }
    for (name, seq) in [("k", &spec.k_levels), ("R", &spec.r_levels), ("h", &spec.h_levels)] {
        if seq.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config(format!("ladder {name}-levels must be positive")));
        }
        if seq.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config(format!(
                "ladder {name}-levels must be non-decreasing (monotone approximation)"
            )));
        }
    }
    if spec.probe_times.is_empty()
        || spec
            .probe_times
            .iter()
            .any(|&t| !(t > 0.0) || t > params.t_end)
    {
        return Err(Error::Config(
            "probe times must be positive and within the horizon".into(),
        ));
    }
    if !(spec.tolerance > 0.0) {
        return Err(Error::Config("ladder tolerance must be positive".into()));
    }
    Ok(())
}

/// Run the ladder. `n_cells_max` is the cell count of the largest ball; all
/// levels reuse its cell width.
pub fn ladder_run(
    manifold: &ModelManifold,
    datum: &DatumSpec,
    params: &EvolutionParams,
    spec: &LadderSpec,
    n_cells_max: usize,
) -> Result<LadderReport> {
    validate_spec(spec, params)?;
    let r_max = *spec.r_levels.last().unwrap();
    let dr = r_max / n_cells_max as f64;

    let mut levels = Vec::with_capacity(spec.k_levels.len());
    for j in 0..spec.k_levels.len() {
        let radius = spec.r_levels[j];
        let n_float = radius / dr;
        let n_cells = n_float.round() as usize;
        if (n_cells as f64 - n_float).abs() > 1e-9 * n_float.max(1.0) {
            return Err(Error::Config(format!(
                "ladder radius {radius} is not a multiple of the cell width {dr}"
            )));
        }
        let grid = std::sync::Arc::new(build_grid(manifold, radius, n_cells)?);
        let u0_full = datum.build(&grid, params.m, params.p)?;
        let u0 = ladder_datum(&u0_full, spec.h_levels[j])?;

        let mut level_params = params.clone();
        level_params.k = spec.k_levels[j];
        let run = solve(&u0, &level_params)?;

        let probes = spec
            .probe_times
            .iter()
            .map(|&t_req| {
                let times = run.history.times();
                let idx = times.partition_point(|&t| t <= t_req).saturating_sub(1);
                ProbeNorms {
                    t_requested: t_req,
                    t_actual: times[idx],
                    sup: run.history.sup_series()[idx],
                    l1: run.history.norm_series(1.0).unwrap()[idx],
                }
            })
            .collect();
        levels.push(LadderLevel {
            k: spec.k_levels[j],
            radius,
            h: spec.h_levels[j],
            n_cells,
            termination: match run.termination {
                Termination::Completed { .. } => "completed".into(),
                Termination::Blowup { t, .. } => format!("blowup at t = {t}"),
                Termination::StepUnderflow { t } => format!("step underflow at t = {t}"),
            },
            probes,
        });
    }

    let diffs: Vec<LadderDiff> = levels
        .windows(2)
        .map(|w| {
            let mut sup = 0.0_f64;
            let mut l1 = 0.0_f64;
            for (a, b) in w[0].probes.iter().zip(&w[1].probes) {
                sup = sup.max((a.sup - b.sup).abs());
                l1 = l1.max((a.l1 - b.l1).abs());
            }
            LadderDiff { sup, l1 }
        })
        .collect();
    let converged = diffs
        .last()
        .map(|d| d.sup < spec.tolerance && d.l1 < spec.tolerance)
        .unwrap_or(false);
    Ok(LadderReport {
        levels,
        diffs,
        converged,
    })
}
