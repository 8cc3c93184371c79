//! Campaign implementations. Each campaign consumes the validated config,
//! writes its artifacts into the workspace, and returns the assertion list
//! whose conjunction decides the exit code.

use std::sync::Arc;

use anyhow::{anyhow, Context};

use leibenson::evolution::{EvolutionParams, Termination};
use leibenson::grid::{build_grid, DiscreteField};

use crate::config::ExperimentConfig;
use crate::manifest::{Assertion, Workspace};

pub mod decay_fit;
pub mod fujita;
pub mod inequality;
pub mod ladder;
pub mod solve;

pub fn run(
    config: &ExperimentConfig,
    ws: &mut Workspace,
) -> anyhow::Result<Vec<Assertion>> {
    match config.campaign {
        crate::config::Campaign::Solve => solve::run(config, ws),
        crate::config::Campaign::DecayFit => decay_fit::run(config, ws),
        crate::config::Campaign::FujitaScan => fujita::run(config, ws),
        crate::config::Campaign::Ladder => ladder::run(config, ws),
        crate::config::Campaign::VerifyInequality => inequality::run(config, ws),
    }
}

/// Grid, evolution parameters, and datum shared by the solver campaigns.
pub struct SolverSetup {
    pub params: EvolutionParams,
    pub u0: DiscreteField,
}

pub fn solver_setup(config: &ExperimentConfig) -> anyhow::Result<SolverSetup> {
    let manifold = config.build_manifold()?;
    let grid_cfg = config
        .grid
        .as_ref()
        .ok_or_else(|| anyhow!("missing [grid] block"))?;
    let grid = Arc::new(
        build_grid(&manifold, grid_cfg.radius, grid_cfg.n_cells).context("grid construction")?,
    );
    let params = config
        .evolution
        .clone()
        .ok_or_else(|| anyhow!("missing [evolution] block"))?;
    let datum = config
        .datum
        .as_ref()
        .ok_or_else(|| anyhow!("missing [datum] block"))?;
    let u0 = datum.build(&grid, params.m, params.p)?;
    Ok(SolverSetup { params, u0 })
}

pub fn termination_name(t: &Termination) -> &'static str {
    match t {
        Termination::Completed { .. } => "completed",
        Termination::Blowup { .. } => "blowup",
        Termination::StepUnderflow { .. } => "step_underflow",
    }
}

/// Scale a field by a positive factor (datum amplitude sweeps).
pub fn scale_field(field: &DiscreteField, factor: f64) -> DiscreteField {
    DiscreteField::new(
        field.grid().clone(),
        field.values().iter().map(|v| v * factor).collect(),
    )
    .expect("same grid")
}
