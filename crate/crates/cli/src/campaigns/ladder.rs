//! Approximation-ladder campaign: drive the (k, R, h) levels and report
//! probe-norm movement between consecutive levels.

use anyhow::anyhow;

use leibenson::ladder::ladder_run;

use crate::config::ExperimentConfig;
use crate::manifest::{Assertion, Workspace};

pub fn run(config: &ExperimentConfig, ws: &mut Workspace) -> anyhow::Result<Vec<Assertion>> {
    let cfg = config
        .ladder
        .as_ref()
        .ok_or_else(|| anyhow!("missing [ladder] block"))?;
    let manifold = config.build_manifold()?;
    let grid_cfg = config
        .grid
        .as_ref()
        .ok_or_else(|| anyhow!("missing [grid] block"))?;
    let params = config
        .evolution
        .clone()
        .ok_or_else(|| anyhow!("missing [evolution] block"))?;
    let datum = config
        .datum
        .as_ref()
        .ok_or_else(|| anyhow!("missing [datum] block"))?;

    let report = ladder_run(&manifold, datum, &params, &cfg.spec, grid_cfg.n_cells)?;

    let mut csv = String::from("level,k,R,h,n_cells,t_probe,t_actual,sup,L1\n");
    for (j, level) in report.levels.iter().enumerate() {
        for probe in &level.probes {
            csv.push_str(&format!(
                "{j},{},{},{},{},{},{},{},{}\n",
                level.k,
                level.radius,
                level.h,
                level.n_cells,
                probe.t_requested,
                probe.t_actual,
                probe.sup,
                probe.l1
            ));
        }
    }
    ws.write_bytes("ladder.csv", csv.as_bytes())?;
    ws.write_json("ladder_report.json", &report)?;

    let mut assertions = Vec::new();
    if cfg.require_converged {
        assertions.push(Assertion::new(
            "ladder_converged",
            report.converged,
            format!("consecutive diffs: {:?}", report.diffs),
        ));
    }
    Ok(assertions)
}
