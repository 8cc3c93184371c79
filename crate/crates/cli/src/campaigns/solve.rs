//! Single solve: norm history CSV, monitor series, snapshots (two-column
//! text and JSON), and a run report.

use anyhow::anyhow;
use serde::Serialize;

use leibenson::evolution::solve;
use leibenson::io::{write_field_text, write_history_csv, write_monitor_csv, write_snapshot_json};
use leibenson::monitors::{exit_times, ExitTimes};

use crate::config::ExperimentConfig;
use crate::manifest::{Assertion, Workspace};

#[derive(Serialize)]
struct RunReport {
    termination: leibenson::evolution::Termination,
    final_time: f64,
    steps: usize,
    clipped_mass: f64,
    boundary_outflux: f64,
    initial_sup: f64,
    final_sup: f64,
    /// Exit times of the S/F/M gates; null encodes "never crossed".
    exit_t_s: Option<f64>,
    exit_t_f: Option<f64>,
    exit_t_m: Option<f64>,
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn run(config: &ExperimentConfig, ws: &mut Workspace) -> anyhow::Result<Vec<Assertion>> {
    let setup = super::solver_setup(config)?;
    let run = solve(&setup.u0, &setup.params)?;

    let mut csv = Vec::new();
    write_history_csv(&run.history, &mut csv)?;
    ws.write_bytes("history.csv", &csv)?;

    // Monitor series need a finite exponent beyond L1; use the smallest
    // recorded one above 1 when present.
    let monitor_s = run
        .history
        .finite_exponents()
        .iter()
        .copied()
        .find(|&s| s > 1.0);
    let exits: Option<ExitTimes> = if let Some(s) = monitor_s {
        if setup.params.q > 1.0 {
            let mut csv = Vec::new();
            write_monitor_csv(&run.history, setup.params.q, s, &mut csv)?;
            ws.write_bytes("monitors.csv", &csv)?;
            Some(exit_times(&run.history, setup.params.q, s)?)
        } else {
            None
        }
    } else {
        None
    };

    for (idx, snap) in run.snapshots.iter().enumerate() {
        let mut text = Vec::new();
        write_field_text(&snap.field, &mut text)?;
        ws.write_bytes(&format!("snap_{idx:03}.txt", idx = idx), &text)?;
        let mut json = Vec::new();
        write_snapshot_json(snap.t, &snap.field, &mut json)?;
        ws.write_bytes(&format!("snap_{idx:03}.json", idx = idx), &json)?;
    }

    let report = RunReport {
        termination: run.termination,
        final_time: run.final_time(),
        steps: run.steps,
        clipped_mass: run.clipped_mass,
        boundary_outflux: run.boundary_outflux,
        initial_sup: run.history.sup_series()[0],
        final_sup: *run.history.sup_series().last().unwrap(),
        exit_t_s: exits.and_then(|e| finite_or_none(e.t_s)),
        exit_t_f: exits.and_then(|e| finite_or_none(e.t_f)),
        exit_t_m: exits.and_then(|e| finite_or_none(e.t_m)),
    };
    ws.write_json("run_report.json", &report)?;

    let mut assertions = Vec::new();
    if let Some(expected) = config
        .solve
        .as_ref()
        .and_then(|s| s.expect_termination.as_deref())
    {
        let actual = super::termination_name(&run.termination);
        if !matches!(expected, "completed" | "blowup" | "step_underflow") {
            return Err(anyhow!("unknown expected termination `{expected}`"));
        }
        assertions.push(Assertion::new(
            "termination",
            actual == expected,
            format!("expected {expected}, got {actual}"),
        ));
    }
    Ok(assertions)
}
