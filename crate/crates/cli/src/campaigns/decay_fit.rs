//! Decay-exponent campaign: run, fit the configured norm against a power
//! law over the fit window, check Lebesgue-norm monotonicity, and audit the
//! smoothing bounds.

use anyhow::anyhow;
use serde::Serialize;

use leibenson::evolution::{solve, Termination};
use leibenson::io::{write_history_csv, write_monitor_csv};
use leibenson::monitors::{
    check_ls_monotone, check_smoothing_bound, fit_decay, DecayFit, MonotoneReport,
    SmoothingReport,
};

use crate::config::ExperimentConfig;
use crate::manifest::{Assertion, Workspace};

#[derive(Serialize)]
struct FitReport {
    termination: String,
    fit: DecayFit,
    monotone: Vec<MonotoneReport>,
    smoothing: Option<SmoothingReport>,
}

pub fn run(config: &ExperimentConfig, ws: &mut Workspace) -> anyhow::Result<Vec<Assertion>> {
    let cfg = config
        .decay_fit
        .as_ref()
        .ok_or_else(|| anyhow!("missing [decay_fit] block"))?;
    let mut setup = super::solver_setup(config)?;

    // Record every exponent the post-processing will need.
    let mut extra = cfg.monotone_s.clone();
    if let Some(s) = cfg.fit_norm_exponent {
        extra.push(s);
    }
    if let Some(sm) = &cfg.smoothing {
        extra.push(sm.s);
        extra.push(sm.r);
    }
    setup.params.norm_exponents.extend(extra);
    let run = solve(&setup.u0, &setup.params)?;

    let mut csv = Vec::new();
    write_history_csv(&run.history, &mut csv)?;
    ws.write_bytes("history.csv", &csv)?;

    if let Some(s) = run
        .history
        .finite_exponents()
        .iter()
        .copied()
        .find(|&s| s > 1.0)
    {
        if setup.params.q > 1.0 {
            let mut csv = Vec::new();
            write_monitor_csv(&run.history, setup.params.q, s, &mut csv)?;
            ws.write_bytes("monitors.csv", &csv)?;
        }
    }

    let window = cfg
        .window
        .unwrap_or((setup.params.t_end / 10.0, setup.params.t_end));
    let which = cfg.fit_norm_exponent.unwrap_or(f64::INFINITY);
    let fit = fit_decay(&run.history, which, window)?;

    let monotone: Vec<MonotoneReport> = cfg
        .monotone_s
        .iter()
        .map(|&s| check_ls_monotone(&run.history, s, cfg.monotone_tol))
        .collect::<Result<_, _>>()?;

    let smoothing = match &cfg.smoothing {
        Some(sm) => Some(check_smoothing_bound(&run, sm.s, sm.r, sm.constant)?),
        None => None,
    };

    let report = FitReport {
        termination: super::termination_name(&run.termination).to_string(),
        fit,
        monotone: monotone.clone(),
        smoothing,
    };
    ws.write_json("fit_report.json", &report)?;

    let mut assertions = Vec::new();
    assertions.push(Assertion::new(
        "completed",
        matches!(run.termination, Termination::Completed { .. }),
        format!("termination: {:?}", run.termination),
    ));
    if let (Some(expected), Some(tol)) = (cfg.expected_slope, cfg.slope_tol) {
        assertions.push(Assertion::new(
            "decay_slope",
            (fit.exponent - expected).abs() <= tol,
            format!(
                "fitted {:.4}, expected {expected} +/- {tol}",
                fit.exponent
            ),
        ));
    }
    for rep in &monotone {
        assertions.push(Assertion::new(
            &format!("ls_monotone_s{}", rep.s),
            rep.passed,
            format!(
                "worst excess {:.3e} at t = {:.4}",
                rep.worst_excess, rep.worst_time
            ),
        ));
    }
    if let Some(report) = &report.smoothing {
        if let Some(passed) = report.passed {
            assertions.push(Assertion::new(
                "smoothing_constant",
                passed,
                format!("minimal constant {:.4e}", report.gamma_star_sup),
            ));
        }
    }
    Ok(assertions)
}
