//! Blow-up/global dichotomy scan over reaction exponents and datum
//! amplitudes, with optional bisection of the verdict boundary.
//!
//! Scans run the untruncated reaction (`k = inf`): the truncation exists to
//! prevent blow-up in the existence construction, and scans probe the raw
//! dynamics. "Global" means: completed the horizon with the sup norm below
//! half its initial value; runs that merely survive are "undecided".

use anyhow::anyhow;
use rayon::prelude::*;
use serde::Serialize;

use leibenson::evolution::{solve, EvolutionParams, Termination};
use leibenson::grid::DiscreteField;
use leibenson::operators::lebesgue_norm;

use crate::config::{BisectConfig, ExperimentConfig, FujitaConfig};
use crate::manifest::{Assertion, Workspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Blowup,
    Global,
    Undecided,
}

#[derive(Debug, Clone, Serialize)]
struct ScanRow {
    q: f64,
    amplitude: f64,
    verdict: Verdict,
    blowup_time: Option<f64>,
    horizon: f64,
    initial_sup: f64,
    final_sup: f64,
    steps: usize,
}

#[derive(Debug, Serialize)]
struct BisectStep {
    value: f64,
    verdict: Verdict,
}

#[derive(Debug, Serialize)]
struct BisectReport {
    axis: String,
    fixed: f64,
    boundary: f64,
    half_width: f64,
    steps: Vec<BisectStep>,
}

#[derive(Debug, Serialize)]
struct ScanReport {
    rows: Vec<ScanRow>,
    bisect: Option<BisectReport>,
}

struct CaseRunner {
    base_params: EvolutionParams,
    base_datum: DiscreteField,
    horizon_factor: f64,
    horizon_override: Option<f64>,
}

impl CaseRunner {
    fn horizon(&self, q: f64, sup0: f64) -> f64 {
        if let Some(h) = self.horizon_override {
            return h;
        }
        if sup0 <= 0.0 || q <= 1.0 {
            return self.base_params.t_end;
        }
        // reaction-ODE blow-up time of the datum's sup level
        self.horizon_factor * sup0.powf(1.0 - q) / (q - 1.0)
    }

    fn run_case(&self, q: f64, amplitude: f64) -> anyhow::Result<ScanRow> {
        let u0 = super::scale_field(&self.base_datum, amplitude);
        let sup0 = lebesgue_norm(&u0, f64::INFINITY)?;
        let mut params = self.base_params.clone();
        params.q = q;
        params.k = f64::INFINITY;
        params.t_end = self.horizon(q, sup0);
        let run = solve(&u0, &params)?;
        let final_sup = *run.history.sup_series().last().unwrap();
        let (verdict, blowup_time) = match run.termination {
            Termination::Blowup { t, .. } => (Verdict::Blowup, Some(t)),
            Termination::Completed { .. } if final_sup < 0.5 * sup0 => (Verdict::Global, None),
            _ => (Verdict::Undecided, None),
        };
        Ok(ScanRow {
            q,
            amplitude,
            verdict,
            blowup_time,
            horizon: params.t_end,
            initial_sup: sup0,
            final_sup,
            steps: run.steps,
        })
    }
}

fn bisect(runner: &CaseRunner, cfg: &BisectConfig) -> anyhow::Result<BisectReport> {
    let case = |x: f64| -> anyhow::Result<Verdict> {
        let row = match cfg.axis.as_str() {
            "q" => runner.run_case(x, cfg.fixed)?,
            "amplitude" => runner.run_case(cfg.fixed, x)?,
            other => return Err(anyhow!("unknown bisect axis {other}")),
        };
        Ok(row.verdict)
    };
    let mut steps = Vec::new();
    let v_lo = case(cfg.lo)?;
    let v_hi = case(cfg.hi)?;
    steps.push(BisectStep {
        value: cfg.lo,
        verdict: v_lo,
    });
    steps.push(BisectStep {
        value: cfg.hi,
        verdict: v_hi,
    });
    let blowup_low = match (v_lo, v_hi) {
        (Verdict::Blowup, Verdict::Global) => true,
        (Verdict::Global, Verdict::Blowup) => false,
        (a, b) => {
            return Err(leibenson::Error::Bracket(format!(
                "bracket endpoints must disagree (blow-up vs global), got {a:?} and {b:?}"
            ))
            .into())
        }
    };
    let (mut lo, mut hi) = (cfg.lo, cfg.hi);
    for _ in 0..cfg.max_steps {
        let mid = 0.5 * (lo + hi);
        let v = case(mid)?;
        steps.push(BisectStep {
            value: mid,
            verdict: v,
        });
        // blow-up side moves with a blow-up verdict; anything else
        // (global or undecided) moves the other end
        let mid_is_blowup = v == Verdict::Blowup;
        if mid_is_blowup == blowup_low {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BisectReport {
        axis: cfg.axis.clone(),
        fixed: cfg.fixed,
        boundary: 0.5 * (lo + hi),
        half_width: 0.5 * (hi - lo),
        steps,
    })
}

fn write_scan_csv(rows: &[ScanRow], ws: &mut Workspace) -> anyhow::Result<()> {
    let mut csv = String::from("q,amplitude,verdict,blowup_time,horizon,initial_sup,final_sup,steps\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.q,
            r.amplitude,
            match r.verdict {
                Verdict::Blowup => "blowup",
                Verdict::Global => "global",
                Verdict::Undecided => "undecided",
            },
            r.blowup_time.map_or(String::from(""), |t| t.to_string()),
            r.horizon,
            r.initial_sup,
            r.final_sup,
            r.steps
        ));
    }
    ws.write_bytes("scan.csv", csv.as_bytes())
}

pub fn run(config: &ExperimentConfig, ws: &mut Workspace) -> anyhow::Result<Vec<Assertion>> {
    let cfg: &FujitaConfig = config
        .fujita_scan
        .as_ref()
        .ok_or_else(|| anyhow!("missing [fujita_scan] block"))?;
    let setup = super::solver_setup(config)?;
    let runner = CaseRunner {
        base_params: setup.params,
        base_datum: setup.u0,
        horizon_factor: cfg.horizon_factor,
        horizon_override: cfg.horizon,
    };

    let cases: Vec<(f64, f64)> = cfg
        .q_values
        .iter()
        .flat_map(|&q| cfg.amplitudes.iter().map(move |&a| (q, a)))
        .collect();
    let rows: Vec<ScanRow> = cases
        .par_iter()
        .map(|&(q, a)| runner.run_case(q, a))
        .collect::<anyhow::Result<_>>()?;

    write_scan_csv(&rows, ws)?;

    let mut assertions = Vec::new();

    // No global verdict may sit above a blow-up verdict at the same q.
    let mut monotone_ok = true;
    let mut monotone_detail = String::from("verdicts monotone along the amplitude axis");
    for &q in &cfg.q_values {
        let mut per_q: Vec<&ScanRow> = rows.iter().filter(|r| r.q == q).collect();
        per_q.sort_by(|a, b| a.amplitude.partial_cmp(&b.amplitude).unwrap());
        let mut seen_blowup_at = f64::INFINITY;
        for row in &per_q {
            if row.verdict == Verdict::Blowup {
                seen_blowup_at = seen_blowup_at.min(row.amplitude);
            }
            if row.verdict == Verdict::Global && row.amplitude > seen_blowup_at {
                monotone_ok = false;
                monotone_detail = format!(
                    "q = {q}: global at amplitude {} above blow-up at {}",
                    row.amplitude, seen_blowup_at
                );
            }
        }
    }
    assertions.push(Assertion::new(
        "amplitude_monotonicity",
        monotone_ok,
        monotone_detail,
    ));

    for &q in &cfg.expect_blowup_q {
        let ok = rows
            .iter()
            .filter(|r| r.q == q)
            .all(|r| r.verdict == Verdict::Blowup);
        assertions.push(Assertion::new(
            &format!("blowup_at_q{q}"),
            ok,
            format!("all amplitudes blow up at q = {q}: {ok}"),
        ));
    }
    for &q in &cfg.expect_global_q {
        let ok = rows
            .iter()
            .filter(|r| r.q == q)
            .all(|r| r.verdict == Verdict::Global);
        assertions.push(Assertion::new(
            &format!("global_at_q{q}"),
            ok,
            format!("all amplitudes decay at q = {q}: {ok}"),
        ));
    }

    let bisect_report = match &cfg.bisect {
        Some(bcfg) => match bisect(&runner, bcfg) {
            Ok(rep) => Some(rep),
            Err(e) => {
                assertions.push(Assertion::new(
                    "bisect_bracket",
                    false,
                    format!("{e}"),
                ));
                None
            }
        },
        None => None,
    };

    ws.write_json(
        "scan_report.json",
        &ScanReport {
            rows,
            bisect: bisect_report,
        },
    )?;
    Ok(assertions)
}
