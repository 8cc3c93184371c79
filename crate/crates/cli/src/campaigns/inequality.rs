//! Inequality verification: estimate the best-constant infimum over the
//! configured trial family and report the refinement history.

use anyhow::anyhow;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use leibenson::inequalities::{
    estimate_best_constant, BestConstantReport, QuotientProbe, SearchGrid, TrialFamily,
};

use crate::config::{ExperimentConfig, InequalityConfig};
use crate::manifest::{Assertion, Workspace};

#[derive(Serialize)]
struct InequalityReport {
    manifold: String,
    curvature: Option<f64>,
    #[serde(flatten)]
    result: BestConstantReport,
}

/// Extend each axis with `count` log-uniform draws inside its range; the
/// family stays deterministic for a fixed seed.
fn add_random_trials(family: &mut TrialFamily, count: usize, seed: u64) {
    if count == 0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extend = |axis: &mut Vec<f64>| {
        let lo = axis.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = axis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) || lo <= 0.0 {
            return;
        }
        let dist = Uniform::new(lo.ln(), hi.ln());
        for _ in 0..count {
            axis.push(dist.sample(&mut rng).exp());
        }
        axis.sort_by(|a, b| a.partial_cmp(b).unwrap());
    };
    match family {
        TrialFamily::Bump { widths, centers } => {
            extend(widths);
            extend(centers);
        }
        TrialFamily::TruncatedPower { exponents, cutoffs } => {
            extend(exponents);
            extend(cutoffs);
        }
        TrialFamily::Dilation { lambdas } => extend(lambdas),
    }
}

/// Best grid-stage value per level of the slowest axis (the dilation or
/// plateau-radius sweep), in sweep order. Monotonicity and stabilization
/// assertions act on these minima.
fn per_level_minima(report: &BestConstantReport) -> Vec<f64> {
    let mut keys: Vec<f64> = Vec::new();
    let mut minima: Vec<f64> = Vec::new();
    for entry in report.refinement_history.iter().filter(|e| e.stage == "grid") {
        let key = *entry.params.last().unwrap();
        match keys.iter().position(|&k| k == key) {
            Some(i) => minima[i] = minima[i].min(entry.value),
            None => {
                keys.push(key);
                minima.push(entry.value);
            }
        }
    }
    minima
}

pub fn run(config: &ExperimentConfig, ws: &mut Workspace) -> anyhow::Result<Vec<Assertion>> {
    let cfg: &InequalityConfig = config
        .verify_inequality
        .as_ref()
        .ok_or_else(|| anyhow!("missing [verify_inequality] block"))?;
    let manifold = config.build_manifold()?;

    let mut family = cfg.family.clone();
    add_random_trials(&mut family, cfg.random_trials, config.seed);

    let probe = QuotientProbe {
        manifold,
        p: cfg.p,
        family,
    };
    let search = SearchGrid {
        n_cells: cfg.n_cells,
        padding: cfg.padding,
    };
    let result = estimate_best_constant(&probe, cfg.which, search)?;

    let mut csv = String::from("stage,value,params\n");
    for entry in &result.refinement_history {
        csv.push_str(&format!(
            "{},{},{}\n",
            entry.stage,
            entry.value,
            entry
                .params
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(";")
        ));
    }
    ws.write_bytes("refinement.csv", csv.as_bytes())?;

    let grid_values = per_level_minima(&result);
    let mut assertions = Vec::new();
    if let Some(bound) = cfg.max_infimum {
        assertions.push(Assertion::new(
            "infimum_below",
            result.infimum <= bound,
            format!("infimum {:.6e} vs bound {bound:.3e}", result.infimum),
        ));
    }
    if let Some(bound) = cfg.min_infimum {
        assertions.push(Assertion::new(
            "infimum_above",
            result.infimum >= bound,
            format!("infimum {:.6e} vs bound {bound:.3e}", result.infimum),
        ));
    }
    if cfg.require_monotone_decrease {
        let monotone = grid_values.windows(2).all(|w| w[1] < w[0]);
        assertions.push(Assertion::new(
            "grid_values_decrease",
            monotone,
            format!("grid sweep: {grid_values:?}"),
        ));
    }
    if let Some(limit) = cfg.max_last_rel_change {
        let ok = match grid_values.as_slice() {
            [.., a, b] => ((a - b) / b).abs() <= limit,
            _ => false,
        };
        let detail = match grid_values.as_slice() {
            [.., a, b] => format!("last change {:.4e} (limit {limit})", ((a - b) / b).abs()),
            _ => "fewer than two grid values".into(),
        };
        assertions.push(Assertion::new("stabilized", ok, detail));
    }

    let report = InequalityReport {
        manifold: format!("{:?}", config.manifold),
        curvature: config.curvature,
        result,
    };
    ws.write_json("inequality_report.json", &report)?;
    Ok(assertions)
}
