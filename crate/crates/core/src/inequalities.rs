//! Rayleigh-quotient probes of the Sobolev and Poincare inequalities on
//! model manifolds: quotient evaluation for compactly supported radial
//! trials and best-constant estimation over parametric trial families.
//!
//! Estimates are infima over the declared family, never claims about true
//! best constants.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ModelManifold;
use crate::grid::{build_grid, DiscreteField};
use crate::numerics::{golden_section_min, pairwise_sum_by, quintic_taper};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    Sobolev,
    Poincare,
}

/// Parametric radial trial families. Every member is compactly supported
/// with a quintic taper, as the inequalities quantify over `C_c^infinity`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TrialFamily {
    /// Plateau of radius `center`, quintic taper of width `width`.
    Bump { widths: Vec<f64>, centers: Vec<f64> },
    /// `(1 + r^2)^(-exponent)`, tapered over the last 10% before `cutoff`.
    TruncatedPower { exponents: Vec<f64>, cutoffs: Vec<f64> },
    /// Fixed plateau-taper profile of unit support, dilated by `lambda`.
    Dilation { lambdas: Vec<f64> },
}

impl TrialFamily {
    fn axes(&self) -> Vec<&[f64]> {
        match self {
            TrialFamily::Bump { widths, centers } => vec![widths, centers],
            TrialFamily::TruncatedPower { exponents, cutoffs } => vec![exponents, cutoffs],
            TrialFamily::Dilation { lambdas } => vec![lambdas],
        }
    }

    fn support(&self, params: &[f64]) -> f64 {
        match self {
            TrialFamily::Bump { .. } => params[1] + params[0],
            TrialFamily::TruncatedPower { .. } => params[1],
            TrialFamily::Dilation { .. } => params[0],
        }
    }

    fn value(&self, params: &[f64], r: f64) -> f64 {
        match self {
            TrialFamily::Bump { .. } => {
                let (w, rho) = (params[0], params[1]);
                if r <= rho {
                    1.0
                } else {
                    quintic_taper((r - rho) / w)
                }
            }
            TrialFamily::TruncatedPower { .. } => {
                let (a, s) = (params[0], params[1]);
                (1.0 + r * r).powf(-a) * quintic_taper((r - 0.9 * s) / (0.1 * s))
            }
            TrialFamily::Dilation { .. } => {
                let x = r / params[0];
                quintic_taper((x - 0.9) / 0.1)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let axes = self.axes();
        if axes.iter().any(|a| a.is_empty()) {
            return Err(Error::Config("trial family has an empty parameter axis".into()));
        }
        if axes
            .iter()
            .any(|a| a.iter().any(|&v| !(v > 0.0) || !v.is_finite()))
        {
            return Err(Error::Config(
                "trial family parameters must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// A manifold, a gradient integrability exponent, and a trial family.
#[derive(Debug, Clone)]
pub struct QuotientProbe {
    pub manifold: ModelManifold,
    pub p: f64,
    pub family: TrialFamily,
}

/// `||grad v||_p^p` by midpoint quadrature on faces (two-point gradients,
/// Dirichlet ghost beyond the outer face).
fn gradient_norm_p(v: &DiscreteField, p: f64) -> f64 {
    let grid = v.grid();
    let n = grid.n_cells();
    let dr = grid.dr();
    let inv_dr = 1.0 / dr;
    let areas = grid.face_areas();
    let vals = v.values();
    let total = pairwise_sum_by(1, n + 1, &|j| {
        let outer = if j == n { 0.0 } else { vals[j] };
        let d = (outer - vals[j - 1]) * inv_dr;
        areas[j] * dr * d.abs().powf(p)
    });
    total.powf(1.0 / p)
}

fn check_trial(v: &DiscreteField) -> Result<()> {
    let vals = v.values();
    if vals.iter().all(|&x| x == 0.0) {
        return Err(Error::Undefined("quotient of the zero trial".into()));
    }
    if *vals.last().unwrap() != 0.0 {
        return Err(Error::Config(
            "trial function must be compactly supported inside the grid".into(),
        ));
    }
    Ok(())
}

/// Sobolev quotient `||grad v||_p / ||v||_{p*}` with `p* = pN/(N-p)`.
pub fn sobolev_quotient(probe: &QuotientProbe, v: &DiscreteField) -> Result<f64> {
    check_trial(v)?;
    let n = v.grid().manifold().dimension() as f64;
    let p = probe.p;
    if !(p > 1.0 && p < n) {
        return Err(Error::Parameter(format!(
            "Sobolev quotient needs 1 < p < N, got p = {p}, N = {n}"
        )));
    }
    let p_star = p * n / (n - p);
    Ok(gradient_norm_p(v, p) / crate::operators::lebesgue_norm(v, p_star)?)
}

/// Poincare quotient `||grad v||_p / ||v||_p`.
pub fn poincare_quotient(probe: &QuotientProbe, v: &DiscreteField) -> Result<f64> {
    check_trial(v)?;
    let p = probe.p;
    if !(p > 1.0) {
        return Err(Error::Parameter(format!("Poincare quotient needs p > 1, got {p}")));
    }
    Ok(gradient_norm_p(v, p) / crate::operators::lebesgue_norm(v, p)?)
}

/// Discretization used when realizing family members: each member gets its
/// own grid of `n_cells` cells extending `padding` times its support.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchGrid {
    pub n_cells: usize,
    pub padding: f64,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            n_cells: 4096,
            padding: 1.25,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementEntry {
    pub stage: String,
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestConstantReport {
    pub which: Inequality,
    pub p: f64,
    pub dimension: u32,
    pub infimum: f64,
    pub params: Vec<f64>,
    pub refinement_history: Vec<RefinementEntry>,
}

fn evaluate_member(
    probe: &QuotientProbe,
    which: Inequality,
    search: SearchGrid,
    params: &[f64],
) -> Result<f64> {
    let support = probe.family.support(params);
    let radius = support * search.padding;
    let grid = Arc::new(build_grid(&probe.manifold, radius, search.n_cells)?);
    let v = DiscreteField::from_profile(grid, |r| probe.family.value(params, r));
    match which {
        Inequality::Sobolev => sobolev_quotient(probe, &v),
        Inequality::Poincare => poincare_quotient(probe, &v),
    }
}

/// Grid search over the family followed by three golden-section sweeps per
/// coordinate. The infimum reduction is deterministic (lexicographic
/// parameter order breaks ties).
pub fn estimate_best_constant(
    probe: &QuotientProbe,
    which: Inequality,
    search: SearchGrid,
) -> Result<BestConstantReport> {
    probe.family.validate()?;
    let axes: Vec<Vec<f64>> = probe.family.axes().iter().map(|a| a.to_vec()).collect();
    let dims: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let total: usize = dims.iter().product();

    let member = |flat: usize| -> Vec<f64> {
        let mut rem = flat;
        let mut params = Vec::with_capacity(dims.len());
        for (axis, &len) in axes.iter().zip(&dims) {
            params.push(axis[rem % len]);
            rem /= len;
        }
        params
    };

    let mut history = Vec::new();
    let mut best_value = f64::INFINITY;
    let mut best_params = member(0);
    for flat in 0..total {
        let params = member(flat);
        let value = evaluate_member(probe, which, search, &params)?;
        history.push(RefinementEntry {
            stage: "grid".into(),
            params: params.clone(),
            value,
        });
        if value < best_value {
            best_value = value;
            best_params = params;
        }
    }

    // Local refinement: golden-section per coordinate, three sweeps,
    // bracketed by the grid neighbors of the current best.
    for sweep in 0..3 {
        for (coord, axis) in axes.iter().enumerate() {
            if axis.len() < 2 {
                continue;
            }
            let current = best_params[coord];
            let below = axis
                .iter()
                .copied()
                .filter(|&x| x < current)
                .fold(f64::NEG_INFINITY, f64::max);
            let above = axis
                .iter()
                .copied()
                .filter(|&x| x > current)
                .fold(f64::INFINITY, f64::min);
            let lo = if below.is_finite() { below } else { current * 0.5 };
            let hi = if above.is_finite() { above } else { current };
            if !(hi > lo) {
                continue;
            }
            let objective = |x: f64| {
                let mut params = best_params.clone();
                params[coord] = x;
                evaluate_member(probe, which, search, &params).unwrap_or(f64::INFINITY)
            };
            let (x, value) = golden_section_min(objective, lo, hi, 24);
            if value < best_value {
                best_value = value;
                best_params[coord] = x;
            }
            history.push(RefinementEntry {
                stage: format!("golden sweep {sweep} coord {coord}"),
                params: best_params.clone(),
                value: best_value,
            });
        }
    }

    Ok(BestConstantReport {
        which,
        p: probe.p,
        dimension: probe.manifold.dimension(),
        infimum: best_value,
        params: best_params,
        refinement_history: history,
    })
}
