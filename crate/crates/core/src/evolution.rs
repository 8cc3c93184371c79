//! Explicit monotone time integration of the regularized truncated problem
//! on a geodesic ball: forward Euler on
//! `u_t = Delta_p u^m + eps Delta u + T_k(u^q)` with homogeneous Dirichlet
//! data, a nonlinear CFL step controller, blow-up detection, and norm
//! recording at every accepted step.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DiscreteField, RadialGrid};
use crate::monitors::NormHistory;
use crate::numerics::{map_indexed, max_by, pairwise_sum_by};
use crate::operators::kernel::{power_field_checked, weighted_fluxes};
use crate::operators::lebesgue_norm;

/// Absolute floor keeping the step controller's denominators positive.
const DT_FLOOR: f64 = 1e-12;

/// Parameters of the regularized truncated evolution plus stepping controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub m: f64,
    pub p: f64,
    pub q: f64,
    /// Truncation level of the reaction; `f64::INFINITY` leaves it raw.
    #[serde(default = "default_k")]
    pub k: f64,
    /// Vanishing-viscosity coefficient.
    #[serde(default)]
    pub epsilon: f64,
    /// Reaction term on/off (off evolves the pure diffusion equation).
    #[serde(default = "default_true")]
    pub reaction_on: bool,
    /// Diffusion on/off; off reduces the run to the reaction ODE per cell
    /// (used to compare against the zero-dimensional reference).
    #[serde(default = "default_true")]
    pub diffusion_on: bool,
    pub t_end: f64,
    /// CFL safety factor in (0, 1). For an N-dimensional ball the center
    /// cell carries a geometric factor ~N, so values <= 1/N are safe.
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    /// Sup-norm level at which the run is declared blown up.
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
    /// Step cap; defaults to `t_end / 1000` so running suprema are sampled
    /// densely enough.
    #[serde(default)]
    pub dt_max: Option<f64>,
    /// Finite Lebesgue exponents to record (1 and sup are always recorded).
    #[serde(default)]
    pub norm_exponents: Vec<f64>,
    /// Times at which full fields are snapshotted (datum and final state
    /// are always kept).
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Skip the standing-hypothesis check `q > m(p-1) >= 1, 1 < p < N,
    /// m > 1` for exploratory scans.
    #[serde(default)]
    pub allow_out_of_range: bool,
}

fn default_k() -> f64 {
    f64::INFINITY
}

fn default_true() -> bool {
    true
}

fn default_cfl() -> f64 {
    0.25
}

fn default_blowup() -> f64 {
    1e6
}

impl EvolutionParams {
    /// Baseline parameter set; callers override fields as needed.
    pub fn new(m: f64, p: f64, q: f64, t_end: f64) -> Self {
        Self {
            m,
            p,
            q,
            k: f64::INFINITY,
            epsilon: 0.0,
            reaction_on: true,
            diffusion_on: true,
            t_end,
            cfl_safety: default_cfl(),
            blowup_threshold: default_blowup(),
            dt_max: None,
            norm_exponents: Vec::new(),
            snapshot_times: Vec::new(),
            allow_out_of_range: false,
        }
    }

    pub fn effective_dt_max(&self) -> f64 {
        self.dt_max.unwrap_or(self.t_end / 1000.0)
    }

    /// All validation problems, for exhaustive reporting.
    pub fn validation_errors(&self, dimension: u32) -> Vec<String> {
        let mut errs = Vec::new();
        let n = dimension as f64;
        if !(self.m > 0.0) || !self.m.is_finite() {
            errs.push(format!("m must be positive and finite, got {}", self.m));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            errs.push(format!("p must exceed 1, got {}", self.p));
        }
        if self.reaction_on && !self.allow_out_of_range {
            if !(self.q > self.m * (self.p - 1.0)) {
                errs.push(format!(
                    "hypothesis violated: q = {} must exceed m(p-1) = {}",
                    self.q,
                    self.m * (self.p - 1.0)
                ));
            }
            if !(self.m * (self.p - 1.0) >= 1.0) {
                errs.push(format!(
                    "hypothesis violated: m(p-1) = {} must be >= 1",
                    self.m * (self.p - 1.0)
                ));
            }
            if !(self.p < n) {
                errs.push(format!(
                    "hypothesis violated: p = {} must be < N = {dimension}",
                    self.p
                ));
            }
            if !(self.m > 1.0) {
                errs.push(format!("hypothesis violated: m = {} must be > 1", self.m));
            }
        }
        if self.reaction_on && !(self.q > 0.0) {
            errs.push(format!("q must be positive, got {}", self.q));
        }
        if !(self.k > 0.0) {
            errs.push(format!("truncation level k must be positive, got {}", self.k));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            errs.push(format!("epsilon must be >= 0 and finite, got {}", self.epsilon));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            errs.push(format!("t_end must be positive and finite, got {}", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            errs.push(format!(
                "cfl_safety must lie in (0, 1), got {}",
                self.cfl_safety
            ));
        }
        if !(self.blowup_threshold > 0.0) {
            errs.push(format!(
                "blowup_threshold must be positive, got {}",
                self.blowup_threshold
            ));
        }
        if let Some(dt) = self.dt_max {
            if !(dt > 0.0) {
                errs.push(format!("dt_max must be positive, got {dt}"));
            }
        }
        if self.norm_exponents.iter().any(|&s| !(s >= 1.0)) {
            errs.push(format!(
                "norm exponents must satisfy s >= 1, got {:?}",
                self.norm_exponents
            ));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(t >= 0.0) || t > self.t_end)
        {
            errs.push(format!(
                "snapshot times must lie in [0, t_end], got {:?}",
                self.snapshot_times
            ));
        }
        errs
    }

    pub fn validate(&self, dimension: u32) -> Result<()> {
        let errs = self.validation_errors(dimension);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Parameter(errs.join("; ")))
        }
    }
}

/// Standard truncation `T_k`: clamp to `[-k, k]`.
pub fn truncate(k: f64, x: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Parameter(format!(
            "truncation level must be positive, got {k}"
        )));
    }
    Ok(truncate_unchecked(k, x))
}

#[inline]
pub(crate) fn truncate_unchecked(k: f64, x: f64) -> f64 {
    if x >= k {
        k
    } else if x <= -k {
        -k
    } else {
        x
    }
}

/// Truncation remainder `G_k(x) = x - T_k(x)`.
pub fn g_remainder(k: f64, x: f64) -> Result<f64> {
    Ok(x - truncate(k, x)?)
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Reached the horizon.
    Completed { t_end: f64 },
    /// Sup norm crossed the blow-up threshold.
    Blowup { t: f64, sup: f64 },
    /// Forty consecutive halvings failed to produce a finite step.
    StepUnderflow { t: f64 },
}

/// Field snapshot at a recorded time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: DiscreteField,
}

/// Full trajectory record of one solve.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub params: EvolutionParams,
    pub grid: Arc<RadialGrid>,
    pub snapshots: Vec<Snapshot>,
    pub history: NormHistory,
    pub termination: Termination,
    /// Total mass removed by clipping negative undershoots to zero.
    pub clipped_mass: f64,
    /// Cumulative mass carried out through the outer Dirichlet face.
    pub boundary_outflux: f64,
    pub steps: usize,
}

impl SolveRun {
    pub fn final_field(&self) -> &DiscreteField {
        &self.snapshots.last().expect("runs keep >= 1 snapshot").field
    }

    pub fn final_time(&self) -> f64 {
        *self.history.times().last().expect("non-empty history")
    }
}

/// Stable step size for the current state: the diffusion bound
/// `sigma dr^2 / max(D_eff, eps, floor)` with
/// `D_eff = max over faces of (p-1) |D|^{p-2} m ubar^{m-1}` (`ubar` the
/// larger adjacent value), a reaction bound `sigma / (q sup^{q-1} + floor)`,
/// the configured `dt_max`, and the remaining horizon.
pub fn adaptive_dt(
    state: &DiscreteField,
    params: &EvolutionParams,
    remaining: f64,
) -> f64 {
    let grid = state.grid();
    let n = grid.n_cells();
    let dr = grid.dr();
    let sigma = params.cfl_safety;
    let (m, p) = (params.m, params.p);

    let mut dt = params.effective_dt_max().min(remaining.max(0.0));

    if params.diffusion_on {
        let vals = state.values();
        let inv_dr = 1.0 / dr;
        // For p < 2 the face stiffness |D|^{p-2} is unbounded at flat faces;
        // floor |D| at a small multiple of the gradient scale for the step
        // control only (fluxes themselves are never regularized).
        let d_floor = if p < 2.0 {
            let wmax = max_by(0, n, &|i| crate::operators::pow_m(vals[i], m).abs());
            1e-8 * (wmax * inv_dr).max(1e-300)
        } else {
            0.0
        };
        let d_eff = max_by(0, n + 1, &|j| {
            if j == 0 {
                return 0.0;
            }
            let u_in = vals[j - 1];
            let u_out = if j == n { 0.0 } else { vals[j] };
            let w_in = crate::operators::pow_m(u_in, m);
            let w_out = if j == n {
                0.0
            } else {
                crate::operators::pow_m(u_out, m)
            };
            let d = ((w_out - w_in) * inv_dr).abs().max(d_floor);
            let ubar = u_in.max(u_out).max(0.0);
            let grad_factor = if p == 2.0 { 1.0 } else { (p - 1.0) * d.powf(p - 2.0) };
            let density_factor = if m == 1.0 {
                1.0
            } else if m == 2.0 {
                2.0 * ubar
            } else {
                m * ubar.powf(m - 1.0)
            };
            grad_factor * density_factor
        });
        dt = dt.min(sigma * dr * dr / d_eff.max(params.epsilon).max(DT_FLOOR));
    } else if params.epsilon > 0.0 {
        dt = dt.min(sigma * dr * dr / params.epsilon.max(DT_FLOOR));
    }

    if params.reaction_on {
        let sup = max_by(0, n, &|i| state.values()[i].abs());
        let rate = params.q * sup.powf(params.q - 1.0);
        dt = dt.min(sigma / (rate + DT_FLOOR));
    }
    dt
}

/// Result of one accepted forward-Euler step.
#[derive(Debug)]
pub struct StepOutcome {
    pub field: DiscreteField,
    /// Mass added by clipping negative undershoots to zero.
    pub clipped_mass: f64,
    /// Mass leaving through the outer face during this step (>= 0 for
    /// outflow).
    pub boundary_outflux: f64,
}

/// One explicit update `u <- u + dt (Delta_p u^m + eps Delta u + T_k(u^q))`,
/// clipped at zero from below. Fails with `NonFinite` when the update
/// produces NaN or infinity; the driver halves `dt` and retries.
pub fn step(state: &DiscreteField, params: &EvolutionParams, dt: f64) -> Result<StepOutcome> {
    let grid = state.grid();
    let n = grid.n_cells();
    let vals = state.values();
    let vols = grid.cell_volumes();
    let (m, p, k, q) = (params.m, params.p, params.k, params.q);

    let dnl_fluxes = if params.diffusion_on {
        let w = power_field_checked(state, m)?;
        Some(weighted_fluxes(state, &w, p))
    } else {
        None
    };
    let visc_fluxes = if params.epsilon > 0.0 && params.diffusion_on {
        let w = power_field_checked(state, 1.0)?;
        Some(weighted_fluxes(state, &w, 2.0))
    } else {
        None
    };

    let eps = params.epsilon;
    let reaction_on = params.reaction_on;
    let new_vals = map_indexed(n, |i| {
        let mut rhs = 0.0;
        if let Some(f) = &dnl_fluxes {
            rhs += (f[i + 1] - f[i]) / vols[i];
        }
        if let Some(f) = &visc_fluxes {
            rhs += eps * (f[i + 1] - f[i]) / vols[i];
        }
        if reaction_on {
            rhs += truncate_unchecked(k, vals[i].powf(q));
        }
        vals[i] + dt * rhs
    });
    if new_vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("step produced a non-finite value".into()));
    }

    let clipped_mass = pairwise_sum_by(0, n, &|i| {
        if new_vals[i] < 0.0 {
            -new_vals[i] * vols[i]
        } else {
            0.0
        }
    });
    let field = DiscreteField::new(
        grid.clone(),
        new_vals.iter().map(|&v| v.max(0.0)).collect(),
    )?;

    let mut boundary_outflux = 0.0;
    if let Some(f) = &dnl_fluxes {
        boundary_outflux -= dt * f[n];
    }
    if let Some(f) = &visc_fluxes {
        boundary_outflux -= dt * eps * f[n];
    }
    Ok(StepOutcome {
        field,
        clipped_mass,
        boundary_outflux,
    })
}

/// Advance from `u0` until the horizon, blow-up, or step underflow,
/// recording norms at every accepted step.
pub fn solve(u0: &DiscreteField, params: &EvolutionParams) -> Result<SolveRun> {
    let grid = u0.grid().clone();
    params.validate(grid.manifold().dimension())?;
    if u0.values().iter().any(|&v| !v.is_finite()) {
        return Err(Error::NonFinite("initial datum".into()));
    }
    if u0.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Config("initial datum must be non-negative".into()));
    }

    let mut history = NormHistory::new(params.norm_exponents.clone())?;
    let finite_exponents = history.finite_exponents().to_vec();
    let record =
        |field: &DiscreteField, t: f64, dt: f64, history: &mut NormHistory| -> Result<f64> {
            let sup = lebesgue_norm(field, f64::INFINITY)?;
            let finite: Vec<f64> = finite_exponents
                .iter()
                .map(|&s| lebesgue_norm(field, s))
                .collect::<Result<_>>()?;
            history.push_row(t, dt, sup, &finite)?;
            Ok(sup)
        };

    let mut pending_snapshots: Vec<f64> = params.snapshot_times.clone();
    pending_snapshots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pending_snapshots.dedup();

    let mut snapshots = vec![Snapshot {
        t: 0.0,
        field: u0.clone(),
    }];
    let mut state = u0.clone();
    let mut t = 0.0_f64;
    let mut clipped_mass = 0.0;
    let mut boundary_outflux = 0.0;
    let mut steps = 0usize;
    let mut next_snapshot = 0usize;
    while next_snapshot < pending_snapshots.len() && pending_snapshots[next_snapshot] <= 0.0 {
        next_snapshot += 1;
    }

    let mut sup = record(&state, 0.0, 0.0, &mut history)?;

    let termination = loop {
        if sup >= params.blowup_threshold {
            break Termination::Blowup { t, sup };
        }
        if t >= params.t_end {
            break Termination::Completed { t_end: t };
        }

        let mut dt = adaptive_dt(&state, params, params.t_end - t);
        let outcome = {
            let mut attempt = 0;
            loop {
                match step(&state, params, dt) {
                    Ok(out) => break Some(out),
                    Err(Error::NonFinite(_)) if attempt < 40 => {
                        attempt += 1;
                        dt *= 0.5;
                    }
                    Err(Error::NonFinite(_)) => break None,
                    Err(e) => return Err(e),
                }
            }
        };
        let Some(outcome) = outcome else {
            break Termination::StepUnderflow { t };
        };

        state = outcome.field;
        t += dt;
        clipped_mass += outcome.clipped_mass;
        boundary_outflux += outcome.boundary_outflux;
        steps += 1;
        sup = record(&state, t, dt, &mut history)?;

        if next_snapshot < pending_snapshots.len() && t >= pending_snapshots[next_snapshot] {
            snapshots.push(Snapshot {
                t,
                field: state.clone(),
            });
            while next_snapshot < pending_snapshots.len() && pending_snapshots[next_snapshot] <= t
            {
                next_snapshot += 1;
            }
        }
    };

    if snapshots.last().map(|s| s.t) != Some(t) {
        snapshots.push(Snapshot { t, field: state });
    }

    Ok(SolveRun {
        params: params.clone(),
        grid,
        snapshots,
        history,
        termination,
        clipped_mass,
        boundary_outflux,
        steps,
    })
}
