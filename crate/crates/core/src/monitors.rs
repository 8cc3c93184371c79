//! Control functionals along a trajectory: the running suprema S, F, M
//! driving the exit-time bookkeeping, Lebesgue-norm monotonicity checks,
//! log-log decay fits, and the closed-form critical exponents.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{SolveRun, Termination};

/// Time series of Lebesgue norms recorded at every accepted step.
///
/// The exponent set always contains `s = 1` and the sup norm; times are
/// strictly increasing starting from the datum row at `t = 0`.
#[derive(Debug, Clone)]
pub struct NormHistory {
    times: Vec<f64>,
    dts: Vec<f64>,
    sup: Vec<f64>,
    exponents: Vec<f64>,
    series: Vec<Vec<f64>>,
}

impl NormHistory {
    /// New empty history for the given finite exponents (deduplicated,
    /// sorted, `1` inserted if missing).
    pub fn new(mut finite_exponents: Vec<f64>) -> Result<Self> {
        finite_exponents.retain(|s| s.is_finite());
        finite_exponents.push(1.0);
        finite_exponents.sort_by(|a, b| a.partial_cmp(b).unwrap());
        finite_exponents.dedup();
        if finite_exponents.iter().any(|&s| s < 1.0) {
            return Err(Error::Parameter(
                "norm exponents must satisfy s >= 1".into(),
            ));
        }
        let n = finite_exponents.len();
        Ok(Self {
            times: Vec::new(),
            dts: Vec::new(),
            sup: Vec::new(),
            exponents: finite_exponents,
            series: vec![Vec::new(); n],
        })
    }

    /// Append a row. `finite` must align with [`finite_exponents`](Self::finite_exponents);
    /// times must increase strictly. Public so externally produced series can
    /// be fed through the monitors.
    pub fn push_row(&mut self, t: f64, dt: f64, sup: f64, finite: &[f64]) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::Config(format!(
                    "history times must increase strictly ({t} after {last})"
                )));
            }
        }
        if !sup.is_finite() || finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("norm entry at t = {t}")));
        }
        debug_assert_eq!(finite.len(), self.exponents.len());
        self.times.push(t);
        self.dts.push(dt);
        self.sup.push(sup);
        for (series, &v) in self.series.iter_mut().zip(finite) {
            series.push(v);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dts(&self) -> &[f64] {
        &self.dts
    }

    pub fn sup_series(&self) -> &[f64] {
        &self.sup
    }

    /// Finite exponents in ascending order (always includes 1).
    pub fn finite_exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// Series for exponent `s`; `f64::INFINITY` selects the sup norm.
    pub fn norm_series(&self, s: f64) -> Option<&[f64]> {
        if s == f64::INFINITY {
            return Some(&self.sup);
        }
        self.exponents
            .iter()
            .position(|&e| e == s)
            .map(|k| self.series[k].as_slice())
    }

    fn require_series(&self, s: f64) -> Result<&[f64]> {
        self.norm_series(s).ok_or_else(|| {
            Error::Config(format!(
                "norm series for s = {s} was not recorded (configured: {:?})",
                self.exponents
            ))
        })
    }
}

/// Running supremum `S(t) = max over tau <= t of tau * sup_norm(tau)^(q-1)`,
/// aligned with the history rows.
pub fn s_monitor(history: &NormHistory, q: f64) -> Result<Vec<f64>> {
    if !(q > 1.0) {
        return Err(Error::Parameter(format!("S monitor needs q > 1, got {q}")));
    }
    let mut out = Vec::with_capacity(history.len());
    let mut running = 0.0_f64;
    for (&t, &sup) in history.times().iter().zip(history.sup_series()) {
        running = running.max(t * sup.powf(q - 1.0));
        out.push(running);
    }
    Ok(out)
}

/// Exit times of the three proof gates, `f64::INFINITY` when a gate is
/// never crossed within the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitTimes {
    /// First time `S(t) > 1`.
    pub t_s: f64,
    /// First time the running sup of the `L^s` mass exceeds twice its
    /// datum value.
    pub t_f: f64,
    /// Same for the `L^1` mass.
    pub t_m: f64,
}

/// Compute `(T, T_F, T_M)` from the recorded norms. `F` uses the integral
/// `int u^s = ||u||_s^s` with `F(0)` taken from the datum row.
pub fn exit_times(history: &NormHistory, q: f64, s: f64) -> Result<ExitTimes> {
    if history.is_empty() {
        return Err(Error::Config("empty history".into()));
    }
    let s_series = s_monitor(history, q)?;
    let ls = history.require_series(s)?;
    let l1 = history.require_series(1.0)?;
    let f0 = ls[0].powf(s);
    let m0 = l1[0];

    let mut t_s = f64::INFINITY;
    let mut t_f = f64::INFINITY;
    let mut t_m = f64::INFINITY;
    let mut running_f = 0.0_f64;
    let mut running_m = 0.0_f64;
    for (j, &t) in history.times().iter().enumerate() {
        running_f = running_f.max(ls[j].powf(s));
        running_m = running_m.max(l1[j]);
        if t_s.is_infinite() && s_series[j] > 1.0 {
            t_s = t;
        }
        if t_f.is_infinite() && running_f > 2.0 * f0 {
            t_f = t;
        }
        if t_m.is_infinite() && running_m > 2.0 * m0 {
            t_m = t;
        }
    }
    Ok(ExitTimes { t_s, t_f, t_m })
}

/// Ordinary least squares of `log norm` against `log t` over a window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// Slope of the fit; a decay rate `t^{-a}` appears as `-a`.
    pub exponent: f64,
    /// Intercept in log space (`log` of the prefactor).
    pub intercept: f64,
    /// Largest absolute residual of the fit.
    pub max_residual: f64,
    pub samples: usize,
    pub window: (f64, f64),
}

/// Fit a power law to the selected norm over `window = [t_a, t_b]`.
/// `which = f64::INFINITY` selects the sup norm.
pub fn fit_decay(history: &NormHistory, which: f64, window: (f64, f64)) -> Result<DecayFit> {
    let series = history.require_series(which)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in history.times().iter().zip(series) {
        if t <= 0.0 || t < window.0 || t > window.1 {
            continue;
        }
        if v <= 0.0 {
            return Err(Error::Undefined(format!(
                "non-positive norm {v} at t = {t} in fit window (blow-up or extinction)"
            )));
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    if xs.len() < 10 {
        return Err(Error::Config(format!(
            "decay fit needs >= 10 samples in window, found {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::Undefined("degenerate fit window".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        exponent: slope,
        intercept,
        max_residual,
        samples: xs.len(),
        window,
    })
}

/// Result of the `L^s` monotonicity check of the small-datum lemmas.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotoneReport {
    pub s: f64,
    pub tol: f64,
    pub passed: bool,
    /// Worst observed `norm(t) / norm(0) - 1` (positive means growth).
    pub worst_excess: f64,
    pub worst_time: f64,
}

/// Verify `||u(t)||_s <= ||u_0||_s (1 + tol)` along the run.
pub fn check_ls_monotone(history: &NormHistory, s: f64, tol: f64) -> Result<MonotoneReport> {
    let series = history.require_series(s)?;
    if series.is_empty() {
        return Err(Error::Config("empty history".into()));
    }
    let base = series[0];
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_time = 0.0;
    for (&t, &v) in history.times().iter().zip(series) {
        let excess = if base == 0.0 {
            if v > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            v / base - 1.0
        };
        if excess > worst_excess {
            worst_excess = excess;
            worst_time = t;
        }
    }
    Ok(MonotoneReport {
        s,
        tol,
        passed: worst_excess <= tol,
        worst_excess,
        worst_time,
    })
}

/// Smoothing-bound audit for a completed run: the closed-form exponents and
/// the smallest constants making the theorem-shaped bounds hold over the
/// recorded samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmoothingReport {
    pub s: f64,
    pub r: f64,
    /// `beta_{r,s}`
    pub beta_rs: f64,
    /// `gamma_s` for the `L^s -> L^r` bound (here `s0 = s`, target `r`).
    pub gamma_s: f64,
    /// `delta_s = s / r`.
    pub delta_s: f64,
    /// Time exponent `N / (N[m(p-1)-1] + p)` of the `L^1 -> L^inf` bound.
    pub l1_time_exponent: f64,
    /// Datum exponent `p / (N[m(p-1)-1] + p)` of the same bound.
    pub l1_datum_exponent: f64,
    /// Minimal constant for `sup <= Gamma t^-beta ||u0||_s^(ps/(N[..]+pr))`.
    pub gamma_star_sup: f64,
    /// Minimal constant for the `L^1 -> L^inf` bound.
    pub gamma_star_l1: f64,
    /// Minimal constant for `||u(t)||_r <= Gamma t^-gamma ||u0||_s^delta`,
    /// when the `L^r` series was recorded.
    pub gamma_star_ls: Option<f64>,
    /// `gamma_star_sup <= supplied constant`, when one was supplied.
    pub passed: Option<bool>,
}

/// Evaluate the smoothing bounds on a completed (non-blow-up) run.
/// `s` is the datum exponent, `r > s` the target, `constant` an optional
/// budget for the `beta_{r,s}` sup bound.
pub fn check_smoothing_bound(
    run: &SolveRun,
    s: f64,
    r: f64,
    constant: Option<f64>,
) -> Result<SmoothingReport> {
    if matches!(run.termination, Termination::Blowup { .. }) {
        return Err(Error::NotApplicable(
            "smoothing bounds are not evaluated on blow-up runs".into(),
        ));
    }
    if !(r > s) || !(s >= 1.0) {
        return Err(Error::Parameter(format!(
            "smoothing audit needs 1 <= s < r, got s = {s}, r = {r}"
        )));
    }
    let (m, p) = (run.params.m, run.params.p);
    let dim = run.grid.manifold().dimension() as f64;
    let hom = m * (p - 1.0) - 1.0;
    if hom <= 0.0 {
        return Err(Error::Parameter("smoothing audit needs m(p-1) > 1".into()));
    }
    let denom_r = dim * hom + p * r;
    let beta = (1.0 - p * s / denom_r) / hom;
    let datum_exp_sup = p * s / denom_r;
    let gamma = (1.0 / s - 1.0 / r) * s / (m * (p - 1.0));
    let delta = s / r;
    let denom_1 = dim * hom + p;
    let l1_time_exponent = dim / denom_1;
    let l1_datum_exponent = p / denom_1;

    let history = &run.history;
    let ls0 = history.require_series(s)?[0];
    let l1_0 = history.require_series(1.0)?[0];
    let lr = history.norm_series(r);

    let mut gamma_star_sup = 0.0_f64;
    let mut gamma_star_l1 = 0.0_f64;
    let mut gamma_star_ls = lr.map(|_| 0.0_f64);
    for (j, &t) in history.times().iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        let sup = history.sup_series()[j];
        if ls0 > 0.0 {
            gamma_star_sup = gamma_star_sup.max(sup * t.powf(beta) / ls0.powf(datum_exp_sup));
        }
        if l1_0 > 0.0 {
            gamma_star_l1 = gamma_star_l1
                .max(sup * t.powf(l1_time_exponent) / l1_0.powf(l1_datum_exponent));
        }
        if let (Some(series), Some(acc)) = (lr, gamma_star_ls.as_mut()) {
            if ls0 > 0.0 {
                *acc = acc.max(series[j] * t.powf(gamma) / ls0.powf(delta));
            }
        }
    }
    Ok(SmoothingReport {
        s,
        r,
        beta_rs: beta,
        gamma_s: gamma,
        delta_s: delta,
        l1_time_exponent,
        l1_datum_exponent,
        gamma_star_sup,
        gamma_star_l1,
        gamma_star_ls,
        passed: constant.map(|c| gamma_star_sup <= c),
    })
}

/// Critical exponents `(m(p-1) + p/N, [q - m(p-1)] N/p)` under the standing
/// hypotheses `q > m(p-1) >= 1`, `1 < p < N`, `m > 1`.
pub fn critical_exponents(m: f64, p: f64, q: f64, dim: u32) -> Result<(f64, f64)> {
    let n = dim as f64;
    if !(m > 1.0) || !(p > 1.0) || !(p < n) || !(m * (p - 1.0) >= 1.0) || !(q > m * (p - 1.0)) {
        return Err(Error::Parameter(format!(
            "critical_exponents needs q > m(p-1) >= 1, 1 < p < N, m > 1; got m={m}, p={p}, q={q}, N={dim}"
        )));
    }
    let fujita = m * (p - 1.0) + p / n;
    let q0 = (q - m * (p - 1.0)) * n / p;
    Ok((fujita, q0))
}
