//! Discrete spatial operators on radial fields: the doubly nonlinear
//! operator `Delta_p(u^m)`, its linear (heat) special case, and weighted
//! Lebesgue norms.
//!
//! All operators share one flux kernel. The face gradient is a two-point
//! difference of `w = u^m`; the flux `|D|^{p-2} D` is evaluated exactly (the
//! map is continuous for p > 1 with value 0 at 0, no regularization), the
//! outer boundary is homogeneous Dirichlet via a ghost value `w = 0`, and the
//! center face carries no flux because its area vanishes.

use crate::error::{Error, Result};
use crate::grid::DiscreteField;
use crate::numerics::{map_indexed, max_by, odd_pow, pairwise_sum_by};

/// `x^m` with fast paths for the common small integer exponents.
#[inline]
pub(crate) fn pow_m(x: f64, m: f64) -> f64 {
    if m == 1.0 {
        x
    } else if m == 2.0 {
        x * x
    } else if m == 3.0 {
        x * x * x
    } else {
        x.powf(m)
    }
}

/// Odd flux kernel `|d|^{p-2} d` for `p > 1`, evaluated as
/// `sign(d) |d|^{p-1}` so the singular range `p < 2` is finite at `d = 0`.
#[inline]
pub fn flux(d: f64, p: f64) -> f64 {
    if p == 2.0 {
        d
    } else if p == 3.0 {
        d.abs() * d
    } else {
        odd_pow(d, p - 1.0)
    }
}

/// `w = u^m` for a whole field, with the non-finite check the scheme relies
/// on (negative bases with fractional exponents surface here as NaN).
fn power_field(u: &DiscreteField, m: f64) -> Result<Vec<f64>> {
    if u.values().iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("NaN in operator input".into()));
    }
    let vals = u.values();
    let w = map_indexed(vals.len(), |i| pow_m(vals[i], m));
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(
            "u^m is not finite (overflow or negative base)".into(),
        ));
    }
    Ok(w)
}

/// Area-weighted face fluxes of `w`, indexed `0..=n`. Face 0 is the center
/// (zero area, zero flux); face n uses the Dirichlet ghost `w = 0`.
fn weighted_face_fluxes(u: &DiscreteField, w: &[f64], p: f64) -> Vec<f64> {
    let grid = u.grid();
    let n = grid.n_cells();
    let inv_dr = 1.0 / grid.dr();
    let areas = grid.face_areas();
    map_indexed(n + 1, |j| {
        if j == 0 {
            return 0.0;
        }
        let w_out = if j == n { 0.0 } else { w[j] };
        let d = (w_out - w[j - 1]) * inv_dr;
        areas[j] * flux(d, p)
    })
}

/// Discrete `Delta_p(u^m)`: per cell, `(A_{i+1/2} Phi_{i+1/2} -
/// A_{i-1/2} Phi_{i-1/2}) / V_i`.
pub fn dnl_operator(u: &DiscreteField, m: f64, p: f64) -> Result<DiscreteField> {
    if !(p > 1.0) {
        return Err(Error::Parameter(format!("p must exceed 1, got {p}")));
    }
    if !(m > 0.0) {
        return Err(Error::Parameter(format!("m must be positive, got {m}")));
    }
    let w = power_field(u, m)?;
    let fluxes = weighted_face_fluxes(u, &w, p);
    let vols = u.grid().cell_volumes();
    let out = map_indexed(u.len(), |i| (fluxes[i + 1] - fluxes[i]) / vols[i]);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("operator output is not finite".into()));
    }
    DiscreteField::new(u.grid().clone(), out)
}

/// Linear Laplace-Beltrami operator; identical to `dnl_operator(u, 1, 2)`
/// and kept separate so the viscosity coefficient can scale it.
pub fn linear_laplacian(u: &DiscreteField) -> Result<DiscreteField> {
    dnl_operator(u, 1.0, 2.0)
}

/// `L^s` norm with respect to the Riemannian measure: cell quadrature
/// `(sum |u_i|^s V_i)^{1/s}`; `s = f64::INFINITY` gives the sup norm.
pub fn lebesgue_norm(u: &DiscreteField, s: f64) -> Result<f64> {
    if s == f64::INFINITY {
        let vals = u.values();
        return Ok(max_by(0, vals.len(), &|i| vals[i].abs()));
    }
    if !(s >= 1.0) {
        return Err(Error::Parameter(format!(
            "Lebesgue exponent must satisfy s >= 1 (or infinity), got {s}"
        )));
    }
    let vals = u.values();
    let vols = u.grid().cell_volumes();
    let total = if s == 1.0 {
        pairwise_sum_by(0, vals.len(), &|i| vals[i].abs() * vols[i])
    } else if s == 2.0 {
        pairwise_sum_by(0, vals.len(), &|i| vals[i] * vals[i] * vols[i])
    } else {
        pairwise_sum_by(0, vals.len(), &|i| vals[i].abs().powf(s) * vols[i])
    };
    Ok(total.powf(1.0 / s))
}

/// Internals used by the time stepper (shared flux kernel, no revalidation).
pub(crate) mod kernel {
    use super::*;

    pub(crate) fn power_field_checked(u: &DiscreteField, m: f64) -> Result<Vec<f64>> {
        power_field(u, m)
    }

    pub(crate) fn weighted_fluxes(u: &DiscreteField, w: &[f64], p: f64) -> Vec<f64> {
        weighted_face_fluxes(u, w, p)
    }
}
