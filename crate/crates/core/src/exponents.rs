//! Closed-form exponents of the smoothing and decay estimates, in exact
//! rational arithmetic.
//!
//! Every quantity here is a rational function of the model parameters, so
//! computing over `BigRational` keeps the values exact; `f64` front ends for
//! the same formulas live in [`crate::monitors`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};

pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

fn int(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// `m (p - 1)`, the doubly nonlinear homogeneity.
pub fn homogeneity(m: &BigRational, p: &BigRational) -> BigRational {
    m * (p - BigRational::one())
}

/// Critical reaction exponent `m (p - 1) + p / N`.
pub fn fujita_exponent(m: &BigRational, p: &BigRational, dim: u32) -> BigRational {
    homogeneity(m, p) + p / int(dim as i64)
}

/// `q_0 = [q - m (p - 1)] N / p`.
pub fn q_zero(m: &BigRational, p: &BigRational, q: &BigRational, dim: u32) -> BigRational {
    (q - homogeneity(m, p)) * int(dim as i64) / p
}

/// Denominator `N [m (p - 1) - 1] + p r` common to the smoothing bounds.
fn smoothing_denominator(m: &BigRational, p: &BigRational, dim: u32, r: &BigRational) -> Result<BigRational> {
    let d = int(dim as i64) * (homogeneity(m, p) - BigRational::one()) + p * r;
    if d <= BigRational::from(BigInt::from(0)) {
        return Err(Error::Parameter(
            "smoothing denominator N[m(p-1)-1] + pr must be positive".into(),
        ));
    }
    Ok(d)
}

/// Time exponent `N / (N [m (p - 1) - 1] + p r)` of the `L^r -> L^infty`
/// smoothing bound.
pub fn smoothing_time_exponent(
    m: &BigRational,
    p: &BigRational,
    dim: u32,
    r: &BigRational,
) -> Result<BigRational> {
    Ok(int(dim as i64) / smoothing_denominator(m, p, dim, r)?)
}

/// Datum exponent `p r / (N [m (p - 1) - 1] + p r)` applied to the `L^r`
/// norm of the datum in the same bound.
pub fn smoothing_datum_exponent(
    m: &BigRational,
    p: &BigRational,
    dim: u32,
    r: &BigRational,
) -> Result<BigRational> {
    Ok(p * r / smoothing_denominator(m, p, dim, r)?)
}

/// `beta_{r,s} = (1 - p s / (N [m (p - 1) - 1] + p r)) / (m (p - 1) - 1)`.
pub fn beta_rs(
    m: &BigRational,
    p: &BigRational,
    dim: u32,
    r: &BigRational,
    s: &BigRational,
) -> Result<BigRational> {
    let denom = smoothing_denominator(m, p, dim, r)?;
    let hom = homogeneity(m, p) - BigRational::one();
    if hom <= BigRational::from(BigInt::from(0)) {
        return Err(Error::Parameter("beta_rs needs m(p-1) > 1".into()));
    }
    Ok((BigRational::one() - p * s / denom) / hom)
}

/// `gamma_s = (s_0 / m(p-1)) (1/s_0 - 1/s)` of the `L^{s_0} -> L^s` bound.
pub fn gamma_s(
    m: &BigRational,
    p: &BigRational,
    s0: &BigRational,
    s: &BigRational,
) -> BigRational {
    s0 / homogeneity(m, p) * (BigRational::one() / s0 - BigRational::one() / s)
}

/// `delta_s = s_0 / s`, the datum exponent of the same bound.
pub fn delta_s(s0: &BigRational, s: &BigRational) -> BigRational {
    s0 / s
}

/// Exact `f64` image of a rational (rounded once).
pub fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}
