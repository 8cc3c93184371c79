//! Rotationally symmetric model manifolds.
//!
//! A model manifold is determined by its dimension `N` and a warping
//! function `psi` with `psi(0) = 0`, `psi'(0) = 1`: the metric is
//! `dr^2 + psi(r)^2 dtheta^2`, geodesic spheres have area
//! `omega_{N-1} psi(r)^{N-1}` and balls carry the induced measure. Euclidean
//! space (`psi = r`) and constant-curvature hyperbolic space
//! (`psi = sinh(sqrt(c) r)/sqrt(c)`, sectional curvature `-c`) are built in;
//! arbitrary warpings come in as tabulated functions with monotone cubic
//! interpolation.

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, gamma, MonotoneCubic};

/// Relative accuracy of ball-volume quadrature.
const VOLUME_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum Warping {
    Euclidean,
    Hyperbolic { curvature: f64 },
    Custom(MonotoneCubic),
}

#[derive(Debug, Clone)]
pub struct ModelManifold {
    dimension: u32,
    warping: Warping,
}

impl ModelManifold {
    pub fn euclidean(dimension: u32) -> Result<Self> {
        Self::new(dimension, Warping::Euclidean)
    }

    /// Cartan-Hadamard model with sectional curvature identically `-c`.
    pub fn hyperbolic(dimension: u32, curvature: f64) -> Result<Self> {
        if !(curvature > 0.0) {
            return Err(Error::Parameter(format!(
                "hyperbolic curvature parameter must be positive, got {curvature}"
            )));
        }
        Self::new(dimension, Warping::Hyperbolic { curvature })
    }

    /// Warping given as a `(r, psi)` table; validated against `psi(0) = 0`,
    /// `psi'(0) = 1` and positivity.
    pub fn custom(dimension: u32, table: MonotoneCubic) -> Result<Self> {
        if table.x_min() != 0.0 {
            return Err(Error::Config("custom psi table must start at r = 0".into()));
        }
        if table.eval(0.0)? != 0.0 {
            return Err(Error::Config("custom psi must satisfy psi(0) = 0".into()));
        }
        let d0 = table.derivative(0.0)?;
        if (d0 - 1.0).abs() > 1e-3 {
            return Err(Error::Config(format!(
                "custom psi must satisfy psi'(0) = 1, table gives {d0}"
            )));
        }
        let probe = table.x_max() * 1e-3;
        if table.eval(probe)? <= 0.0 || table.eval(table.x_max())? <= 0.0 {
            return Err(Error::Config("custom psi must be positive for r > 0".into()));
        }
        Self::new(dimension, Warping::Custom(table))
    }

    fn new(dimension: u32, warping: Warping) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::Parameter(format!(
                "manifold dimension must be >= 2, got {dimension}"
            )));
        }
        Ok(Self { dimension, warping })
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn warping_kind(&self) -> &Warping {
        &self.warping
    }

    /// Area of the Euclidean unit sphere S^{N-1}: `2 pi^{N/2} / Gamma(N/2)`.
    pub fn unit_sphere_area(&self) -> f64 {
        let half_n = self.dimension as f64 / 2.0;
        2.0 * std::f64::consts::PI.powf(half_n) / gamma(half_n)
    }

    /// Warping function `psi(r)`.
    pub fn warping(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("warping needs r >= 0, got {r}")));
        }
        match &self.warping {
            Warping::Euclidean => Ok(r),
            Warping::Hyperbolic { curvature } => {
                let sq = curvature.sqrt();
                Ok((sq * r).sinh() / sq)
            }
            Warping::Custom(table) => table.eval(r),
        }
    }

    /// Geodesic sphere area `omega_{N-1} psi(r)^{N-1}` for `r > 0`.
    pub fn sphere_area(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("sphere_area needs r > 0, got {r}")));
        }
        Ok(self.sphere_area_unchecked(r))
    }

    /// Same as [`sphere_area`](Self::sphere_area) but defined (as 0) at r = 0;
    /// used for grid face areas where the center face is legitimately present.
    pub(crate) fn sphere_area_unchecked(&self, r: f64) -> f64 {
        let psi = self.warping(r).unwrap_or(f64::NAN);
        self.unit_sphere_area() * psi.powi(self.dimension as i32 - 1)
    }

    /// Riemannian volume of the geodesic ball of radius `R`, by adaptive
    /// quadrature of the sphere-area integrand.
    pub fn ball_volume(&self, radius: f64) -> Result<f64> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!(
                "ball_volume needs R > 0, got {radius}"
            )));
        }
        // Fail early if a custom table does not cover the ball.
        self.warping(radius)?;
        Ok(adaptive_simpson(
            |r| self.sphere_area_unchecked(r),
            0.0,
            radius,
            VOLUME_REL_TOL,
        ))
    }
}
