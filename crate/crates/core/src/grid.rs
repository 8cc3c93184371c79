//! Finite-volume discretization of a geodesic ball: uniform radial grids
//! with manifold-induced cell volumes and face areas, and cell-centered
//! scalar fields.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::ModelManifold;
use crate::numerics::{adaptive_simpson, pairwise_sum};

/// Uniform radial mesh on `[0, R]`. Face `i` sits at `i * dr` (so face 0 is
/// the center, where the area vanishes and no flux can pass), cell `i` spans
/// `[i dr, (i+1) dr]` with center `(i + 1/2) dr`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    manifold: ModelManifold,
    r_outer: f64,
    n_cells: usize,
    dr: f64,
    cell_centers: Vec<f64>,
    face_radii: Vec<f64>,
    face_areas: Vec<f64>,
    cell_volumes: Vec<f64>,
    total_volume: f64,
}

/// Build a grid; cell volumes come from per-cell quadrature of the
/// sphere-area weight so that they sum to the ball volume.
pub fn build_grid(manifold: &ModelManifold, radius: f64, n_cells: usize) -> Result<RadialGrid> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Config(format!(
            "grid radius must be positive and finite, got {radius}"
        )));
    }
    if n_cells < 8 {
        return Err(Error::Config(format!(
            "grid needs at least 8 cells, got {n_cells}"
        )));
    }
    // Custom warpings must cover the whole ball.
    manifold.warping(radius)?;

    let dr = radius / n_cells as f64;
    let face_radii: Vec<f64> = (0..=n_cells).map(|i| i as f64 * dr).collect();
    let cell_centers: Vec<f64> = (0..n_cells).map(|i| (i as f64 + 0.5) * dr).collect();
    let face_areas: Vec<f64> = face_radii
        .iter()
        .map(|&r| {
            if r == 0.0 {
                0.0
            } else {
                manifold.sphere_area_unchecked(r)
            }
        })
        .collect();
    let cell_volumes: Vec<f64> = (0..n_cells)
        .map(|i| {
            adaptive_simpson(
                |r| manifold.sphere_area_unchecked(r),
                face_radii[i],
                face_radii[i + 1],
                1e-13,
            )
        })
        .collect();
    let total_volume = pairwise_sum(&cell_volumes);

    Ok(RadialGrid {
        manifold: manifold.clone(),
        r_outer: radius,
        n_cells,
        dr,
        cell_centers,
        face_radii,
        face_areas,
        cell_volumes,
        total_volume,
    })
}

impl RadialGrid {
    pub fn manifold(&self) -> &ModelManifold {
        &self.manifold
    }

    pub fn outer_radius(&self) -> f64 {
        self.r_outer
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn cell_centers(&self) -> &[f64] {
        &self.cell_centers
    }

    pub fn face_radii(&self) -> &[f64] {
        &self.face_radii
    }

    /// Face areas, indexed `0..=n_cells`; entry 0 is exactly 0.
    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volumes
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }
}

/// Cell-centered scalar field on a [`RadialGrid`].
///
/// Entries must stay finite; sign constraints are imposed by the evolution,
/// not here, so operators can be probed with signed test data.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::Config(format!(
                "field has {} values for a {}-cell grid",
                values.len(),
                grid.n_cells()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n_cells();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Sample a radial profile at the cell centers.
    pub fn from_profile<F: Fn(f64) -> f64>(grid: Arc<RadialGrid>, profile: F) -> Self {
        let values = grid.cell_centers().iter().map(|&r| profile(r)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
