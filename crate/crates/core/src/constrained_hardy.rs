//! Interpolation in `H∞₁ = {f ∈ H∞ : f′(0) = 0}` on Hardy space.
//!
//! The relevant kernels come from the subspaces
//! `H²_{α,β} = span{α + βz} ⊕ z²H²` with `|α|² + |β|² = 1`. Projecting the
//! Szegő kernel onto `H²_{α,β}` gives
//! `k^{α,β}(z, w) = (α + βz)·conj(α + βw) + (z w̄)²/(1 − z w̄)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NpError, Result};
use crate::kernels::Node;
use crate::numerics::{c, HermitianMatrix, C64};
use crate::pick::{family_pick, InterpolationData};
use crate::simplex::{minimize, SimplexOptions};

pub const DEFAULT_GRID_DENSITY: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyParameter {
    pub alpha: C64,
    pub beta: C64,
}

impl FamilyParameter {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(NpError::InvalidParameter(format!(
                "|alpha|^2 + |beta|^2 must be 1, got {norm}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// `α = cos θ`, `β = sin θ·e^{iφ}`; the global phase is fixed by `α ≥ 0`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            alpha: c(theta.cos(), 0.0),
            beta: C64::from_polar(theta.sin(), phi),
        }
    }
}

fn disk_coordinate(n: &Node) -> Result<C64> {
    n.require_interior()?;
    n.as_scalar()
}

pub fn h1_kernel(p: &FamilyParameter, z: &Node, w: &Node) -> Result<C64> {
    let z = disk_coordinate(z)?;
    let w = disk_coordinate(w)?;
    Ok(h1_kernel_unchecked(p, z, w))
}

fn h1_kernel_unchecked(p: &FamilyParameter, z: C64, w: C64) -> C64 {
    let x = z * w.conj();
    (p.alpha + p.beta * z) * (p.alpha + p.beta * w).conj() + x * x / (c(1.0, 0.0) - x)
}

/// Gram matrix of `k^{α,β}` at the nodes.
pub fn h1_gram(p: &FamilyParameter, nodes: &[Node]) -> Result<HermitianMatrix> {
    let zs: Vec<C64> = nodes.iter().map(disk_coordinate).collect::<Result<_>>()?;
    HermitianMatrix::from_fn(zs.len(), |i, j| h1_kernel_unchecked(p, zs[i], zs[j]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub theta: f64,
    pub phi: f64,
    pub parameter: FamilyParameter,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstrainedFamilyReport {
    pub grid: Vec<GridPoint>,
    /// Worst grid point, possibly improved by local refinement.
    pub worst: GridPoint,
    pub refined: bool,
    pub tolerance: f64,
    pub verdict: bool,
    /// `"grid-certified"` for a positive verdict (the continuum is only
    /// sampled), `"violated"` when a negative eigenvalue was found.
    pub certification: &'static str,
}

fn min_eigenvalue(data: &InterpolationData, theta: f64, phi: f64) -> Result<(f64, f64)> {
    let p = FamilyParameter::from_angles(theta, phi);
    let g = h1_gram(&p, data.nodes())?;
    let r = family_pick(data, &g, "", 1.0)?;
    Ok((r.verdict.min_eigenvalue, r.matrix.scale()))
}

/// Sweeps the Pick matrices of the `(α, β)` family over a `g × g` grid in
/// `(θ, φ) ∈ [0, π/2] × [0, 2π)`, then refines from the worst point.
///
/// `tol` is relative to the largest Pick-matrix scale met on the grid.
pub fn h1_family_sweep(data: &InterpolationData, grid_density: usize, tol: f64) -> Result<ConstrainedFamilyReport> {
    if grid_density < 8 {
        return Err(NpError::InvalidParameter(format!(
            "grid density must be at least 8, got {grid_density}"
        )));
    }
    for n in data.nodes() {
        disk_coordinate(n)?;
    }
    let g = grid_density;
    let cells: Vec<(f64, f64)> = (0..g)
        .flat_map(|i| {
            let theta = FRAC_PI_2 * i as f64 / (g - 1) as f64;
            (0..g).map(move |j| (theta, 2.0 * PI * j as f64 / g as f64))
        })
        .collect();
    let evaluated: Vec<(GridPoint, f64)> = cells
        .par_iter()
        .map(|&(theta, phi)| {
            let (ev, scale) = min_eigenvalue(data, theta, phi)?;
            Ok((
                GridPoint {
                    theta,
                    phi,
                    parameter: FamilyParameter::from_angles(theta, phi),
                    min_eigenvalue: ev,
                },
                scale,
            ))
        })
        .collect::<Result<_>>()?;
    let scale = evaluated.iter().map(|(_, s)| *s).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let grid: Vec<GridPoint> = evaluated.into_iter().map(|(p, _)| p).collect();
    // first minimum in (θ, φ) lexicographic order
    let mut worst = grid[0];
    for p in &grid[1..] {
        if p.min_eigenvalue < worst.min_eigenvalue {
            worst = *p;
        }
    }

    let objective = |x: &[f64]| min_eigenvalue(data, x[0], x[1]).map(|(e, _)| e).unwrap_or(f64::INFINITY);
    let opts = SimplexOptions {
        max_iter: 400,
        polish_rounds: 2,
        ..SimplexOptions::default()
    };
    let step = FRAC_PI_2 / (g - 1) as f64;
    let local = minimize(objective, &[worst.theta, worst.phi], step, &opts);
    let refined = local.value < worst.min_eigenvalue;
    if refined {
        let (theta, phi) = (local.x[0], local.x[1]);
        worst = GridPoint {
            theta,
            phi,
            parameter: FamilyParameter::from_angles(theta, phi),
            min_eigenvalue: local.value,
        };
    }
    let tolerance = tol * scale;
    let verdict = worst.min_eigenvalue >= -tolerance;
    Ok(ConstrainedFamilyReport {
        grid,
        worst,
        refined,
        tolerance,
        verdict,
        certification: if verdict { "grid-certified" } else { "violated" },
    })
}
