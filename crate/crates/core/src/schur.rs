//! Classical Nevanlinna-Pick interpolation on the disk by Schur's
//! coefficient-stripping recursion.
//!
//! Each step peels one node: with `γ = w₁` and `b(z) = (z − z₁)/(1 − z̄₁z)`,
//! the remaining targets are mapped by `wᵢ ↦ (wᵢ − γ)/((1 − γ̄wᵢ)·b(zᵢ))`.
//! The interpolant is rebuilt in reverse through
//! `f = (γ + b·g)/(1 + γ̄·b·g)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::kernels::{gram_matrix, KernelSpec};
use crate::numerics::{c, PsdVerdict, C64};
use crate::pick::{scalar_pick, InterpolationData};

pub const DEFAULT_SCHUR_TOL: f64 = 1e-9;
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 4096;
/// Distance from the unit circle at which a Schur parameter is treated as unimodular.
const UNIMODULAR_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurInterpolant {
    /// `(zₖ, γₖ)` for each peeled node, in peeling order.
    pub steps: Vec<(C64, C64)>,
    /// The constant left after the last step, `|terminal| ≤ 1`.
    pub terminal: C64,
}

impl SchurInterpolant {
    pub fn constant(value: C64) -> Self {
        Self {
            steps: Vec::new(),
            terminal: value,
        }
    }

    pub fn evaluate(&self, z: C64) -> C64 {
        evaluate(self, z)
    }
}

fn blaschke_factor(a: C64, z: C64) -> C64 {
    (z - a) / (c(1.0, 0.0) - a.conj() * z)
}

/// Unwinds the recursion at `z`.
pub fn evaluate(f: &SchurInterpolant, z: C64) -> C64 {
    let one = c(1.0, 0.0);
    f.steps.iter().rev().fold(f.terminal, |g, &(node, gamma)| {
        let bg = blaschke_factor(node, z) * g;
        (gamma + bg) / (one + gamma.conj() * bg)
    })
}

/// Largest `|f|` over `samples` equispaced points of the unit circle.
pub fn boundary_sup(f: &SchurInterpolant, samples: usize) -> f64 {
    let samples = samples.max(16);
    (0..samples)
        .map(|k| evaluate(f, C64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64)).norm())
        .fold(0.0, f64::max)
}

/// Outcome of the bare recursion, without consulting the Pick matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Recursion {
    Interpolant(SchurInterpolant),
    /// A Schur parameter left the closed disk, or a unimodular parameter was
    /// followed by data it cannot match, at this (0-based) step.
    Failed { step: usize },
}

/// Runs the coefficient-stripping recursion on disk data.
pub fn schur_recursion(data: &InterpolationData, tol: f64) -> Result<Recursion> {
    let mut nodes = Vec::with_capacity(data.len());
    for n in data.nodes() {
        n.require_interior()?;
        nodes.push(n.as_scalar()?);
    }
    let mut values = data.targets().to_vec();
    let mut steps = Vec::new();
    let one = c(1.0, 0.0);
    for step in 0..nodes.len() {
        let gamma = values[step];
        let modulus = gamma.norm();
        let last = step + 1 == nodes.len();
        if modulus > 1.0 + UNIMODULAR_TOL.max(tol) {
            return Ok(Recursion::Failed { step });
        }
        if last {
            let terminal = if modulus > 1.0 { gamma / modulus } else { gamma };
            return Ok(Recursion::Interpolant(SchurInterpolant { steps, terminal }));
        }
        if modulus >= 1.0 - UNIMODULAR_TOL {
            // only the unimodular constant interpolates from here on
            let gamma = gamma / modulus;
            let all_match = values[step + 1..]
                .iter()
                .all(|w| (w - gamma).norm() <= UNIMODULAR_TOL.sqrt());
            return Ok(if all_match {
                Recursion::Interpolant(SchurInterpolant {
                    steps,
                    terminal: gamma,
                })
            } else {
                Recursion::Failed { step }
            });
        }
        let zk = nodes[step];
        for i in step + 1..nodes.len() {
            let w = values[i];
            values[i] = (w - gamma) / ((one - gamma.conj() * w) * blaschke_factor(zk, nodes[i]));
        }
        steps.push((zk, gamma));
    }
    unreachable!("loop returns on the last node")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SchurOutcome {
    /// Pick matrix positive beyond the indeterminate band.
    Solved {
        interpolant: SchurInterpolant,
        pick: PsdVerdict,
        node_error: f64,
    },
    /// Pick minimum eigenvalue inside `±tol·scale`; an interpolant is
    /// returned when the recursion still produced one.
    Marginal {
        interpolant: Option<SchurInterpolant>,
        pick: PsdVerdict,
        node_error: Option<f64>,
    },
    Unsolvable {
        /// Recursion step that failed, when the recursion itself detected it.
        step: Option<usize>,
        pick: PsdVerdict,
    },
}

impl SchurOutcome {
    pub fn interpolant(&self) -> Option<&SchurInterpolant> {
        match self {
            SchurOutcome::Solved { interpolant, .. } => Some(interpolant),
            SchurOutcome::Marginal { interpolant, .. } => interpolant.as_ref(),
            SchurOutcome::Unsolvable { .. } => None,
        }
    }

    pub fn pick(&self) -> &PsdVerdict {
        match self {
            SchurOutcome::Solved { pick, .. }
            | SchurOutcome::Marginal { pick, .. }
            | SchurOutcome::Unsolvable { pick, .. } => pick,
        }
    }

    pub fn is_unsolvable(&self) -> bool {
        matches!(self, SchurOutcome::Unsolvable { .. })
    }
}

fn node_error(f: &SchurInterpolant, data: &InterpolationData) -> f64 {
    data.nodes()
        .iter()
        .zip(data.targets())
        .map(|(z, w)| (evaluate(f, z.coordinates()[0]) - w).norm())
        .fold(0.0, f64::max)
}

/// Decides solvability from the Szegő Pick matrix and, when solvable,
/// constructs an interpolant with the Schur recursion.
pub fn solve_classical(data: &InterpolationData, tol: f64) -> Result<SchurOutcome> {
    let gram = gram_matrix(&KernelSpec::Szego, data.nodes())?;
    let report = scalar_pick(data, &gram, tol)?;
    let pick = report.verdict;
    let recursion = schur_recursion(data, tol)?;
    Ok(if pick.min_eigenvalue < -pick.tolerance {
        SchurOutcome::Unsolvable {
            step: match recursion {
                Recursion::Failed { step } => Some(step),
                Recursion::Interpolant(_) => None,
            },
            pick,
        }
    } else if pick.min_eigenvalue <= pick.tolerance {
        match recursion {
            Recursion::Interpolant(f) => {
                let err = node_error(&f, data);
                SchurOutcome::Marginal {
                    interpolant: Some(f),
                    pick,
                    node_error: Some(err),
                }
            }
            Recursion::Failed { .. } => SchurOutcome::Marginal {
                interpolant: None,
                pick,
                node_error: None,
            },
        }
    } else {
        match recursion {
            Recursion::Interpolant(f) => {
                let err = node_error(&f, data);
                SchurOutcome::Solved {
                    interpolant: f,
                    pick,
                    node_error: err,
                }
            }
            // positive Pick matrix but a parameter touched the circle: the
            // recursion lost accuracy, report at the boundary
            Recursion::Failed { .. } => SchurOutcome::Marginal {
                interpolant: None,
                pick,
                node_error: None,
            },
        }
    })
}
