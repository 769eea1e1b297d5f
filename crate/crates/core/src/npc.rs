//! Complete Nevanlinna-Pick test for a finite Gram matrix and the
//! corresponding embedding into Drury-Arveson space.
//!
//! Normalizing at a base node `b`, the kernel is complete NP on the node set
//! exactly when `F = [1 − g_{ib} g_{bj} / (g_{ij} g_{bb})]` is positive. A
//! factorization `F_{ij} = ⟨bᵢ, bⱼ⟩` with `δᵢ = g_{bi}/√g_{bb}` then gives
//! `g_{ij} = conj(δᵢ)·δⱼ / (1 − ⟨bᵢ, bⱼ⟩)`.
//!
//! On a finite set the test is exact for the restricted kernel and only
//! necessary for any extension of it.

use serde::Serialize;

use crate::error::{NpError, Result};
use crate::numerics::{c, psd_check, HermitianMatrix, PsdVerdict, C64};

pub const DEFAULT_NPC_TOL: f64 = 1e-10;
const RANK_CUT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NpcReport {
    pub verdict: PsdVerdict,
    pub f_matrix: HermitianMatrix,
    pub base: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingResult {
    /// Points of `𝔹_d`, one per node.
    pub b: Vec<Vec<C64>>,
    pub delta: Vec<C64>,
    pub residual: f64,
    pub d: usize,
    pub base: usize,
}

fn check_base(gram: &HermitianMatrix, base: usize) -> Result<()> {
    if base >= gram.dim() {
        return Err(NpError::InvalidParameter(format!(
            "base index {base} out of range for {} nodes",
            gram.dim()
        )));
    }
    Ok(())
}

/// Assembles `F` after checking that no Gram entry vanishes.
pub fn npc_matrix(gram: &HermitianMatrix, base: usize, tol: f64) -> Result<HermitianMatrix> {
    check_base(gram, base)?;
    let n = gram.dim();
    let floor = tol * gram.scale();
    for i in 0..n {
        for j in 0..=i {
            if gram.get(i, j).norm() <= floor {
                return Err(NpError::Reducible(j, i));
            }
        }
    }
    let gbb = gram.get(base, base);
    HermitianMatrix::from_fn(n, |i, j| {
        c(1.0, 0.0) - gram.get(i, base) * gram.get(base, j) / (gram.get(i, j) * gbb)
    })
}

pub fn complete_np_test(gram: &HermitianMatrix, base: usize, tol: f64) -> Result<NpcReport> {
    let f = npc_matrix(gram, base, tol)?;
    let verdict = psd_check(&f, tol);
    Ok(NpcReport {
        verdict,
        f_matrix: f,
        base,
    })
}

/// Factors `F` and returns the Drury-Arveson coordinates of every node.
pub fn embed_drury_arveson(gram: &HermitianMatrix, base: usize, tol: f64) -> Result<EmbeddingResult> {
    let report = complete_np_test(gram, base, tol)?;
    if !report.verdict.is_psd {
        return Err(NpError::NotCompleteNp {
            min_eigenvalue: report.verdict.min_eigenvalue,
        });
    }
    let n = gram.dim();
    let f = report.f_matrix.matrix();
    let sym = (f + f.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l));
    let kept: Vec<usize> = (0..n)
        .filter(|&k| lmax > 0.0 && eig.eigenvalues[k] > RANK_CUT * lmax)
        .collect();
    let d = kept.len();
    let b: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            kept.iter()
                .map(|&k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt())
                .collect()
        })
        .collect();
    let root = gram.get(base, base).re.sqrt();
    let delta: Vec<C64> = (0..n).map(|i| gram.get(base, i) / root).collect();
    let residual = reconstruction_residual(gram, &b, &delta);
    Ok(EmbeddingResult {
        b,
        delta,
        residual,
        d,
        base,
    })
}

fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

/// `max |g_{ij} − conj(δᵢ)δⱼ/(1 − ⟨bᵢ, bⱼ⟩)|`.
pub fn reconstruction_residual(gram: &HermitianMatrix, b: &[Vec<C64>], delta: &[C64]) -> f64 {
    let n = gram.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let model = delta[i].conj() * delta[j] / (c(1.0, 0.0) - inner(&b[i], &b[j]));
            worst = worst.max((gram.get(i, j) - model).norm());
        }
    }
    worst
}
