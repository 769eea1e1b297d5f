//! Finite-dimensional multiplier algebras spanned by rank-one idempotents.
//!
//! An invertible `S` with columns `xᵢ` and dual basis `yᵢ` (the columns of
//! `(Sᴴ)⁻¹`, so `⟨xⱼ, yᵢ⟩ = δᵢⱼ`) gives idempotents `pᵢ = xᵢ yᵢᴴ`. Their
//! span is the multiplier algebra of `ℂⁿ` with kernel `k(λᵢ, λⱼ) = ⟨yⱼ, yᵢ⟩`.
//! Invariant subspaces are `L_σ = span{xᵢ : i ∈ σ}`, the ideal of elements
//! vanishing on `E` is `span{pᵢ : i ∉ E}`, and the semi-invariant pieces are
//! `N_σ = L_σ ⊖ L_{σ∖E}`.
//!
//! Index sets are 0-based bitmasks here; reports render them 1-based.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NpError, Result};
use crate::numerics::{
    c, compression_norm, max_abs_entry, orthonormal_basis, singular_values, spectral_norm, svd, subspace_difference, CMatrix,
    CVector, HermitianMatrix, Subspace, C64, DEFAULT_RANK_TOL,
};
use crate::pick::{block_matrix, multiplicity_pick, PickReport};
use crate::bfgs::{self, BfgsOptions};

/// Lattice enumeration is exponential; larger algebras need an explicit override.
pub const DEFAULT_MAX_N: usize = 12;
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-12;

/// A subset of `{0, …, n−1}` as a bitmask.
pub type IndexSet = u64;

pub fn mask_of(indices: &[usize]) -> IndexSet {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn members(mask: IndexSet, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

/// `{1,2,3}`-style label with 1-based indices.
pub fn set_label(mask: IndexSet, n: usize) -> String {
    let items: Vec<String> = members(mask, n).iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

#[derive(Debug, Clone)]
pub struct FiniteAlgebra {
    n: usize,
    s: CMatrix,
    y: CMatrix,
    idempotents: Vec<CMatrix>,
    condition: f64,
}

impl FiniteAlgebra {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn similarity(&self) -> &CMatrix {
        &self.s
    }

    pub fn x(&self, i: usize) -> CVector {
        self.s.column(i).into_owned()
    }

    pub fn y(&self, i: usize) -> CVector {
        self.y.column(i).into_owned()
    }

    pub fn dual(&self) -> &CMatrix {
        &self.y
    }

    pub fn idempotent(&self, i: usize) -> &CMatrix {
        &self.idempotents[i]
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Kernel Gram `[⟨yⱼ, yᵢ⟩]`.
    pub fn kernel_gram(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::from_fn(self.n, |i, j| self.y.column(i).dotc(&self.y.column(j)))
    }

    /// `max |⟨xⱼ, yᵢ⟩ − δᵢⱼ|`.
    pub fn duality_defect(&self) -> f64 {
        max_abs_entry(&(self.y.adjoint() * &self.s - CMatrix::identity(self.n, self.n)))
    }

    /// Largest violation of `pᵢpⱼ = δᵢⱼpᵢ` and `Σpᵢ = I`.
    pub fn idempotent_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let prod = &self.idempotents[i] * &self.idempotents[j];
                let target = if i == j { self.idempotents[i].clone() } else { CMatrix::zeros(self.n, self.n) };
                worst = worst.max(max_abs_entry(&(prod - target)));
            }
        }
        let sum = self.idempotents.iter().fold(CMatrix::zeros(self.n, self.n), |acc, p| acc + p);
        worst.max(max_abs_entry(&(sum - CMatrix::identity(self.n, self.n))))
    }

    fn check_index_set(&self, mask: IndexSet) -> Result<()> {
        if self.n < 64 && mask >> self.n != 0 {
            return Err(NpError::InvalidParameter(format!("index set exceeds n = {}", self.n)));
        }
        Ok(())
    }

    fn full_mask(&self) -> IndexSet {
        if self.n == 64 {
            u64::MAX
        } else {
            (1 << self.n) - 1
        }
    }
}

/// Builds the algebra of a similarity `S`; `tol` bounds the ratio of the
/// smallest to the largest singular value.
pub fn build_algebra(s: &CMatrix, tol: f64) -> Result<FiniteAlgebra> {
    if s.nrows() != s.ncols() {
        return Err(NpError::NotSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    let n = s.nrows();
    if n == 0 {
        return Err(NpError::EmptyAmbient);
    }
    if n > 63 {
        return Err(NpError::InvalidParameter("at most 63 idempotents are supported".into()));
    }
    if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NpError::InvalidParameter("similarity has non-finite entries".into()));
    }
    let sv = singular_values(s);
    let smax = sv[0];
    let smin = sv[n - 1];
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(ratio > tol) {
        return Err(NpError::SingularSimilarity { ratio });
    }
    let y = s
        .adjoint()
        .try_inverse()
        .ok_or(NpError::SingularSimilarity { ratio })?;
    let idempotents = (0..n)
        .map(|i| s.column(i) * y.column(i).adjoint())
        .collect();
    Ok(FiniteAlgebra {
        n,
        s: s.clone(),
        y,
        idempotents,
        condition: 1.0 / ratio,
    })
}

/// `A = Σ aᵢ pᵢ = S·diag(a)·S⁻¹`.
pub fn assemble(alg: &FiniteAlgebra, a: &[C64]) -> Result<CMatrix> {
    if a.len() != alg.n {
        return Err(NpError::DimensionMismatch {
            what: "multiplier coefficients",
            expected: alg.n,
            found: a.len(),
        });
    }
    let scaled = CMatrix::from_fn(alg.n, alg.n, |r, k| alg.s[(r, k)] * a[k]);
    Ok(scaled * alg.y.adjoint())
}

pub fn lattice_subspace(alg: &FiniteAlgebra, sigma: IndexSet) -> Result<Subspace> {
    alg.check_index_set(sigma)?;
    let cols: Vec<CVector> = members(sigma, alg.n).into_iter().map(|i| alg.x(i)).collect();
    orthonormal_basis(alg.n, &cols, DEFAULT_RANK_TOL)
}

/// `N_σ = L_σ ⊖ L_{σ∖E}`.
pub fn semi_invariant(alg: &FiniteAlgebra, sigma: IndexSet, e: IndexSet) -> Result<Subspace> {
    alg.check_index_set(sigma | e)?;
    let big = lattice_subspace(alg, sigma)?;
    let small = lattice_subspace(alg, sigma & !e)?;
    subspace_difference(&big, &small)
}

/// Unit vector spanning `L_σ ⊖ L_{σ∖{i}}` for `i ∈ σ`: the extended kernel
/// direction at `λᵢ` for the invariant subspace `L_σ`.
pub fn kernel_direction(alg: &FiniteAlgebra, sigma: IndexSet, i: usize) -> Result<CVector> {
    if sigma & (1 << i) == 0 {
        return Ok(CVector::zeros(alg.n));
    }
    let piece = semi_invariant(alg, sigma, 1 << i)?;
    Ok(piece.basis().column(0).into_owned())
}

fn check_ideal(alg: &FiniteAlgebra, e: IndexSet) -> Result<()> {
    alg.check_index_set(e)?;
    if e == 0 {
        return Err(NpError::InvalidParameter("E must be nonempty".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaNorm {
    /// 1-based members of σ.
    pub sigma: Vec<usize>,
    pub dim: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionTable {
    pub entries: Vec<SigmaNorm>,
    pub supremum: f64,
    pub argmax: Vec<usize>,
}

fn one_based(mask: IndexSet, n: usize) -> Vec<usize> {
    members(mask, n).into_iter().map(|i| i + 1).collect()
}

fn compression_table(alg: &FiniteAlgebra, a: &[C64], e: IndexSet, sigmas: Vec<IndexSet>) -> Result<CompressionTable> {
    let am = assemble(alg, a)?;
    let entries: Vec<SigmaNorm> = sigmas
        .par_iter()
        .map(|&sigma| {
            let piece = semi_invariant(alg, sigma, e)?;
            Ok(SigmaNorm {
                sigma: one_based(sigma, alg.n),
                dim: piece.dim(),
                norm: compression_norm(&am, &piece)?,
            })
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, entry) in entries.iter().enumerate() {
        if entry.norm > entries[best].norm {
            best = k;
        }
    }
    Ok(CompressionTable {
        supremum: entries[best].norm,
        argmax: entries[best].sigma.clone(),
        entries,
    })
}

/// Compression norms `‖P_{N_σ} A P_{N_σ}‖` over every `σ ⊇ E`.
pub fn compression_sup(alg: &FiniteAlgebra, a: &[C64], e: IndexSet) -> Result<CompressionTable> {
    check_ideal(alg, e)?;
    let rest = alg.full_mask() & !e;
    let sigmas = subsets_of(rest).into_iter().map(|extra| e | extra).collect();
    compression_table(alg, a, e, sigmas)
}

/// Compression norms over every `σ ⊆ {1..n}`.
pub fn compression_all(alg: &FiniteAlgebra, a: &[C64], e: IndexSet) -> Result<CompressionTable> {
    check_ideal(alg, e)?;
    compression_table(alg, a, e, subsets_of(alg.full_mask()))
}

/// All submasks of `mask` in increasing numeric order.
fn subsets_of(mask: IndexSet) -> Vec<IndexSet> {
    let mut out = Vec::new();
    let mut sub: IndexSet = 0;
    loop {
        out.push(sub);
        if sub == mask {
            break;
        }
        sub = (sub.wrapping_sub(mask)) & mask;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative accuracy target; restarts must agree within `10·tol`
    /// (relative to `max(1, distance)`).
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iter: 4000,
            tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceResult {
    pub distance: f64,
    /// Coefficients `cᵢ` for `i ∉ E`, in increasing index order.
    pub minimizer: Vec<C64>,
    /// Best value reached by each restart.
    pub restart_values: Vec<f64>,
    /// Largest restart value minus the best one.
    pub spread: f64,
    pub evaluations: usize,
}

const POLISH_ROUNDS: usize = 4;

/// `‖A − Σ_{i∉E} cᵢpᵢ‖` for `c` packed as (re, im) pairs, with its gradient.
///
/// With top singular pair `(u, v)` the derivative along `cₖ` is
/// `−(u·xₖ)(yₖ·v)`, taken where the top singular value is simple.
fn norm_and_gradient(alg: &FiniteAlgebra, a: &[C64], free: &[usize], v: &[f64], grad: &mut [f64]) -> f64 {
    let n = alg.n;
    let mut coeffs = a.to_vec();
    for (k, &i) in free.iter().enumerate() {
        coeffs[i] -= c(v[2 * k], v[2 * k + 1]);
    }
    let m = CMatrix::from_fn(n, n, |r, k| alg.s[(r, k)] * coeffs[k]) * alg.y.adjoint();
    let d = svd(&m);
    let (u, w) = (d.u.column(0), d.v.column(0));
    for (k, &i) in free.iter().enumerate() {
        let z = u.dotc(&alg.s.column(i)) * alg.y.column(i).dotc(&w);
        grad[2 * k] = -z.re;
        grad[2 * k + 1] = z.im;
    }
    d.singular_values[0]
}

/// `dist(A, 𝔍_E) = min_c ‖A − Σ_{i∉E} cᵢpᵢ‖`, a convex problem solved by
/// quasi-Newton descent over the real and imaginary parts of `c`.
pub fn distance_to_ideal(alg: &FiniteAlgebra, a: &[C64], e: IndexSet, opt: &OptimizerOptions) -> Result<DistanceResult> {
    check_ideal(alg, e)?;
    let am = assemble(alg, a)?;
    let free: Vec<usize> = members(alg.full_mask() & !e, alg.n);
    if free.is_empty() {
        let d = spectral_norm(&am);
        return Ok(DistanceResult {
            distance: d,
            minimizer: Vec::new(),
            restart_values: vec![d],
            spread: 0.0,
            evaluations: 1,
        });
    }
    let objective = |v: &[f64], grad: &mut [f64]| norm_and_gradient(alg, a, &free, v, grad);
    let scale = a.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; 2 * free.len()]];
    let diagonal: Vec<f64> = free.iter().flat_map(|&i| [a[i].re, a[i].im]).collect();
    starts.push(diagonal.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    while starts.len() < opt.restarts.max(1) {
        starts.push(diagonal.iter().map(|x| x + scale * rng.random_range(-1.0..1.0)).collect());
    }
    starts.truncate(opt.restarts.max(1));

    let bfgs_opts = BfgsOptions {
        max_iter: opt.max_iter,
        ..BfgsOptions::default()
    };
    let runs: Vec<_> = starts
        .par_iter()
        .map(|s| {
            // a fresh quasi-Newton model after each stall helps at the kinks
            let mut run = bfgs::minimize(objective, s, &bfgs_opts);
            let mut evaluations = run.evaluations;
            for _ in 0..POLISH_ROUNDS {
                let next = bfgs::minimize(objective, &run.x, &bfgs_opts);
                evaluations += next.evaluations;
                let improved = next.value < run.value - opt.tol * 1e-3 * run.value.max(1.0);
                if next.value < run.value {
                    run = next;
                }
                if !improved {
                    break;
                }
            }
            run.evaluations = evaluations;
            run
        })
        .collect();
    let mut best = 0;
    for (k, r) in runs.iter().enumerate() {
        if r.value < runs[best].value {
            best = k;
        }
    }
    let distance = runs[best].value;
    let restart_values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let spread = restart_values.iter().fold(0.0_f64, |m, v| m.max(v - distance));
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    if spread > 10.0 * opt.tol * distance.max(1.0) {
        return Err(NpError::NonConvergence { best: distance, spread });
    }
    let x = &runs[best].x;
    let minimizer = (0..free.len()).map(|k| c(x[2 * k], x[2 * k + 1])).collect();
    Ok(DistanceResult {
        distance,
        minimizer,
        restart_values,
        spread,
        evaluations,
    })
}

/// Both sides of the distance formula for one element and ideal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub per_sigma: Vec<SigmaNorm>,
    pub sup_compression: f64,
    pub argmax_sigma: Vec<usize>,
    pub distance: f64,
    pub minimizer: Vec<C64>,
    pub gap: f64,
    pub restart_spread: f64,
}

pub fn np_gap(alg: &FiniteAlgebra, a: &[C64], e: IndexSet, opt: &OptimizerOptions) -> Result<DistanceReport> {
    let table = compression_sup(alg, a, e)?;
    let dist = distance_to_ideal(alg, a, e, opt)?;
    Ok(DistanceReport {
        gap: dist.distance - table.supremum,
        per_sigma: table.entries,
        sup_compression: table.supremum,
        argmax_sigma: table.argmax,
        distance: dist.distance,
        minimizer: dist.minimizer,
        restart_spread: dist.spread,
    })
}

fn sigmas_containing(alg: &FiniteAlgebra, e: IndexSet) -> Vec<IndexSet> {
    subsets_of(alg.full_mask() & !e).into_iter().map(|x| e | x).collect()
}

fn kernel_directions(alg: &FiniteAlgebra, sigma: IndexSet, e_members: &[usize]) -> Result<Vec<CVector>> {
    e_members.iter().map(|&i| kernel_direction(alg, sigma, i)).collect()
}

/// One Pick matrix per `σ ⊇ E`, built from the extended kernel directions
/// `κᵢ` of `L_σ` at the nodes of `E`. `targets` follow `E` in increasing order.
pub fn family_pick_verdict(alg: &FiniteAlgebra, e: IndexSet, targets: &[C64], rel_tol: f64) -> Result<Vec<PickReport>> {
    check_ideal(alg, e)?;
    let e_members = members(e, alg.n);
    if targets.len() != e_members.len() {
        return Err(NpError::DimensionMismatch {
            what: "targets over E",
            expected: e_members.len(),
            found: targets.len(),
        });
    }
    sigmas_containing(alg, e)
        .par_iter()
        .map(|&sigma| {
            let kappa = kernel_directions(alg, sigma, &e_members)?;
            multiplicity_pick(targets, &kappa, &format!("sigma={}", set_label(sigma, alg.n)), rel_tol)
        })
        .collect()
}

/// Matrix-target version: `(i, j)` block `(I_r − WᵢWⱼᴴ) ⊗ QᵢᴴQⱼ` with `Qᵢ`
/// spanning the kernel piece at `λᵢ` inside `L_σ`.
pub fn block_family_test(alg: &FiniteAlgebra, e: IndexSet, targets: &[CMatrix], rel_tol: f64) -> Result<Vec<PickReport>> {
    check_ideal(alg, e)?;
    let e_members = members(e, alg.n);
    if targets.len() != e_members.len() {
        return Err(NpError::DimensionMismatch {
            what: "targets over E",
            expected: e_members.len(),
            found: targets.len(),
        });
    }
    let r = targets[0].nrows();
    for t in targets {
        if t.nrows() != r || t.ncols() != r {
            return Err(NpError::DimensionMismatch {
                what: "matrix target size",
                expected: r,
                found: t.nrows().max(t.ncols()),
            });
        }
    }
    sigmas_containing(alg, e)
        .par_iter()
        .map(|&sigma| {
            let kappa = kernel_directions(alg, sigma, &e_members)?;
            let gram = HermitianMatrix::from_fn(kappa.len(), |i, j| kappa[i].dotc(&kappa[j]))?;
            let m = block_matrix(targets, |i, j| CMatrix::from_element(1, 1, gram.get(i, j)))?;
            let verdict = crate::numerics::psd_check_relative(&m, rel_tol);
            Ok(PickReport {
                matrix: m,
                verdict,
                label: format!("sigma={}", set_label(sigma, alg.n)),
            })
        })
        .collect()
}
