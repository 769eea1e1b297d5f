//! Pick matrices and their positivity verdicts.

use serde::Serialize;

use crate::error::{NpError, Result};
use crate::kernels::Node;
use crate::numerics::{c, psd_check_relative, CMatrix, CVector, HermitianMatrix, PsdVerdict, C64};

/// Default verdict tolerance, relative to the Pick matrix scale.
pub const DEFAULT_PICK_TOL: f64 = 1e-9;

fn check_distinct(nodes: &[Node]) -> Result<()> {
    for i in 0..nodes.len() {
        for j in 0..i {
            if nodes[i] == nodes[j] {
                return Err(NpError::DuplicateNodes(j, i));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationData {
    nodes: Vec<Node>,
    targets: Vec<C64>,
}

impl InterpolationData {
    pub fn new(nodes: Vec<Node>, targets: Vec<C64>) -> Result<Self> {
        if nodes.len() != targets.len() {
            return Err(NpError::DimensionMismatch {
                what: "targets per node",
                expected: nodes.len(),
                found: targets.len(),
            });
        }
        if nodes.is_empty() {
            return Err(NpError::InvalidParameter("at least one node is required".into()));
        }
        check_distinct(&nodes)?;
        Ok(Self { nodes, targets })
    }

    /// Disk data from scalar node and target lists.
    pub fn on_disk(nodes: &[C64], targets: &[C64]) -> Result<Self> {
        Self::new(nodes.iter().map(|&z| Node::scalar(z)).collect(), targets.to_vec())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn targets(&self) -> &[C64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixInterpolationData {
    nodes: Vec<Node>,
    targets: Vec<CMatrix>,
    r: usize,
}

impl MatrixInterpolationData {
    pub fn new(nodes: Vec<Node>, targets: Vec<CMatrix>) -> Result<Self> {
        if nodes.len() != targets.len() {
            return Err(NpError::DimensionMismatch {
                what: "targets per node",
                expected: nodes.len(),
                found: targets.len(),
            });
        }
        if nodes.is_empty() {
            return Err(NpError::InvalidParameter("at least one node is required".into()));
        }
        let r = targets[0].nrows();
        if r == 0 {
            return Err(NpError::EmptyAmbient);
        }
        for t in &targets {
            if t.nrows() != r || t.ncols() != r {
                return Err(NpError::DimensionMismatch {
                    what: "matrix target size",
                    expected: r,
                    found: if t.nrows() != r { t.nrows() } else { t.ncols() },
                });
            }
        }
        check_distinct(&nodes)?;
        Ok(Self { nodes, targets, r })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn targets(&self) -> &[CMatrix] {
        &self.targets
    }

    pub fn block_size(&self) -> usize {
        self.r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PickReport {
    pub matrix: HermitianMatrix,
    pub verdict: PsdVerdict,
    pub label: String,
}

#[derive(Serialize)]
struct PickReportView<'a> {
    label: &'a str,
    verdict: &'a PsdVerdict,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl Serialize for PickReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PickReportView {
            label: &self.label,
            verdict: &self.verdict,
            matrix: crate::io::matrix_to_pairs(self.matrix.matrix()),
        }
        .serialize(s)
    }
}

impl PickReport {
    fn judge(matrix: HermitianMatrix, label: impl Into<String>, rel_tol: f64) -> Self {
        let verdict = psd_check_relative(&matrix, rel_tol);
        Self {
            matrix,
            verdict,
            label: label.into(),
        }
    }
}

fn check_size(expected: usize, gram: &HermitianMatrix) -> Result<()> {
    if gram.dim() != expected {
        return Err(NpError::DimensionMismatch {
            what: "gram size",
            expected,
            found: gram.dim(),
        });
    }
    Ok(())
}

/// `[(1 − wᵢ w̄ⱼ)·gᵢⱼ]` for arbitrary targets and a kernel Gram matrix.
pub fn weighted_pick_matrix(targets: &[C64], gram: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_size(targets.len(), gram)?;
    let one = c(1.0, 0.0);
    HermitianMatrix::from_fn(targets.len(), |i, j| {
        (one - targets[i] * targets[j].conj()) * gram.get(i, j)
    })
}

/// The classical Pick matrix against the kernel Gram `gram` at the data nodes.
pub fn scalar_pick(data: &InterpolationData, gram: &HermitianMatrix, rel_tol: f64) -> Result<PickReport> {
    let m = weighted_pick_matrix(data.targets(), gram)?;
    Ok(PickReport::judge(m, "kernel", rel_tol))
}

/// Pick matrix with `(i, j)` block `(I_r − Wᵢ Wⱼᴴ)·gᵢⱼ`.
pub fn block_pick(data: &MatrixInterpolationData, gram: &HermitianMatrix, rel_tol: f64) -> Result<PickReport> {
    check_size(data.nodes.len(), gram)?;
    let m = block_matrix(data.targets(), |i, j| {
        CMatrix::from_element(1, 1, gram.get(i, j))
    })?;
    Ok(PickReport::judge(m, "block", rel_tol))
}

/// Assembles `[(I_r − Wᵢ Wⱼᴴ) ⊗ Gᵢⱼ]` where `Gᵢⱼ` may itself be a block.
pub(crate) fn block_matrix(
    targets: &[CMatrix],
    gram_block: impl Fn(usize, usize) -> CMatrix,
) -> Result<HermitianMatrix> {
    let n = targets.len();
    if n == 0 {
        return Err(NpError::EmptyAmbient);
    }
    let r = targets[0].nrows();
    let blocks: Vec<Vec<CMatrix>> = (0..n)
        .map(|i| (0..n).map(|j| gram_block(i, j)).collect())
        .collect();
    let dims: Vec<usize> = (0..n).map(|i| blocks[i][i].nrows()).collect();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, d| {
            let o = *acc;
            *acc += r * d;
            Some(o)
        })
        .collect();
    let total: usize = dims.iter().map(|d| r * d).sum();
    let mut out = CMatrix::zeros(total, total);
    let id = CMatrix::identity(r, r);
    for i in 0..n {
        for j in 0..n {
            let weight = &id - &targets[i] * targets[j].adjoint();
            let g = &blocks[i][j];
            let kron = weight.kronecker(g);
            out.view_mut((offsets[i], offsets[j]), (kron.nrows(), kron.ncols()))
                .copy_from(&kron);
        }
    }
    if total == 0 {
        return Err(NpError::EmptyAmbient);
    }
    HermitianMatrix::new((&out + out.adjoint()).scale(0.5))
}

/// Pick matrix for one member `k^L` of a kernel family. Zero rows are kept.
pub fn family_pick(
    data: &InterpolationData,
    family_gram: &HermitianMatrix,
    label: &str,
    rel_tol: f64,
) -> Result<PickReport> {
    let m = weighted_pick_matrix(data.targets(), family_gram)?;
    Ok(PickReport::judge(m, label, rel_tol))
}

/// Pick matrix `[(1 − wᵢ w̄ⱼ)·⟨xⱼ, xᵢ⟩]` built from one vector per node.
pub fn multiplicity_pick(targets: &[C64], vectors: &[CVector], label: &str, rel_tol: f64) -> Result<PickReport> {
    if vectors.len() != targets.len() {
        return Err(NpError::DimensionMismatch {
            what: "vectors per node",
            expected: targets.len(),
            found: vectors.len(),
        });
    }
    let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
    for v in vectors {
        if v.len() != dim {
            return Err(NpError::DimensionMismatch {
                what: "vector dimension",
                expected: dim,
                found: v.len(),
            });
        }
    }
    let gram = HermitianMatrix::from_fn(vectors.len(), |i, j| vectors[i].dotc(&vectors[j]))?;
    let m = weighted_pick_matrix(targets, &gram)?;
    Ok(PickReport::judge(m, label, rel_tol))
}
