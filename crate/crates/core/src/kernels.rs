//! Reproducing kernels on the disk and the ball, and their Gram matrices.
//!
//! The convention throughout is `k(z, w) = ⟨k_w, k_z⟩`, so the Szegő kernel
//! is `1/(1 − z·w̄)` and a Gram matrix has entries `k(λᵢ, λⱼ)`.

use crate::error::{NpError, Result};
use crate::numerics::{c, HermitianMatrix, C64};

/// Default number of series terms for weighted Bergman kernels.
pub const DEFAULT_TRUNCATION: usize = 500;
const TAIL_TOL: f64 = 1e-12;
const DUPLICATE_TOL: f64 = 1e-12;

/// A point of the unit disk (`d = 1`) or of the unit ball `𝔹_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Node(Vec<C64>);

impl Node {
    pub fn new(coordinates: Vec<C64>) -> Result<Self> {
        if coordinates.is_empty() {
            return Err(NpError::EmptyAmbient);
        }
        Ok(Self(coordinates))
    }

    pub fn scalar(z: C64) -> Self {
        Self(vec![z])
    }

    pub fn real(x: f64) -> Self {
        Self(vec![c(x, 0.0)])
    }

    pub fn coordinates(&self) -> &[C64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The single coordinate of a disk node.
    pub fn as_scalar(&self) -> Result<C64> {
        if self.0.len() != 1 {
            return Err(NpError::DimensionMismatch {
                what: "disk node",
                expected: 1,
                found: self.0.len(),
            });
        }
        Ok(self.0[0])
    }

    /// `⟨self, other⟩ = Σ selfₖ·conj(otherₖ)`.
    pub fn inner(&self, other: &Node) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    fn distance(&self, other: &Node) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn require_interior(&self) -> Result<()> {
        let norm = self.norm();
        if !(norm < 1.0) {
            return Err(NpError::OutsideDomain { norm });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// Hardy space kernel `1/(1 − z w̄)`.
    Szego,
    /// Bergman space kernel `1/(1 − z w̄)²`.
    Bergman,
    /// Drury-Arveson kernel `1/(1 − ⟨z, w⟩)` on `𝔹_d`.
    DruryArveson { dim: usize },
    /// Kernel of `P²(μ_s)` with `dμ_s = (1 − |z|)^{s−1} dm`, normalized so `k(0,0) = 1`.
    WeightedBergman { s: f64, truncation: usize },
    /// A finite kernel given by its Gram matrix on labelled nodes.
    ExplicitGram {
        gram: HermitianMatrix,
        nodes: Vec<Node>,
    },
}

impl KernelSpec {
    pub fn weighted_bergman(s: f64) -> Self {
        KernelSpec::WeightedBergman {
            s,
            truncation: DEFAULT_TRUNCATION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::DruryArveson { dim } if *dim == 0 => Err(NpError::EmptyAmbient),
            KernelSpec::WeightedBergman { s, truncation } => {
                if !(*s > 0.0) {
                    return Err(NpError::InvalidParameter(format!("weight exponent s must be positive, got {s}")));
                }
                if *truncation < 1 {
                    return Err(NpError::InvalidParameter("truncation must be at least 1".into()));
                }
                Ok(())
            }
            KernelSpec::ExplicitGram { gram, nodes } => {
                if gram.dim() != nodes.len() {
                    return Err(NpError::DimensionMismatch {
                        what: "explicit gram labels",
                        expected: gram.dim(),
                        found: nodes.len(),
                    });
                }
                let v = crate::numerics::psd_check_relative(gram, 1e-10);
                if !v.is_psd {
                    return Err(NpError::InvalidParameter(format!(
                        "explicit gram is not positive (min eigenvalue {:e})",
                        v.min_eigenvalue
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn expected_dim(&self) -> Option<usize> {
        match self {
            KernelSpec::Szego | KernelSpec::Bergman | KernelSpec::WeightedBergman { .. } => Some(1),
            KernelSpec::DruryArveson { dim } => Some(*dim),
            KernelSpec::ExplicitGram { .. } => None,
        }
    }
}

/// Evaluates `k(z, w)`.
pub fn kernel_eval(spec: &KernelSpec, z: &Node, w: &Node) -> Result<C64> {
    if let KernelSpec::ExplicitGram { gram, nodes } = spec {
        let i = nodes.iter().position(|n| n == z).ok_or(NpError::UnlabeledNode)?;
        let j = nodes.iter().position(|n| n == w).ok_or(NpError::UnlabeledNode)?;
        return Ok(gram.get(i, j));
    }
    let d = spec.expected_dim().unwrap_or(1);
    for node in [z, w] {
        if node.dim() != d {
            return Err(NpError::DimensionMismatch {
                what: "node dimension",
                expected: d,
                found: node.dim(),
            });
        }
        node.require_interior()?;
    }
    let x = z.inner(w);
    let one = c(1.0, 0.0);
    match spec {
        KernelSpec::Szego | KernelSpec::DruryArveson { .. } => Ok(one / (one - x)),
        KernelSpec::Bergman => {
            let q = one - x;
            Ok(one / (q * q))
        }
        KernelSpec::WeightedBergman { s, truncation } => weighted_series(*s, *truncation, x),
        KernelSpec::ExplicitGram { .. } => unreachable!(),
    }
}

/// `Σ_{n ≤ N} xⁿ / cₙ` with a geometric bound on the discarded tail.
fn weighted_series(s: f64, truncation: usize, x: C64) -> Result<C64> {
    if !(s > 0.0) {
        return Err(NpError::InvalidParameter(format!("weight exponent s must be positive, got {s}")));
    }
    // ratio c_n / c_{n+1}
    let growth = |n: usize| {
        let m = 2.0 * n as f64;
        (m + 2.0 + s) * (m + 3.0 + s) / ((m + 2.0) * (m + 3.0))
    };
    let mut sum = c(0.0, 0.0);
    let mut abs_sum = 0.0;
    let mut power = c(1.0, 0.0);
    let mut inv_norm = 1.0;
    for n in 0..=truncation {
        sum += power * inv_norm;
        abs_sum += power.norm() * inv_norm;
        power *= x;
        inv_norm *= growth(n);
    }
    // `power`, `inv_norm` now belong to index N+1
    let ratio = x.norm() * growth(truncation + 1);
    let next = power.norm() * inv_norm;
    let tail = if ratio < 1.0 { next / (1.0 - ratio) } else { f64::INFINITY };
    if tail > TAIL_TOL * abs_sum.max(1.0) {
        return Err(NpError::TruncationTooShort { tail });
    }
    Ok(sum)
}

/// Gram matrix `[k(λᵢ, λⱼ)]` over pairwise distinct nodes.
pub fn gram_matrix(spec: &KernelSpec, nodes: &[Node]) -> Result<HermitianMatrix> {
    spec.validate()?;
    if nodes.is_empty() {
        return Err(NpError::EmptyAmbient);
    }
    for i in 0..nodes.len() {
        for j in 0..i {
            if nodes[i].dim() == nodes[j].dim() && nodes[i].distance(&nodes[j]) <= DUPLICATE_TOL {
                return Err(NpError::DuplicateNodes(j, i));
            }
        }
    }
    let n = nodes.len();
    let mut entries = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            entries[i * n + j] = kernel_eval(spec, &nodes[i], &nodes[j])?;
        }
    }
    HermitianMatrix::from_fn(n, |i, j| entries[i * n + j])
}

/// The Bergman kernel for the `n`-th derivative at `λ`, evaluated at `z`:
/// `(n+1)!·zⁿ·(1 − λ̄z)^{−(n+2)}`, so that `⟨h, k_{λ,n}⟩ = h⁽ⁿ⁾(λ)`.
pub fn bergman_derivative_kernel(lambda: &Node, n: u32, z: &Node) -> Result<C64> {
    let l = lambda.as_scalar()?;
    let zz = z.as_scalar()?;
    lambda.require_interior()?;
    z.require_interior()?;
    let factorial: f64 = (1..=n as u64 + 1).map(|k| k as f64).product();
    let q = c(1.0, 0.0) - l.conj() * zz;
    Ok(zz.powu(n) * factorial / q.powu(n + 2))
}

/// Squared monomial norms `cₙ = ‖zⁿ‖²` in `P²(μ_s)`, `n = 0..=max_degree`.
///
/// `cₙ ∝ 2π·B(2n+2, s)`; the ratio recursion
/// `cₙ/cₙ₋₁ = (2n)(2n+1)/((2n+s)(2n+s+1))` is used with `c₀ = 1`.
pub fn weighted_bergman_norms(s: f64, max_degree: usize) -> Result<Vec<f64>> {
    if !(s > 0.0) {
        return Err(NpError::InvalidParameter(format!("weight exponent s must be positive, got {s}")));
    }
    let mut out = Vec::with_capacity(max_degree + 1);
    let mut cn = 1.0;
    out.push(cn);
    for n in 1..=max_degree {
        let m = 2.0 * n as f64;
        cn *= m * (m + 1.0) / ((m + s) * (m + s + 1.0));
        out.push(cn);
    }
    Ok(out)
}
