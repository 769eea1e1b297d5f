//! Dense complex linear algebra with explicit tolerances.
//!
//! Every subspace is carried by an orthonormal basis and every projection is
//! formed as `Q Qᴴ` from that basis. Positivity verdicts go through a
//! Hermitian symmetrization before the eigen-solve.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{NpError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative singular-value cut used when extracting a basis.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Absolute defect allowed in subspace containment checks.
pub const CONTAINMENT_TOL: f64 = 1e-8;
/// Relative asymmetry accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(NpError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(NpError::EmptyAmbient);
        }
        let defect = max_abs_entry(&(&m - m.adjoint()));
        let scale = max_abs_entry(&m);
        if defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
            return Err(NpError::NotHermitian { defect });
        }
        Ok(Self(m))
    }

    /// Builds the matrix from its lower triangle and diagonal; the upper
    /// triangle is filled by conjugation, so the result is exactly Hermitian.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        if n == 0 {
            return Err(NpError::EmptyAmbient);
        }
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                if i == j {
                    m[(i, i)] = c(v.re, 0.0);
                } else {
                    m[(i, j)] = v;
                    m[(j, i)] = v.conj();
                }
            }
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Eigenvalues of `(H + Hᴴ)/2`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.0 + self.0.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Magnitude used for relative tolerances: mean absolute diagonal entry,
    /// falling back to the largest entry and finally to 1.
    pub fn scale(&self) -> f64 {
        let n = self.dim() as f64;
        let diag = (0..self.dim()).map(|i| self.0[(i, i)].re.abs()).sum::<f64>() / n;
        if diag > 0.0 {
            diag
        } else {
            let m = max_abs_entry(&self.0);
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub is_psd: bool,
}

impl PsdVerdict {
    pub fn new(min_eigenvalue: f64, tolerance: f64) -> Self {
        Self {
            min_eigenvalue,
            tolerance,
            is_psd: min_eigenvalue >= -tolerance,
        }
    }
}

/// Smallest eigenvalue of the symmetrized matrix against an absolute tolerance.
pub fn psd_check(h: &HermitianMatrix, tol: f64) -> PsdVerdict {
    let min = h.eigenvalues()[0];
    PsdVerdict::new(min, tol)
}

/// [`psd_check`] with the tolerance taken relative to [`HermitianMatrix::scale`].
pub fn psd_check_relative(h: &HermitianMatrix, rel_tol: f64) -> PsdVerdict {
    psd_check(h, rel_tol * h.scale())
}

/// Largest singular value. Empty matrices have norm 0.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Thin SVD: `singular_values` in descending order with the matching left
/// and right singular vectors as the columns of `u` and `v`. Columns paired
/// with a zero singular value are not meaningful.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

const JACOBI_SWEEPS: usize = 80;

// One-sided Jacobi on the columns of `w`; rotations are mirrored into `v`.
fn hestenes(mut w: CMatrix) -> (CMatrix, CMatrix) {
    let k = w.ncols();
    let mut v = CMatrix::identity(k, k);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let xp = m[(r, p)];
                        let xq = m[(r, q)] * phase.conj();
                        m[(r, p)] = xp * cs - xq * sn;
                        m[(r, q)] = (xp * sn + xq * cs) * phase;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

// Orders the orthogonal columns of `w` by norm and normalizes them.
fn split(w: &CMatrix, other: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let norms: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..w.ncols()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let normalized = CMatrix::from_fn(w.nrows(), w.ncols(), |r, j| {
        let s = norms[order[j]];
        if s > 0.0 {
            w[(r, order[j])] / s
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let reordered = CMatrix::from_fn(other.nrows(), other.ncols(), |r, j| other[(r, order[j])]);
    (normalized, order.iter().map(|&j| norms[j]).collect(), reordered)
}

/// Thin SVD of a complex matrix by one-sided Jacobi rotations.
pub fn svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    if rows.min(cols) == 0 {
        return Svd {
            u: CMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v: CMatrix::zeros(cols, 0),
        };
    }
    if rows >= cols {
        // m·V = W with orthogonal columns
        let (w, v) = hestenes(m.clone());
        let (u, singular_values, v) = split(&w, &v);
        Svd { u, singular_values, v }
    } else {
        let (w, v) = hestenes(m.adjoint());
        let (v, singular_values, u) = split(&w, &v);
        Svd { u, singular_values, v }
    }
}

/// Descending singular values.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    svd(m).singular_values
}

/// A linear subspace of `ℂⁿ` stored as an orthonormal column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: CMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: CMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: CMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn project(&self, v: &CVector) -> CVector {
        &self.basis * (self.basis.adjoint() * v)
    }

    /// Orthogonal direct sum with a subspace assumed orthogonal to this one.
    pub fn direct_sum(&self, other: &Subspace) -> Result<Subspace> {
        check_ambient(self.ambient_dim, other.ambient_dim)?;
        let cols: Vec<CVector> = self
            .basis
            .column_iter()
            .chain(other.basis.column_iter())
            .map(|c| c.into_owned())
            .collect();
        orthonormal_basis(self.ambient_dim, &cols, DEFAULT_RANK_TOL)
    }
}

fn check_ambient(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(NpError::DimensionMismatch {
            what: "ambient dimension",
            expected,
            found,
        });
    }
    Ok(())
}

/// Orthonormal basis for the span of `vectors`, dropping singular directions
/// below `rank_tol` times the largest singular value.
pub fn orthonormal_basis(ambient_dim: usize, vectors: &[CVector], rank_tol: f64) -> Result<Subspace> {
    if ambient_dim == 0 {
        return Err(NpError::EmptyAmbient);
    }
    for v in vectors {
        check_ambient(ambient_dim, v.len())?;
    }
    if vectors.is_empty() {
        return Ok(Subspace::zero(ambient_dim));
    }
    let m = CMatrix::from_columns(vectors);
    let svd = svd(&m);
    let u = svd.u;
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(Subspace::zero(ambient_dim));
    }
    let keep: Vec<CVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rank_tol * smax)
        .map(|(k, _)| u.column(k).into_owned())
        .collect();
    Ok(Subspace {
        ambient_dim,
        basis: if keep.is_empty() {
            CMatrix::zeros(ambient_dim, 0)
        } else {
            CMatrix::from_columns(&keep)
        },
    })
}

/// Spectral norm of `small`'s basis minus its projection onto `big`.
pub fn containment_defect(big: &Subspace, small: &Subspace) -> f64 {
    let q = small.basis();
    let residual = q - big.basis() * (big.basis().adjoint() * q);
    spectral_norm(&residual)
}

/// `big ⊖ small`, the orthogonal complement of `small` inside `big`.
pub fn subspace_difference(big: &Subspace, small: &Subspace) -> Result<Subspace> {
    check_ambient(big.ambient_dim, small.ambient_dim)?;
    let defect = containment_defect(big, small);
    if defect > CONTAINMENT_TOL {
        return Err(NpError::NotContained { defect });
    }
    let target = big.dim().saturating_sub(small.dim());
    if target == 0 {
        return Ok(Subspace::zero(big.ambient_dim));
    }
    let qb = big.basis();
    let qs = small.basis();
    let mut residual = qb - qs * (qs.adjoint() * qb);
    // second pass against small to clean up cancellation
    residual -= qs * (qs.adjoint() * &residual);
    let u = svd(&residual).u;
    let cols: Vec<CVector> = (0..target).map(|k| u.column(k).into_owned()).collect();
    Ok(Subspace {
        ambient_dim: big.ambient_dim,
        basis: CMatrix::from_columns(&cols),
    })
}

/// `‖Qᴴ A Q‖` for the orthonormal basis `Q` of `n`, which equals `‖P A P‖`.
pub fn compression_norm(a: &CMatrix, n: &Subspace) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(NpError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    check_ambient(a.nrows(), n.ambient_dim)?;
    if n.dim() == 0 {
        return Ok(0.0);
    }
    let q = n.basis();
    Ok(spectral_norm(&(q.adjoint() * a * q)))
}
