//! Dense symmetric positive-definite matrices and the statistics every bound needs.
//!
//! [`SymPosDef`] factorizes once at construction (a failed Cholesky is a hard
//! error, there is no jitter) and computes its spectrum lazily on first use.

use std::cmp::Ordering;
use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{check_dim, Error, Result};

/// Relative symmetry tolerance enforced at construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues closer than this (relative to max(1, γ_max)) are treated as one cluster.
pub const EIGEN_TIE_TOL: f64 = 1e-10;

/// Eigen-decomposition with a deterministic ordering.
///
/// `values` are sorted in decreasing order and `vectors[i]` belongs to
/// `values[i]`. Each vector is sign-normalized so its first nonzero coordinate
/// is positive; inside a cluster of (numerically) equal eigenvalues vectors
/// are ordered lexicographically from largest to smallest.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
}

impl Spectrum {
    fn from_symmetric(m: &DMatrix<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization("matrix has non-finite entries".into()));
        }
        let eig = SymmetricEigen::new(m.clone());
        let mut pairs: Vec<(f64, DVector<f64>)> = eig
            .eigenvalues
            .iter()
            .zip(eig.eigenvectors.column_iter())
            .map(|(&v, col)| (v, sign_normalized(col.into_owned())))
            .collect();
        if pairs.iter().any(|(v, _)| !v.is_finite()) {
            return Err(Error::Factorization("eigensolver returned non-finite values".into()));
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let scale = pairs.first().map_or(1.0, |p| p.0.abs().max(1.0));
        let tol = EIGEN_TIE_TOL * scale;

        // Split into clusters of adjacent near-equal values and reorder each one.
        let mut out_values = Vec::with_capacity(pairs.len());
        let mut out_vectors = Vec::with_capacity(pairs.len());
        let mut start = 0;
        while start < pairs.len() {
            let mut end = start + 1;
            while end < pairs.len() && pairs[end - 1].0 - pairs[end].0 <= tol {
                end += 1;
            }
            let cluster = &mut pairs[start..end];
            cluster.sort_by(|a, b| lex_cmp(&b.1, &a.1));
            for (v, vec) in cluster.iter() {
                out_values.push(*v);
                out_vectors.push(vec.clone());
            }
            start = end;
        }
        Ok(Spectrum { values: out_values, vectors: out_vectors })
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("spectrum of an empty matrix")
    }

    /// The preferred eigenvector for the smallest eigenvalue: the
    /// lexicographically largest member of the bottom cluster.
    pub fn bottom_vector(&self) -> &DVector<f64> {
        let tol = EIGEN_TIE_TOL * self.max().abs().max(1.0);
        let floor = self.min();
        let first = self
            .values
            .iter()
            .position(|&v| v - floor <= tol)
            .unwrap_or(self.values.len() - 1);
        &self.vectors[first]
    }
}

fn sign_normalized(mut v: DVector<f64>) -> DVector<f64> {
    if let Some(&lead) = v.iter().find(|x| **x != 0.0) {
        if lead < 0.0 {
            v.neg_mut();
        }
    }
    v
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// A symmetric positive-definite matrix with cached factorizations.
#[derive(Debug, Clone)]
pub struct SymPosDef {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    spectrum: OnceLock<Spectrum>,
}

impl SymPosDef {
    /// Validates symmetry and positive definiteness of `m`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if d == 0 {
            return Err(Error::Factorization("matrix must have dimension >= 1".into()));
        }
        check_dim(d, m.ncols())?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization("matrix has non-finite entries".into()));
        }
        let scale = m.amax();
        for i in 0..d {
            for j in (i + 1)..d {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Factorization(format!(
                        "matrix is not symmetric at ({i}, {j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        let exact = (0..d).all(|i| (i + 1..d).all(|j| m[(i, j)] == m[(j, i)]));
        let m = if exact { m } else { (&m + m.transpose()) * 0.5 };
        let chol = Cholesky::new(m.clone())
            .ok_or_else(|| Error::Factorization("Cholesky factorization failed: matrix is not positive definite".into()))?;
        if chol.l_dirty().diagonal().iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Factorization("Cholesky factor has a nonpositive pivot".into()));
        }
        Ok(SymPosDef { matrix: m, chol, spectrum: OnceLock::new() })
    }

    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        check_dim(dim * dim, entries.len())?;
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0).expect("identity is positive definite")
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Factorization(format!("scale {scale} must be finite and > 0")));
        }
        Self::new(DMatrix::identity(dim, dim) * scale)
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.matrix.transpose().iter().copied().collect()
    }

    /// Lower-triangular Cholesky factor L with `M = L Lᵀ`.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// log det M as twice the sum of the log Cholesky pivots.
    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Cached spectrum (decreasing eigenvalues with tie-broken eigenvectors).
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = Spectrum::from_symmetric(&self.matrix)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// (γ_min, γ_max).
    pub fn eigen_extremes(&self) -> Result<(f64, f64)> {
        let s = self.spectrum()?;
        Ok((s.min(), s.max()))
    }

    pub fn gamma_min(&self) -> Result<f64> {
        Ok(self.spectrum()?.min())
    }

    pub fn gamma_max(&self) -> Result<f64> {
        Ok(self.spectrum()?.max())
    }

    /// Operator norm, equal to γ_max for a positive-definite matrix.
    pub fn op_norm(&self) -> Result<f64> {
        self.gamma_max()
    }

    /// Condition number γ_max/γ_min.
    pub fn kappa(&self) -> Result<f64> {
        let (lo, hi) = self.eigen_extremes()?;
        Ok((hi / lo).max(1.0))
    }

    /// ‖S‖_{M^{-1}} = √(Sᵀ M^{-1} S) via one triangular solve.
    pub fn self_norm(&self, s: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), s.len())?;
        let w = self
            .chol
            .l_dirty()
            .solve_lower_triangular(s)
            .ok_or_else(|| Error::Factorization("triangular solve failed".into()))?;
        Ok(w.norm())
    }

    /// M^{-1} x.
    pub fn solve(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.chol.solve(x))
    }

    /// Returns `M + w·x xᵀ`, refactorized.
    pub fn add_outer(&self, x: &DVector<f64>, weight: f64) -> Result<Self> {
        check_dim(self.dim(), x.len())?;
        let mut m = self.matrix.clone();
        let d = self.dim();
        for j in 0..d {
            for i in 0..d {
                m[(i, j)] += weight * (x[i] * x[j]);
            }
        }
        Self::new(m)
    }

    /// Returns `M + A` for a symmetric `A`.
    pub fn add_matrix(&self, a: &DMatrix<f64>) -> Result<Self> {
        check_dim(self.dim(), a.nrows())?;
        check_dim(self.dim(), a.ncols())?;
        Self::new(&self.matrix + a)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::domain(format!("scale factor {factor} must be finite and > 0")));
        }
        Self::new(&self.matrix * factor)
    }

    /// Smallest eigenvalue of `self − other`; nonnegative iff `self ⪰ other`.
    pub fn loewner_gap(&self, other: &SymPosDef) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        min_eigenvalue(&(&self.matrix - &other.matrix))
    }
}

/// Smallest eigenvalue of an arbitrary symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Factorization("matrix has non-finite entries".into()));
    }
    let sym = (m + m.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym).eigenvalues.min())
}

/// α(M1, M2) = sup_θ ⟨θ, M1 θ⟩ / ⟨θ, M2 θ⟩, the top eigenvalue of L^{-1} M1 L^{-T} with M2 = L Lᵀ.
pub fn rayleigh_max(m1: &SymPosDef, m2: &SymPosDef) -> Result<f64> {
    check_dim(m2.dim(), m1.dim())?;
    let l = m2.chol.l();
    let half = l
        .solve_lower_triangular(&m1.matrix)
        .ok_or_else(|| Error::Factorization("triangular solve failed".into()))?;
    let whole = l
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| Error::Factorization("triangular solve failed".into()))?;
    let sym = (&whole + whole.transpose()) * 0.5;
    let top = SymmetricEigen::new(sym).eigenvalues.max();
    if top.is_finite() {
        Ok(top)
    } else {
        Err(Error::Factorization("generalized eigenvalue is not finite".into()))
    }
}
