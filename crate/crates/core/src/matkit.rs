//! Dense complex matrix kernel.
//!
//! Storage and BLAS-style arithmetic come from `nalgebra`; this module adds the
//! handful of operations the composition formulas need, with the singularity
//! and tolerance conventions used throughout the crate. All tolerances are
//! absolute on the max-entry norm.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Default tolerance for structural predicates (unitarity, hermiticity).
pub const STRUCTURAL_TOL: f64 = 1e-9;
/// Residual tolerance a well-conditioned [`solve`] is expected to meet.
pub const SOLVE_TOL: f64 = 1e-10;
/// A pivot smaller than this times the largest column norm is treated as zero.
pub const PIVOT_REL_TOL: f64 = 1e-12;
/// Eigenvalues closer than this (relative to the spectral scale) share a projector.
pub const EIG_MERGE_REL_GAP: f64 = 1e-9;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a matrix from row slices. Panics on ragged input; meant for literals.
pub fn from_rows(rows: &[&[Complex64]]) -> ComplexMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    assert!(rows.iter().all(|r| r.len() == ncols), "ragged matrix literal");
    ComplexMatrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

/// Real-valued matrix literal.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    assert!(rows.iter().all(|r| r.len() == ncols), "ragged matrix literal");
    ComplexMatrix::from_fn(nrows, ncols, |i, j| c(rows[i][j], 0.0))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// Largest entry modulus; zero for empty matrices.
pub fn max_norm(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `max(‖M†M − I‖, ‖MM† − I‖)`, or `None` when `m` is not square.
pub fn unitarity_residual(m: &ComplexMatrix) -> Option<f64> {
    if !m.is_square() {
        return None;
    }
    let n = m.nrows();
    let id = identity(n);
    let left = max_norm(&(m.adjoint() * m - &id));
    let right = max_norm(&(m * m.adjoint() - &id));
    Some(left.max(right))
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    unitarity_residual(m).is_some_and(|r| r <= tol)
}

/// `‖M − M†‖`, or `None` when `m` is not square.
pub fn hermiticity_residual(m: &ComplexMatrix) -> Option<f64> {
    m.is_square().then(|| max_norm(&(m - m.adjoint())))
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermiticity_residual(m).is_some_and(|r| r <= tol)
}

/// The hermitian "imaginary part" `(M − M†)/(2i)`.
///
/// For `L = C a` this is the matrix of `Im{L_1† X L_2}` read as a quadratic
/// form `a† (·) a`.
pub fn im_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m - m.adjoint()) / c(0.0, 2.0)
}

/// The hermitian part `(M + M†)/2`.
pub fn re_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Submatrix on the given row and column index lists, in list order.
pub fn select(m: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Solves `M X = RHS` by LU factorisation with partial pivoting.
pub fn solve(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve_scaled(m, rhs, 0.0)
}

/// Like [`solve`], but pivots are judged against `max(scale, max column norm)`.
///
/// For `M = sI − A` near a pole the entries of `M` are themselves tiny, so
/// its own norm says nothing; `|s| + ‖A‖` is the scale that matters.
pub fn solve_scaled(m: &ComplexMatrix, rhs: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "solve: matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if rhs.nrows() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "solve: right-hand side has {} rows, matrix has {}",
            rhs.nrows(),
            m.nrows()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(rhs.clone());
    }

    let scale = m.column_iter().map(|col| col.norm()).fold(scale, f64::max);
    let lu = m.clone().lu();
    let u = lu.u();
    for k in 0..n {
        let pivot = u[(k, k)].norm();
        // also catches scale == 0 and NaN
        if !(pivot > PIVOT_REL_TOL * scale) {
            return Err(Error::SingularMatrix { column: k, pivot });
        }
    }
    lu.solve(rhs).ok_or(Error::SingularMatrix { column: n, pivot: 0.0 })
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(m, &identity(m.nrows()))
}

/// Spectral data of a hermitian matrix with clustered eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    /// Distinct eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthogonal projectors onto the eigenspaces, same order.
    pub projectors: Vec<ComplexMatrix>,
}

impl HermitianSpectrum {
    /// `Σ f(λ_k) P_k`.
    pub fn apply<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        let n = self.projectors.first().map_or(0, |p| p.nrows());
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(zeros(n, n), |acc, (&lam, p)| acc + p * f(lam))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|lam| c(lam, 0.0))
    }
}

/// Eigendecomposition of a hermitian matrix into distinct eigenvalues and
/// eigenprojectors. Eigenvalues whose gap is within [`EIG_MERGE_REL_GAP`] of
/// the spectral scale are merged into one cluster.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianSpectrum> {
    match hermiticity_residual(m) {
        None => {
            return Err(Error::DimensionMismatch(format!(
                "eig_hermitian: matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )))
        }
        Some(r) if r > STRUCTURAL_TOL => return Err(Error::NotHermitian { residual: r }),
        Some(_) => {}
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianSpectrum { eigenvalues: vec![], projectors: vec![] });
    }

    let eig = re_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = eig.eigenvalues.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let gap = EIG_MERGE_REL_GAP * scale;

    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut cluster: Vec<usize> = Vec::new();
    let mut flush = |cluster: &mut Vec<usize>| {
        if cluster.is_empty() {
            return;
        }
        let mean = cluster.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / cluster.len() as f64;
        let mut p = zeros(n, n);
        for &k in cluster.iter() {
            let v = eig.eigenvectors.column(k);
            p += v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(p);
        cluster.clear();
    };
    for &k in &order {
        if let Some(&last) = cluster.last() {
            if eig.eigenvalues[k] - eig.eigenvalues[last] > gap {
                flush(&mut cluster);
            }
        }
        cluster.push(k);
    }
    flush(&mut cluster);

    Ok(HermitianSpectrum { eigenvalues, projectors })
}

/// Largest eigenvalue modulus of a square matrix (via complex Schur form).
pub fn spectral_radius(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|k| t[(k, k)].norm()).fold(0.0, f64::max)
}
