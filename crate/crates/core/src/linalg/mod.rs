//! Dense complex linear algebra shared by every other module.
//!
//! All rank and kernel decisions go through a single [`Tolerance`] so that
//! verdicts computed in different modules agree with each other.

mod poly;

pub use poly::{Polynomial, Roots};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Numerical thresholds used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Absolute cutoff for residual checks.
    pub residual_abs: f64,
    /// Radius within which two roots are considered the same.
    pub root_cluster: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            residual_abs: 1e-8,
            root_cluster: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, residual_abs: f64, root_cluster: f64) -> Result<Self> {
        let tol = Self {
            rank_rel,
            residual_abs,
            root_cluster,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.rank_rel) && positive(self.residual_abs) && positive(self.root_cluster))
        {
            return Err(Error::InvalidInput(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.rank_rel >= 1.0 {
            return Err(Error::InvalidInput("rank_rel must be below 1".into()));
        }
        Ok(())
    }
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Singular values in descending order (`min(rows, cols)` of them).
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn numerical_rank(m: &CMatrix, tol: &Tolerance) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > tol.rank_rel * smax).count()
}

/// Zero rows appended so that a thin SVD exposes every right singular vector.
fn pad_rows(m: &CMatrix) -> CMatrix {
    if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        let mut p = CMatrix::zeros(m.ncols(), m.ncols());
        p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        p
    }
}

/// Right singular pairs `(σ_i, v_i)` sorted by ascending σ, covering all columns.
pub fn right_singular_pairs(m: &CMatrix) -> Vec<(f64, CVector)> {
    let p = pad_rows(m);
    let svd = p.svd(false, true);
    let v_t = svd.v_t.expect("requested V^*");
    let mut pairs: Vec<(f64, CVector)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, v_t.row(i).adjoint()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Orthonormal basis of the numerical null space of `m`.
pub fn kernel_basis(m: &CMatrix, tol: &Tolerance) -> Vec<CVector> {
    if m.ncols() == 0 {
        return Vec::new();
    }
    let pairs = right_singular_pairs(m);
    let smax = pairs.last().map(|p| p.0).unwrap_or(0.0);
    pairs
        .into_iter()
        .take_while(|(s, _)| *s <= tol.rank_rel * smax)
        .map(|(_, v)| v)
        .collect()
}

/// Smallest of the `cols` singular values; zero when `rows < cols`.
pub fn smallest_singular_value(m: &CMatrix) -> f64 {
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Unit minimizer of `‖m v‖` together with the attained value.
pub fn smallest_right_singular(m: &CMatrix) -> (f64, CVector) {
    right_singular_pairs(m)
        .into_iter()
        .next()
        .map(|(s, v)| (if m.nrows() < m.ncols() { 0.0 } else { s }, v))
        .expect("matrix has at least one column")
}

/// Real counterpart of [`smallest_right_singular`].
pub fn smallest_right_singular_real(m: &RMatrix) -> (f64, DVector<f64>) {
    let p = if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        let mut p = RMatrix::zeros(m.ncols(), m.ncols());
        p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        p
    };
    let svd = p.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, s) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let s = if m.nrows() < m.ncols() { 0.0 } else { s };
    (s, v_t.row(idx).transpose())
}

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Applies a scalar function to the spectrum: `V f(Λ) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            scaled.column_mut(j).scale_mut(f(self.values[j]));
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn hermitian_eig(h: &CMatrix, tol: &Tolerance) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Hermitian eigendecomposition needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let skew = (h - h.adjoint()).norm();
    if skew > tol.residual_abs * (1.0 + h.norm()) {
        return Err(Error::NotHermitian(skew));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(h.nrows(), h.ncols());
    for (dst, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut v);
        vectors.set_column(dst, &v);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Rotates `v` so that its largest-modulus entry is real and positive.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        // strict inequality with a small margin keeps the pick stable under rounding
        if z.norm() > best_abs * (1.0 + 1e-9) {
            best = i;
            best_abs = z.norm();
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// `H^{-1/2}` of a positive definite Hermitian matrix.
pub fn inv_sqrt_psd(h: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let eig = hermitian_eig(h, tol)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0);
    let lmin = eig.values.last().copied().unwrap_or(0.0);
    if lmin <= tol.rank_rel * lmax.max(0.0) || lmax <= 0.0 {
        return Err(Error::NotPsd(lmin));
    }
    Ok(eig.map(|l| 1.0 / l.sqrt()))
}

/// `H^{1/2}` of a positive semidefinite Hermitian matrix (negative rounding clipped).
pub fn sqrt_psd(h: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let eig = hermitian_eig(h, tol)?;
    let lmin = eig.values.last().copied().unwrap_or(0.0);
    if lmin < -tol.residual_abs {
        return Err(Error::NotPsd(lmin));
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}

/// Column-major vectorization.
pub fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// The rank-one operator `x ⊗ y : z ↦ ⟨z, y⟩ x`, i.e. the matrix `x y*`.
pub fn outer(x: &CVector, y: &CVector) -> CMatrix {
    x * y.adjoint()
}

/// `⟨x, y⟩ = Σ x_i conj(y_i)`, linear in the first slot.
pub fn inner(x: &CVector, y: &CVector) -> Complex64 {
    y.dotc(x)
}

/// Hilbert–Schmidt inner product `tr(S T*)`.
pub fn hs_inner(s: &CMatrix, t: &CMatrix) -> Complex64 {
    s.iter().zip(t.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Frobenius norm of the Hermitian part's deviation: `‖M - M*‖_F`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// Vertical concatenation of equally wide blocks.
pub fn vstack(blocks: &[CMatrix]) -> CMatrix {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack needs equal widths");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Realification of a complex matrix acting on real coordinates:
/// rows are `[Re; Im]` of the image, columns index the real input vector.
pub fn realify_rows(m: &CMatrix) -> RMatrix {
    let (r, k) = m.shape();
    let mut out = RMatrix::zeros(2 * r, k);
    for j in 0..k {
        for i in 0..r {
            out[(i, j)] = m[(i, j)].re;
            out[(r + i, j)] = m[(i, j)].im;
        }
    }
    out
}

pub fn to_real(m: &CMatrix) -> RMatrix {
    m.map(|z| z.re)
}

pub fn from_real(m: &RMatrix) -> CMatrix {
    m.map(|x| c(x, 0.0))
}

pub fn real_vector(v: &DVector<f64>) -> CVector {
    v.map(|x| c(x, 0.0))
}

pub fn normalized(v: &CVector) -> CVector {
    let n = v.norm();
    if n == 0.0 {
        v.clone()
    } else {
        v.unscale(n)
    }
}
