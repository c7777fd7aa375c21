//! Dense complex matrix kernels.
//!
//! Every matrix in the crate is a column-major [`Matrix`] over `Complex64`.
//! Real problems are stored with zero imaginary parts; the polynomial type
//! remembers which field the data came from so results can be demoted back.
//! The factorizations are thin wrappers around LAPACK (`zgetrf`, `zgecon`,
//! `zgesvd`, `zgges`, `ztgsen`) linked through the system OpenBLAS.

mod ffi;
mod lu;
mod qz;
mod svd;

pub use lu::{lu_solve, rcond, LuFactor};
pub use qz::{generalized_schur, generalized_schur_ordered, GeneralizedSchur, Selection};
pub use svd::{svd, Svd};

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

pub type Matrix = DMatrix<C64>;

/// Unit roundoff used for all singularity and deflation thresholds.
pub const EPS: f64 = f64::EPSILON;

/// rcond below this is reported as a warning (but not an error).
pub const RCOND_WARN: f64 = 1e-12;

/// A pair `(alpha, beta)` counts as infinite when `|beta| <= INF_TOL * (|alpha| + |beta|)`.
pub const INF_TOL: f64 = 1e3 * EPS;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn eye(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    Matrix::zeros(rows, cols)
}

pub fn ones(rows: usize, cols: usize) -> Matrix {
    Matrix::from_element(rows, cols, re(1.0))
}

/// Builds a complex matrix from row-major real entries.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    assert_eq!(data.len(), rows * cols);
    Matrix::from_fn(rows, cols, |i, j| re(data[i * cols + j]))
}

pub fn from_diag(d: &[C64]) -> Matrix {
    let n = d.len();
    Matrix::from_fn(n, n, |i, j| if i == j { d[i] } else { C64::new(0.0, 0.0) })
}

/// Maximum absolute row sum.
pub fn norm_inf(a: &Matrix) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn norm_1(a: &Matrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest imaginary part in absolute value.
pub fn max_imag(a: &Matrix) -> f64 {
    a.iter().map(|x| x.im.abs()).fold(0.0, f64::max)
}

/// Sets all imaginary parts to zero and returns the largest one removed.
pub fn drop_imag(a: &mut Matrix) -> f64 {
    let mut dropped = 0.0f64;
    for x in a.iter_mut() {
        dropped = dropped.max(x.im.abs());
        x.im = 0.0;
    }
    dropped
}

/// Eigenvalues of a square matrix, via the pencil `(A, I)`.
pub fn eigenvalues(a: &Matrix) -> crate::Result<Vec<C64>> {
    let n = a.nrows();
    let gs = generalized_schur(a, &eye(n))?;
    Ok(gs
        .eigenvalues()
        .into_iter()
        .map(|e| e.unwrap_or(C64::new(f64::INFINITY, 0.0)))
        .collect())
}

/// Spectral radius (largest eigenvalue modulus).
pub fn spectral_radius(a: &Matrix) -> crate::Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Horizontal concatenation `[A B]`.
pub fn hcat(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Vertical concatenation `[A; B]`.
pub fn vcat(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// Assembles a 2x2 block matrix.
pub fn block2(a11: &Matrix, a12: &Matrix, a21: &Matrix, a22: &Matrix) -> Matrix {
    vcat(&hcat(a11, a12), &hcat(a21, a22))
}

/// `X^(2^k)` by repeated squaring. Returns `None` once the iterate norm exceeds `limit`.
pub fn pow2k(x: &Matrix, k: usize, limit: f64) -> Option<Matrix> {
    let mut p = x.clone();
    for _ in 0..k {
        p = &p * &p;
        if !(norm_inf(&p) <= limit) {
            return None;
        }
    }
    Some(p)
}

/// Greedy nearest-neighbour matching of two multisets of complex values.
///
/// Returns the largest matched distance scaled by `max(1, |a|)` for each pair.
/// Infinite entries (non-finite modulus) only match other infinite entries.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
    let fa: Vec<C64> = a.iter().copied().filter(finite).collect();
    let mut fb: Vec<C64> = b.iter().copied().filter(finite).collect();
    if fa.len() != fb.len() {
        return f64::INFINITY;
    }
    // Match the hardest entries (largest modulus) first.
    let mut order: Vec<C64> = fa;
    order.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    let mut worst = 0.0f64;
    for x in order {
        let (idx, d) = fb
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("non-empty");
        worst = worst.max(d / x.norm().max(1.0));
        fb.swap_remove(idx);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_small_matrix() {
        let a = from_real_rows(2, 2, &[1.0, -2.0, 3.0, 4.0]);
        assert_eq!(norm_inf(&a), 7.0);
        assert_eq!(norm_1(&a), 6.0);
    }

    #[test]
    fn block_assembly_layout() {
        let a = from_real_rows(1, 1, &[1.0]);
        let b = from_real_rows(1, 2, &[2.0, 3.0]);
        let c_ = from_real_rows(1, 1, &[4.0]);
        let d = from_real_rows(1, 2, &[5.0, 6.0]);
        let m = block2(&a, &b, &c_, &d);
        assert_eq!(m, from_real_rows(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
    }

    #[test]
    fn pow2k_squares_and_guards() {
        let x = from_diag(&[re(2.0), re(0.5)]);
        let p = pow2k(&x, 3, 1e12).unwrap();
        assert_eq!(p[(0, 0)], re(256.0));
        assert_eq!(p[(1, 1)], re(0.5f64.powi(8)));
        assert!(pow2k(&x, 6, 1e12).is_none());
    }

    #[test]
    fn multiset_matching_handles_permutation_and_infinity() {
        let inf = C64::new(f64::INFINITY, 0.0);
        let a = [re(1.0), c(0.0, 1.0), inf];
        let b = [inf, c(0.0, 1.0 + 1e-9), re(1.0)];
        assert!(multiset_distance(&a, &b) < 1e-8);
        assert!(multiset_distance(&a, &[re(1.0), re(1.0), inf]) > 0.5);
        assert!(multiset_distance(&a, &[re(1.0), re(1.0), re(2.0)]).is_infinite());
    }
}
