use std::os::raw::c_int;

use super::{ffi, norm_1, Matrix, EPS};
use crate::{QmeError, Result};

/// LU factorization with partial pivoting and a 1-norm reciprocal condition estimate.
///
/// One factorization serves any number of left (`A^-1 B`) and right (`B A^-1`) solves.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: Matrix,
    ipiv: Vec<c_int>,
    rcond: f64,
}

impl LuFactor {
    /// Factors `a`, failing with `SingularMatrix` when `rcond(a) < EPS`.
    pub fn new(a: &Matrix) -> Result<Self> {
        let f = Self::unchecked(a)?;
        if !(f.rcond >= EPS) {
            return Err(QmeError::SingularMatrix { rcond: f.rcond });
        }
        Ok(f)
    }

    /// Factors `a` without rejecting ill-conditioned input. An exact zero
    /// pivot still yields `rcond == 0`.
    pub fn unchecked(a: &Matrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(QmeError::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let anorm = norm_1(a);
        let mut lu = a.clone();
        let mut ipiv = vec![0 as c_int; n];
        if !anorm.is_finite() {
            return Ok(Self {
                lu,
                ipiv,
                rcond: 0.0,
            });
        }
        let info = ffi::zgetrf(&mut lu, &mut ipiv);
        let rcond = if info > 0 || anorm == 0.0 {
            0.0
        } else {
            ffi::zgecon(&lu, anorm).0
        };
        Ok(Self { lu, ipiv, rcond })
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    /// `A^-1 B`.
    pub fn solve(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.nrows(), self.dim(), "lu solve: row mismatch");
        let mut x = b.clone();
        if x.ncols() > 0 {
            ffi::zgetrs(b'N', &self.lu, &self.ipiv, &mut x);
        }
        x
    }

    /// `B A^-1`, computed as `(A^-H B^H)^H`.
    pub fn solve_right(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.ncols(), self.dim(), "lu right solve: column mismatch");
        let mut x = b.adjoint();
        if x.ncols() > 0 {
            ffi::zgetrs(b'C', &self.lu, &self.ipiv, &mut x);
        }
        x.adjoint()
    }
}

/// Solves `A X = B` without forming an inverse.
pub fn lu_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if b.nrows() != a.nrows() {
        return Err(QmeError::DimensionMismatch(format!(
            "A is {}x{}, B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    Ok(LuFactor::new(a)?.solve(b))
}

/// Reciprocal 1-norm condition estimate (0 for exactly singular input).
pub fn rcond(a: &Matrix) -> f64 {
    LuFactor::unchecked(a).map(|f| f.rcond).unwrap_or(0.0)
}
