//! Block shift-and-deflate.
//!
//! A right shift `(S2, V2, Y)` with `A0 V2 + A1 V2 S2 + A2 V2 S2^2 = 0` moves
//! the eigenvalues of `S2` to zero; a left shift `(S1, U1, X)` with
//! `U1 A0 + S1 U1 A1 + S1^2 U1 A2 = 0` moves the eigenvalues of `S1` to
//! infinity. The shifted coefficients are
//!
//! ```text
//! Ã0 = A0 - A0 V2 Y
//! Ã1 = A1 + A2 V2 S2 Y + X S1^-1 U1 Ã0
//! Ã2 = A2 - X U1 A2
//! ```
//!
//! with the terms of an absent side dropped. Solutions transport as
//! `G̃ = G - V2 S2 Y` and `R̃ = R - X S1^-1 U1`.

use crate::dense::{eye, norm_inf, ones, LuFactor, Matrix};
use crate::poly::{QuadMatrixPolynomial, SolutionPair};
use crate::{QmeError, Result};

const BIORTHO_TOL: f64 = 1e-10;
const HYPOTHESIS_TOL: f64 = 1e-8;
const ANNIHILATION_TOL: f64 = 1e-10;

/// Moves the eigenvalues of `s2` (a right eigen-block `G V2 = V2 S2`) to zero.
#[derive(Debug, Clone)]
pub struct RightShift {
    pub s2: Matrix,
    pub v2: Matrix,
    pub y: Matrix,
}

/// Moves the eigenvalues of `s1` (a left eigen-block `U1 R = S1^-1 U1`) to infinity.
#[derive(Debug, Clone)]
pub struct LeftShift {
    pub s1: Matrix,
    pub u1: Matrix,
    pub x: Matrix,
    s1_inv: Matrix,
}

#[derive(Debug, Clone, Default)]
pub struct ShiftSpec {
    pub left: Option<LeftShift>,
    pub right: Option<RightShift>,
}

fn check_biorthogonal(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.ncols() != b.nrows() {
        return Err(QmeError::DimensionMismatch(format!("{what}: {:?} times {:?}", a.shape(), b.shape())));
    }
    let d = norm_inf(&(a * b - eye(a.nrows())));
    if d > BIORTHO_TOL {
        return Err(QmeError::InvalidArgument(format!("{what} must be the identity (defect {d:.3e})")));
    }
    Ok(())
}

impl RightShift {
    pub fn new(s2: Matrix, v2: Matrix, y: Matrix) -> Result<Self> {
        let q = s2.nrows();
        if s2.ncols() != q || v2.ncols() != q || y.nrows() != q || y.ncols() != v2.nrows() || q >= v2.nrows() {
            return Err(QmeError::DimensionMismatch(format!(
                "right shift with S2 {:?}, V2 {:?}, Y {:?}",
                s2.shape(),
                v2.shape(),
                y.shape()
            )));
        }
        check_biorthogonal(&y, &v2, "Y V2")?;
        Ok(Self { s2, v2, y })
    }

    pub fn q(&self) -> usize {
        self.s2.nrows()
    }

    /// `V2 S2 Y`, the amount subtracted from `G`.
    pub fn correction(&self) -> Matrix {
        &self.v2 * &self.s2 * &self.y
    }
}

impl LeftShift {
    pub fn new(s1: Matrix, u1: Matrix, x: Matrix) -> Result<Self> {
        let q = s1.nrows();
        if s1.ncols() != q || u1.nrows() != q || x.ncols() != q || x.nrows() != u1.ncols() || q >= u1.ncols() {
            return Err(QmeError::DimensionMismatch(format!(
                "left shift with S1 {:?}, U1 {:?}, X {:?}",
                s1.shape(),
                u1.shape(),
                x.shape()
            )));
        }
        check_biorthogonal(&u1, &x, "U1 X")?;
        let s1_inv = LuFactor::new(&s1)?.solve(&eye(q));
        Ok(Self { s1, u1, x, s1_inv })
    }

    pub fn q(&self) -> usize {
        self.s1.nrows()
    }

    pub fn s1_inv(&self) -> &Matrix {
        &self.s1_inv
    }

    /// `X S1^-1 U1`, the amount subtracted from `R`.
    pub fn correction(&self) -> Matrix {
        &self.x * &self.s1_inv * &self.u1
    }
}

impl ShiftSpec {
    pub fn right(s2: Matrix, v2: Matrix, y: Matrix) -> Result<Self> {
        Ok(Self {
            left: None,
            right: Some(RightShift::new(s2, v2, y)?),
        })
    }

    pub fn left(s1: Matrix, u1: Matrix, x: Matrix) -> Result<Self> {
        Ok(Self {
            left: Some(LeftShift::new(s1, u1, x)?),
            right: None,
        })
    }

    pub fn both(left: LeftShift, right: RightShift) -> Result<Self> {
        if left.u1.ncols() != right.v2.nrows() {
            return Err(QmeError::DimensionMismatch("left and right shifts act on different sizes".into()));
        }
        Ok(Self {
            left: Some(left),
            right: Some(right),
        })
    }

    fn m(&self) -> Option<usize> {
        self.right
            .as_ref()
            .map(|r| r.v2.nrows())
            .or(self.left.as_ref().map(|l| l.u1.ncols()))
    }

    /// Relative defects of the two block eigen-relations, `None` for an absent side.
    pub fn hypothesis_defects(&self, p: &QuadMatrixPolynomial) -> (Option<f64>, Option<f64>) {
        let scale = p.norm_sum().max(f64::MIN_POSITIVE);
        let left = self.left.as_ref().map(|l| {
            let u1a1 = &l.u1 * &p.a1;
            let u1a2 = &l.u1 * &p.a2;
            let d = &l.u1 * &p.a0 + &l.s1 * u1a1 + &l.s1 * (&l.s1 * u1a2);
            let w = norm_inf(&l.u1) * (1.0 + norm_inf(&l.s1)).powi(2);
            norm_inf(&d) / (scale * w)
        });
        let right = self.right.as_ref().map(|r| {
            let a1v2 = &p.a1 * &r.v2;
            let a2v2 = &p.a2 * &r.v2;
            let d = &p.a0 * &r.v2 + a1v2 * &r.s2 + a2v2 * (&r.s2 * &r.s2);
            let w = norm_inf(&r.v2) * (1.0 + norm_inf(&r.s2)).powi(2);
            norm_inf(&d) / (scale * w)
        });
        (left, right)
    }
}

/// Applies the block shift, checking the eigen-relations beforehand and the
/// annihilation properties `U1 Ã2 = 0`, `Ã0 V2 = 0` afterwards.
pub fn block_shift(p: &QuadMatrixPolynomial, spec: &ShiftSpec) -> Result<QuadMatrixPolynomial> {
    let Some(m) = spec.m() else {
        return Ok(p.clone());
    };
    if m != p.m() {
        return Err(QmeError::DimensionMismatch(format!("shift of size {m} for a polynomial of size {}", p.m())));
    }
    let (dl, dr) = spec.hypothesis_defects(p);
    if let Some(d) = dl.filter(|&d| d > HYPOTHESIS_TOL) {
        return Err(QmeError::SpecViolation {
            what: "U1 A0 + S1 U1 A1 + S1^2 U1 A2 = 0",
            defect: d,
        });
    }
    if let Some(d) = dr.filter(|&d| d > HYPOTHESIS_TOL) {
        return Err(QmeError::SpecViolation {
            what: "A0 V2 + A1 V2 S2 + A2 V2 S2^2 = 0",
            defect: d,
        });
    }

    let mut a0 = p.a0.clone();
    let mut a1 = p.a1.clone();
    let mut a2 = p.a2.clone();
    if let Some(r) = &spec.right {
        a0 -= &p.a0 * &r.v2 * &r.y;
        a1 += &p.a2 * r.correction();
    }
    if let Some(l) = &spec.left {
        a1 += &l.x * (&l.s1_inv * (&l.u1 * &a0));
        a2 -= &l.x * (&l.u1 * &p.a2);
    }

    if let Some(l) = &spec.left {
        let d = norm_inf(&(&l.u1 * &a2));
        if d > ANNIHILATION_TOL * norm_inf(&p.a2).max(1.0) * norm_inf(&l.u1) {
            return Err(QmeError::SpecViolation { what: "U1 Ã2 = 0", defect: d });
        }
    }
    if let Some(r) = &spec.right {
        let d = norm_inf(&(&a0 * &r.v2));
        if d > ANNIHILATION_TOL * norm_inf(&p.a0).max(1.0) * norm_inf(&r.v2) {
            return Err(QmeError::SpecViolation { what: "Ã0 V2 = 0", defect: d });
        }
    }
    QuadMatrixPolynomial::with_field(a0, a1, a2, p.field)
}

/// Transports solutions of the original equations to the shifted ones.
/// Requires `G V2 = V2 S2` and `U1 R = S1^-1 U1`.
pub fn shifted_solutions(sol: &SolutionPair, spec: &ShiftSpec) -> Result<SolutionPair> {
    let mut out = sol.clone();
    if let Some(r) = &spec.right {
        let lhs = &sol.g * &r.v2;
        let d = norm_inf(&(&lhs - &r.v2 * &r.s2)) / (norm_inf(&sol.g).max(1.0) * norm_inf(&r.v2));
        if d > HYPOTHESIS_TOL {
            return Err(QmeError::SpecViolation { what: "G V2 = V2 S2", defect: d });
        }
        out.g -= r.correction();
    }
    if let Some(l) = &spec.left {
        let lhs = &l.u1 * &sol.r;
        let d = norm_inf(&(&lhs - &l.s1_inv * &l.u1)) / (norm_inf(&sol.r).max(1.0) * norm_inf(&l.u1));
        if d > HYPOTHESIS_TOL {
            return Err(QmeError::SpecViolation { what: "U1 R = S1^-1 U1", defect: d });
        }
        out.r -= l.correction();
    }
    Ok(out)
}

/// The shift used by shifted CR on a QBD: `G 1 = 1` is known, so
/// `V2 = 1`, `S2 = 1`, `Y = 1^T / m` moves that eigenvalue to zero.
pub fn qbd_unit_shift(p: &QuadMatrixPolynomial) -> Result<(QuadMatrixPolynomial, ShiftSpec)> {
    p.qbd_check()?;
    let m = p.m();
    let spec = ShiftSpec::right(eye(1), ones(m, 1), ones(1, m) / crate::dense::re(m as f64))?;
    let shifted = block_shift(p, &spec)?;
    Ok((shifted, spec))
}
