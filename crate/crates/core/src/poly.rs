//! Quadratic matrix polynomials `A(z) = A0 + z A1 + z^2 A2`, their residuals,
//! their spectrum (through the companion pencil) and the coupling between the
//! minimal solutions `G` and `R`.

use serde::{Deserialize, Serialize};

use crate::dense::{
    block2, eye, generalized_schur, norm_inf, rcond, zeros, LuFactor, Matrix, C64, EPS,
};
use crate::{QmeError, Result};

/// Scalar field the coefficients were supplied in. Storage is always complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadMatrixPolynomial {
    pub a0: Matrix,
    pub a1: Matrix,
    pub a2: Matrix,
    pub field: Field,
}

/// A solution of the QME together with a solution of the reversed QME.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub g: Matrix,
    pub r: Matrix,
}

/// Eigenvalues of the polynomial, finite ones sorted by modulus.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub finite_eigenvalues: Vec<C64>,
    pub infinite_count: usize,
}

impl SpectrumReport {
    pub fn total(&self) -> usize {
        self.finite_eigenvalues.len() + self.infinite_count
    }

    /// Finite eigenvalues followed by `infinite_count` copies of `inf + 0i`.
    pub fn all(&self) -> Vec<C64> {
        let mut v = self.finite_eigenvalues.clone();
        v.extend(std::iter::repeat_n(C64::new(f64::INFINITY, 0.0), self.infinite_count));
        v
    }

    /// Number of eigenvalues with `| |z| - 1 | <= tol`.
    pub fn count_unimodular(&self, tol: f64) -> usize {
        self.finite_eigenvalues
            .iter()
            .filter(|z| (z.norm() - 1.0).abs() <= tol)
            .count()
    }
}

impl QuadMatrixPolynomial {
    /// Builds a polynomial, inferring the field from the imaginary parts.
    pub fn new(a0: Matrix, a1: Matrix, a2: Matrix) -> Result<Self> {
        let real = [&a0, &a1, &a2].iter().all(|a| a.iter().all(|x| x.im == 0.0));
        let field = if real { Field::Real } else { Field::Complex };
        Self::with_field(a0, a1, a2, field)
    }

    pub fn with_field(a0: Matrix, a1: Matrix, a2: Matrix, field: Field) -> Result<Self> {
        let m = a0.nrows();
        if m == 0 || [&a0, &a1, &a2].iter().any(|a| a.shape() != (m, m)) {
            return Err(QmeError::DimensionMismatch(format!(
                "coefficients must be square and equal-sized, got {:?}, {:?}, {:?}",
                a0.shape(),
                a1.shape(),
                a2.shape()
            )));
        }
        Ok(Self { a0, a1, a2, field })
    }

    pub fn m(&self) -> usize {
        self.a0.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.field == Field::Real
    }

    /// `A(z)`.
    pub fn eval(&self, z: C64) -> Matrix {
        &self.a0 + &self.a1 * z + &self.a2 * (z * z)
    }

    /// `||A0|| + ||A1|| + ||A2||` in the infinity norm.
    pub fn norm_sum(&self) -> f64 {
        norm_inf(&self.a0) + norm_inf(&self.a1) + norm_inf(&self.a2)
    }

    pub fn max_norm(&self) -> f64 {
        norm_inf(&self.a0).max(norm_inf(&self.a1)).max(norm_inf(&self.a2))
    }

    /// Probabilistic check that `det A(z)` is not identically zero: `A(z)` is
    /// evaluated at three fixed off-axis points and must be numerically
    /// nonsingular at least once.
    pub fn check_regular(&self) -> Result<()> {
        let probes = [
            C64::new(0.3127, 0.5791),
            C64::new(-0.7243, 1.3861),
            C64::new(2.6513, -0.1694),
        ];
        let mut best = 0.0f64;
        for z in probes {
            best = best.max(rcond(&self.eval(z)));
            if best >= EPS {
                return Ok(());
            }
        }
        Err(QmeError::DegeneratePolynomial { max_rcond: best })
    }

    fn check_dim(&self, x: &Matrix) -> Result<()> {
        if x.shape() != (self.m(), self.m()) {
            return Err(QmeError::DimensionMismatch(format!(
                "expected a {m}x{m} matrix, got {:?}",
                x.shape(),
                m = self.m()
            )));
        }
        Ok(())
    }

    /// `||A0 + (A1 + A2 X) X||_inf`, evaluated in exactly that grouping.
    pub fn residual_g(&self, x: &Matrix) -> Result<f64> {
        self.check_dim(x)?;
        let inner = &self.a1 + &self.a2 * x;
        Ok(norm_inf(&(&self.a0 + inner * x)))
    }

    /// `||Y^2 A0 + Y A1 + A2||_inf`, evaluated as `Y (Y A0 + A1) + A2`.
    pub fn residual_r(&self, y: &Matrix) -> Result<f64> {
        self.check_dim(y)?;
        let inner = y * &self.a0 + &self.a1;
        Ok(norm_inf(&(y * inner + &self.a2)))
    }

    pub fn relative_residual_g(&self, x: &Matrix) -> Result<f64> {
        Ok(self.residual_g(x)? / self.norm_sum().max(f64::MIN_POSITIVE))
    }

    pub fn relative_residual_r(&self, y: &Matrix) -> Result<f64> {
        Ok(self.residual_r(y)? / self.norm_sum().max(f64::MIN_POSITIVE))
    }

    /// Companion pencil `M = [[0, I], [-A0, -A1]]`, `N = [[I, 0], [0, A2]]`.
    pub fn pencil(&self) -> (Matrix, Matrix) {
        companion_pencil(&self.a0, &self.a1, &self.a2)
    }

    /// All `2m` eigenvalues of the polynomial.
    pub fn spectrum(&self) -> Result<SpectrumReport> {
        let (m, n) = self.pencil();
        let gs = generalized_schur(&m, &n)?;
        let mut finite = Vec::new();
        let mut infinite = 0;
        for e in gs.eigenvalues() {
            match e {
                Some(z) => finite.push(z),
                None => infinite += 1,
            }
        }
        finite.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        Ok(SpectrumReport {
            finite_eigenvalues: finite,
            infinite_count: infinite,
        })
    }

    /// Checks QBD form: `E0 = -A0`, `E1 = I - A1`, `E2 = -A2` are real,
    /// nonnegative, and `(E0 + E1 + E2) 1 = 1`, all to `1e-12`.
    pub fn qbd_check(&self) -> Result<()> {
        const TOL: f64 = 1e-12;
        let m = self.m();
        let e0 = -&self.a0;
        let e1 = eye(m) - &self.a1;
        let e2 = -&self.a2;
        for (name, e) in [("E0", &e0), ("E1", &e1), ("E2", &e2)] {
            if let Some(x) = e.iter().find(|x| x.im.abs() > TOL || x.re < -TOL) {
                return Err(QmeError::NotQbd(format!("{name} has entry {x}")));
            }
        }
        let total = e0 + e1 + e2;
        for (i, row) in total.row_iter().enumerate() {
            let sum: f64 = row.iter().map(|x| x.re).sum();
            if (sum - 1.0).abs() > TOL {
                return Err(QmeError::NotQbd(format!("row {i} of E0 + E1 + E2 sums to {sum}")));
            }
        }
        Ok(())
    }

    /// `R = -A2 (A1 + A2 G)^-1`.
    pub fn recover_r_from_g(&self, g: &Matrix) -> Result<Matrix> {
        self.check_dim(g)?;
        let lu = LuFactor::new(&(&self.a1 + &self.a2 * g))?;
        Ok(-lu.solve_right(&self.a2))
    }

    /// `||R + A2 (A1 + A2 G)^-1||_inf / ||R||_inf`.
    pub fn gr_coupling_defect(&self, g: &Matrix, r: &Matrix) -> Result<f64> {
        let implied = self.recover_r_from_g(g)?;
        Ok(norm_inf(&(r - implied)) / norm_inf(r).max(f64::MIN_POSITIVE))
    }
}

/// The linearization used both as a spectrum oracle and for the small QME.
pub fn companion_pencil(b0: &Matrix, b1: &Matrix, b2: &Matrix) -> (Matrix, Matrix) {
    let l = b0.nrows();
    let z = zeros(l, l);
    let i = eye(l);
    let m = block2(&z, &i, &(-b0), &(-b1));
    let n = block2(&i, &z, &z, b2);
    (m, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{c, from_real_rows, multiset_distance, re};

    fn scalar(a0: f64, a1: f64, a2: f64) -> QuadMatrixPolynomial {
        QuadMatrixPolynomial::new(
            from_real_rows(1, 1, &[a0]),
            from_real_rows(1, 1, &[a1]),
            from_real_rows(1, 1, &[a2]),
        )
        .unwrap()
    }

    fn s(x: f64) -> Matrix {
        from_real_rows(1, 1, &[x])
    }

    #[test]
    fn residual_g_trivial_and_scalar_root() {
        let p = QuadMatrixPolynomial::new(zeros(2, 2), eye(2), zeros(2, 2)).unwrap();
        assert_eq!(p.residual_g(&zeros(2, 2)).unwrap(), 0.0);
        let p = scalar(-0.5, 9.0 / 8.0, -0.25);
        assert_eq!(p.residual_g(&s(0.5)).unwrap(), 0.0);
        assert_eq!(p.field, Field::Real);
    }

    #[test]
    fn residual_r_trivial_and_scalar_root() {
        let p = QuadMatrixPolynomial::new(eye(2), eye(2), zeros(2, 2)).unwrap();
        assert_eq!(p.residual_r(&zeros(2, 2)).unwrap(), 0.0);
        let p = scalar(-0.5, 9.0 / 8.0, -0.25);
        assert_eq!(p.residual_r(&s(0.25)).unwrap(), 0.0);
    }

    #[test]
    fn residual_dimension_mismatch() {
        let p = scalar(-0.5, 9.0 / 8.0, -0.25);
        assert!(matches!(p.residual_g(&eye(2)), Err(QmeError::DimensionMismatch(_))));
        assert!(matches!(p.residual_r(&eye(2)), Err(QmeError::DimensionMismatch(_))));
    }

    #[test]
    fn scalar_spectrum() {
        let sp = scalar(-0.5, 9.0 / 8.0, -0.25).spectrum().unwrap();
        assert_eq!(sp.infinite_count, 0);
        assert!(multiset_distance(&sp.finite_eigenvalues, &[re(0.5), re(4.0)]) < 1e-14);
        assert!(sp.finite_eigenvalues[0].norm() <= sp.finite_eigenvalues[1].norm());
    }

    #[test]
    fn unit_square_root_spectrum() {
        let p = QuadMatrixPolynomial::new(-eye(2), zeros(2, 2), eye(2)).unwrap();
        let sp = p.spectrum().unwrap();
        assert_eq!(sp.total(), 4);
        assert!(multiset_distance(&sp.all(), &[re(-1.0), re(-1.0), re(1.0), re(1.0)]) < 1e-14);
    }

    #[test]
    fn singular_leading_coefficient_gives_infinite_eigenvalues() {
        let a2 = from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let p = QuadMatrixPolynomial::new(-eye(2), zeros(2, 2), a2).unwrap();
        // det A(z) = 1 - z^2 has degree 2 = 2m - 2: two roots at infinity.
        let sp = p.spectrum().unwrap();
        assert_eq!(sp.infinite_count, 2);
        assert!(multiset_distance(&sp.finite_eigenvalues, &[re(1.0), re(-1.0)]) < 1e-14);
    }

    #[test]
    fn recover_r_trivial_and_scalar() {
        let p = QuadMatrixPolynomial::new(-eye(2), eye(2) * re(2.0), zeros(2, 2)).unwrap();
        assert_eq!(p.recover_r_from_g(&eye(2)).unwrap(), zeros(2, 2));
        let p = scalar(-0.5, 9.0 / 8.0, -0.25);
        let r = p.recover_r_from_g(&s(0.5)).unwrap();
        assert!((r[(0, 0)] - re(0.25)).norm() < 1e-16);
        assert!(p.residual_r(&r).unwrap() < 1e-16);
    }

    #[test]
    fn recover_r_singular() {
        // A1 + A2 G = 0 for G = 1.
        let p = scalar(0.0, -1.0, 1.0);
        assert!(matches!(p.recover_r_from_g(&s(1.0)), Err(QmeError::SingularMatrix { .. })));
    }

    #[test]
    fn degenerate_polynomial_detected() {
        // Shared zero row: A(z) is singular for every z.
        let a = from_real_rows(2, 2, &[1.0, 2.0, 0.0, 0.0]);
        let p = QuadMatrixPolynomial::new(a.clone(), a.clone(), a).unwrap();
        assert!(matches!(p.check_regular(), Err(QmeError::DegeneratePolynomial { .. })));
        assert!(scalar(-0.5, 9.0 / 8.0, -0.25).check_regular().is_ok());
    }

    #[test]
    fn complex_field_inferred() {
        let p = QuadMatrixPolynomial::new(Matrix::from_element(1, 1, c(0.0, 1.0)), s(1.0), s(0.0)).unwrap();
        assert_eq!(p.field, Field::Complex);
    }
}
