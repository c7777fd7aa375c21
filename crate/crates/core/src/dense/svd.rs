use super::{ffi, Matrix};
use crate::{QmeError, Result};

/// `A = U diag(sigma) V^H` with square unitary `U`, `V` and non-increasing `sigma`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// `U diag(sigma) V^H`, for reconstruction checks.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let mut sigma = Matrix::zeros(m, n);
        for (i, &s) in self.singular_values.iter().enumerate() {
            sigma[(i, i)] = s.into();
        }
        &self.u * sigma * self.v.adjoint()
    }

    /// `sigma[i+1] / sigma[i]` for the 1-based pair `(l+1, l)`; zero when `sigma_l == 0`.
    pub fn gap_ratio(&self, l: usize) -> f64 {
        assert!(l >= 1 && l < self.singular_values.len());
        let lead = self.singular_values[l - 1];
        if lead == 0.0 {
            0.0
        } else {
            self.singular_values[l] / lead
        }
    }
}

pub fn svd(a: &Matrix) -> Result<Svd> {
    if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(QmeError::InvalidArgument("SVD of a matrix with non-finite entries".into()));
    }
    let mut work = a.clone();
    let raw = ffi::zgesvd(&mut work);
    if raw.info != 0 {
        return Err(QmeError::ConvergenceFailure {
            routine: "zgesvd",
            info: raw.info,
        });
    }
    Ok(Svd {
        u: raw.u,
        singular_values: raw.s,
        v: raw.vt.adjoint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{c, eye, from_diag, from_real_rows, norm_inf, re, EPS};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unitary_defect(u: &Matrix) -> f64 {
        norm_inf(&(u.adjoint() * u - eye(u.ncols())))
    }

    #[test]
    fn zero_matrix() {
        let s = svd(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(s.singular_values, vec![0.0; 3]);
        assert!(unitary_defect(&s.u) < 1e-14 && unitary_defect(&s.v) < 1e-14);
    }

    #[test]
    fn diagonal() {
        let s = svd(&from_diag(&[re(3.0), re(1.0)])).unwrap();
        assert_eq!(s.singular_values, vec![3.0, 1.0]);
    }

    #[test]
    fn nilpotent_null_vector() {
        // [[0,2],[0,0]]: sigma = (2, 0), the second right singular vector spans e1.
        let s = svd(&from_real_rows(2, 2, &[0.0, 2.0, 0.0, 0.0])).unwrap();
        assert!((s.singular_values[0] - 2.0).abs() < 1e-15);
        assert!(s.singular_values[1].abs() < 1e-15);
        let v2 = s.v.column(1);
        assert!((v2[0].norm() - 1.0).abs() < 1e-15);
        assert!(v2[1].norm() < 1e-15);
        assert_eq!(s.gap_ratio(1), 0.0);
    }

    #[test]
    fn random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let m = rng.random_range(1..=8);
            let a = Matrix::from_fn(m, m, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let s = svd(&a).unwrap();
            let tol = 100.0 * m as f64 * EPS * norm_inf(&a);
            assert!(norm_inf(&(s.reconstruct() - &a)) <= tol);
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            assert!(unitary_defect(&s.u) < 1e-13 && unitary_defect(&s.v) < 1e-13);
        }
    }
}
