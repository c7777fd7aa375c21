use super::{ffi, norm_inf, Matrix, C64, INF_TOL};
use crate::{QmeError, Result};

/// `Q^H M Z = T`, `Q^H N Z = S` with `T`, `S` upper triangular.
#[derive(Debug, Clone)]
pub struct GeneralizedSchur {
    pub q: Matrix,
    pub z: Matrix,
    pub t: Matrix,
    pub s: Matrix,
    /// Diagonal pairs `(alpha, beta)`; the eigenvalue is `alpha / beta`.
    pub eigenvalue_pairs: Vec<(C64, C64)>,
}

/// Which eigenvalues to move to the leading diagonal positions.
pub enum Selection<'a> {
    /// Every eigenvalue (`None` = infinite) for which the predicate holds, original order kept.
    Predicate(&'a dyn Fn(Option<C64>) -> bool),
    /// For each target, the nearest not-yet-chosen finite eigenvalue, placed in target order.
    Targets(&'a [C64]),
    /// Explicit mask over the current diagonal positions.
    Mask(&'a [bool]),
}

impl GeneralizedSchur {
    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    /// Eigenvalue at diagonal position `i`, `None` when infinite.
    pub fn eigenvalue(&self, i: usize) -> Option<C64> {
        let (a, b) = self.eigenvalue_pairs[i];
        if b.norm() <= INF_TOL * (a.norm() + b.norm()) {
            None
        } else {
            Some(a / b)
        }
    }

    pub fn eigenvalues(&self) -> Vec<Option<C64>> {
        (0..self.n()).map(|i| self.eigenvalue(i)).collect()
    }

    /// `(||Q^H M Z - T||, ||Q^H N Z - S||)` in the infinity norm.
    pub fn residuals(&self, m: &Matrix, n: &Matrix) -> (f64, f64) {
        let qh = self.q.adjoint();
        (
            norm_inf(&(&qh * m * &self.z - &self.t)),
            norm_inf(&(&qh * n * &self.z - &self.s)),
        )
    }

    /// Moves the pairs flagged in `select` to the top, preserving their relative order.
    pub fn reorder(&self, select: &[bool]) -> Result<Self> {
        if select.len() != self.n() {
            return Err(QmeError::DimensionMismatch(format!(
                "selection mask of length {} for a pencil of size {}",
                select.len(),
                self.n()
            )));
        }
        let mut out = self.clone();
        let mut alpha: Vec<C64> = out.eigenvalue_pairs.iter().map(|p| p.0).collect();
        let mut beta: Vec<C64> = out.eigenvalue_pairs.iter().map(|p| p.1).collect();
        let info = ffi::ztgsen(
            select,
            &mut out.t,
            &mut out.s,
            &mut alpha,
            &mut beta,
            &mut out.q,
            &mut out.z,
        );
        if info != 0 {
            return Err(QmeError::ReorderFailure { info });
        }
        out.eigenvalue_pairs = alpha.into_iter().zip(beta).collect();
        Ok(out)
    }

    /// Reorders so that the listed positions come first, in the listed order.
    pub fn reorder_positions(&self, positions: &[usize]) -> Result<Self> {
        let n = self.n();
        // Track where each original position currently sits.
        let mut current: Vec<usize> = (0..n).collect();
        let mut out = self.clone();
        for (j, &p) in positions.iter().enumerate() {
            if p >= n {
                return Err(QmeError::InvalidArgument(format!("position {p} out of range")));
            }
            let at = current.iter().position(|&x| x == p).expect("tracked");
            if at < j {
                return Err(QmeError::InvalidArgument(format!("position {p} listed twice")));
            }
            if at == j {
                continue;
            }
            let mut mask = vec![false; n];
            mask[..j].iter_mut().for_each(|m| *m = true);
            mask[at] = true;
            out = out.reorder(&mask)?;
            let moved = current.remove(at);
            current.insert(j, moved);
        }
        Ok(out)
    }
}

/// Unordered generalized Schur decomposition of the pencil `(M, N)`.
pub fn generalized_schur(m: &Matrix, n: &Matrix) -> Result<GeneralizedSchur> {
    if m.nrows() != m.ncols() || n.shape() != m.shape() {
        return Err(QmeError::DimensionMismatch(format!(
            "pencil with M {:?} and N {:?}",
            m.shape(),
            n.shape()
        )));
    }
    let mut t = m.clone();
    let mut s = n.clone();
    let raw = ffi::zgges(&mut t, &mut s);
    if raw.info != 0 {
        return Err(QmeError::SchurFailure { info: raw.info });
    }
    // zgges leaves garbage-free triangles, but clear roundoff below the diagonal.
    for j in 0..t.ncols() {
        for i in j + 1..t.nrows() {
            t[(i, j)] = C64::new(0.0, 0.0);
            s[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok(GeneralizedSchur {
        q: raw.q,
        z: raw.z,
        t,
        s,
        eigenvalue_pairs: raw.alpha.into_iter().zip(raw.beta).collect(),
    })
}

/// Generalized Schur decomposition with the selected eigenvalues leading.
pub fn generalized_schur_ordered(m: &Matrix, n: &Matrix, sel: Selection<'_>) -> Result<GeneralizedSchur> {
    let gs = generalized_schur(m, n)?;
    match sel {
        Selection::Mask(mask) => gs.reorder(mask),
        Selection::Predicate(pred) => {
            let mask: Vec<bool> = gs.eigenvalues().into_iter().map(pred).collect();
            gs.reorder(&mask)
        }
        Selection::Targets(targets) => {
            let eig = gs.eigenvalues();
            let mut taken = vec![false; eig.len()];
            let mut positions = Vec::with_capacity(targets.len());
            for t in targets {
                let best = eig
                    .iter()
                    .enumerate()
                    .filter(|(i, e)| !taken[*i] && e.is_some())
                    .map(|(i, e)| (i, (e.unwrap() - t).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                let Some((i, _)) = best else {
                    return Err(QmeError::InvalidArgument(
                        "more targets than finite eigenvalues".into(),
                    ));
                };
                taken[i] = true;
                positions.push(i);
            }
            gs.reorder_positions(&positions)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{eye, from_diag, from_real_rows, re, EPS};

    fn check_residuals(gs: &GeneralizedSchur, m: &Matrix, n: &Matrix) {
        let (rt, rs) = gs.residuals(m, n);
        let bound = 100.0 * m.nrows() as f64 * EPS * (norm_inf(m) + norm_inf(n));
        assert!(rt <= bound && rs <= bound, "residuals {rt:e} {rs:e} > {bound:e}");
    }

    #[test]
    fn diag_with_target_leading() {
        let m = from_diag(&[re(1.0), re(2.0)]);
        let gs = generalized_schur_ordered(&m, &eye(2), Selection::Targets(&[re(2.0)])).unwrap();
        assert!((gs.eigenvalue(0).unwrap() - re(2.0)).norm() < 1e-14);
        check_residuals(&gs, &m, &eye(2));
    }

    // Oracle: det(M - zN) for a 2x2 pencil expanded by hand, roots by the quadratic formula.
    fn pencil_roots_2x2(m: &Matrix, n: &Matrix) -> [C64; 2] {
        let (a, b, c_, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let (e, f, g, h) = (n[(0, 0)], n[(0, 1)], n[(1, 0)], n[(1, 1)]);
        // (a - z e)(d - z h) - (b - z f)(c - z g) = q2 z^2 + q1 z + q0
        let q2 = e * h - f * g;
        let q1 = -(a * h + d * e) + (b * g + c_ * f);
        let q0 = a * d - b * c_;
        let disc = (q1 * q1 - q2 * q0 * 4.0).sqrt();
        [(-q1 + disc) / (q2 * 2.0), (-q1 - disc) / (q2 * 2.0)]
    }

    #[test]
    fn companion_pencil_roots_match_characteristic_polynomial() {
        let m = from_real_rows(2, 2, &[0.0, 1.0, -1.0, -2.0]);
        // N = diag(1, -1): det(M - zN) = -(z^2 - 2z - 1), roots 1 +- sqrt(2).
        let n = from_diag(&[re(1.0), re(-1.0)]);
        let gs = generalized_schur(&m, &n).unwrap();
        let got: Vec<C64> = gs.eigenvalues().into_iter().map(Option::unwrap).collect();
        let want = pencil_roots_2x2(&m, &n);
        assert!(crate::dense::multiset_distance(&got, &want) < 1e-14);
        assert!(crate::dense::multiset_distance(&got, &[re(1.0 + 2f64.sqrt()), re(1.0 - 2f64.sqrt())]) < 1e-14);
        check_residuals(&gs, &m, &n);

        // N = I is the companion pencil of 1 + 2z + z^2: double root -1.
        let gs = generalized_schur(&m, &eye(2)).unwrap();
        for e in gs.eigenvalues() {
            assert!((e.unwrap() - re(-1.0)).norm() < 1e-7);
        }
    }

    #[test]
    fn both_orderings_reachable() {
        // Spectrum {0.5, 4} via a non-normal 2x2.
        let m = from_real_rows(2, 2, &[0.5, 3.0, 0.0, 4.0]);
        for target in [0.5, 4.0] {
            let gs = generalized_schur_ordered(&m, &eye(2), Selection::Targets(&[re(target)])).unwrap();
            assert!((gs.eigenvalue(0).unwrap() - re(target)).norm() < 1e-12);
            check_residuals(&gs, &m, &eye(2));
        }
    }

    #[test]
    fn infinite_eigenvalue_detected() {
        let m = eye(2);
        let n = from_diag(&[re(1.0), re(0.0)]);
        let gs = generalized_schur(&m, &n).unwrap();
        let inf = gs.eigenvalues().iter().filter(|e| e.is_none()).count();
        assert_eq!(inf, 1);
        let lead_inf = generalized_schur_ordered(&m, &n, Selection::Predicate(&|e| e.is_none())).unwrap();
        assert!(lead_inf.eigenvalue(0).is_none());
    }

    #[test]
    fn target_order_is_respected() {
        let m = from_diag(&[re(1.0), re(2.0), re(3.0), re(4.0)]);
        let targets = [re(3.0), re(1.0), re(4.0)];
        let gs = generalized_schur_ordered(&m, &eye(4), Selection::Targets(&targets)).unwrap();
        for (i, t) in targets.iter().enumerate() {
            assert!((gs.eigenvalue(i).unwrap() - t).norm() < 1e-12);
        }
        check_residuals(&gs, &m, &eye(4));
    }
}
