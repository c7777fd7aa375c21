//! Cyclic reduction.
//!
//! One step maps `(A0, A1, A2, Â1)` to
//!
//! ```text
//! A0' = -A0 A1^-1 A0
//! A1' =  A1 - A0 A1^-1 A2 - A2 A1^-1 A0
//! A2' = -A2 A1^-1 A2
//! Â1' =  Â1 - A2 A1^-1 A0
//! ```
//!
//! and squares every eigenvalue of the polynomial. With exact solutions `G`
//! and `R` the iterates satisfy
//!
//! ```text
//! A0(k) + A1(k) G^(2^k) + A2(k) G^(2^(k+1)) = 0
//! R^(2^(k+1)) A0(k) + R^(2^k) A1(k) + A2(k) = 0
//! A0 + Â1(k) G + A2(k) G^(2^k + 1) = 0
//! A2 + R Â1(k) + R^(2^k + 1) A0(k) = 0
//! ```
//!
//! which [`check_cr_identities`] evaluates.

use std::time::Instant;

use crate::dense::{hcat, norm_inf, pow2k, LuFactor, Matrix, EPS, RCOND_WARN};
use crate::poly::{QuadMatrixPolynomial, SolutionPair};
use crate::report::SolveReport;
use crate::{QmeError, Result};

/// Norm above which `G^(2^k)` is considered to have blown up.
const POWER_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct CrState {
    pub a0: Matrix,
    pub a1: Matrix,
    pub a2: Matrix,
    pub a1_hat: Matrix,
    pub k: usize,
}

pub struct CrSolution {
    pub solution: SolutionPair,
    pub report: SolveReport,
    pub state: CrState,
}

impl CrState {
    pub fn new(p: &QuadMatrixPolynomial) -> Self {
        Self {
            a0: p.a0.clone(),
            a1: p.a1.clone(),
            a2: p.a2.clone(),
            a1_hat: p.a1.clone(),
            k: 0,
        }
    }

    /// The polynomial `A0(k) + z A1(k) + z^2 A2(k)`.
    pub fn polynomial(&self) -> QuadMatrixPolynomial {
        QuadMatrixPolynomial::with_field(
            self.a0.clone(),
            self.a1.clone(),
            self.a2.clone(),
            crate::poly::Field::Complex,
        )
        .expect("iterates keep their shape")
    }

    /// Advances one step. Also returns `rcond(A1(k))`.
    pub fn step_with_rcond(&self) -> Result<(CrState, f64)> {
        let lu = LuFactor::unchecked(&self.a1)?;
        let rc = lu.rcond();
        if !(rc >= EPS) {
            return Err(QmeError::Breakdown {
                step: self.k,
                rcond: rc,
                partial: None,
            });
        }
        let m = self.a0.nrows();
        // One factorization, one solve with both right-hand sides.
        let x = lu.solve(&hcat(&self.a0, &self.a2));
        let x0 = x.columns(0, m).into_owned();
        let x2 = x.columns(m, m).into_owned();
        let a0x2 = &self.a0 * &x2;
        let a2x0 = &self.a2 * &x0;
        let next = CrState {
            a0: -(&self.a0 * &x0),
            a1: &self.a1 - a0x2 - &a2x0,
            a2: -(&self.a2 * &x2),
            a1_hat: &self.a1_hat - a2x0,
            k: self.k + 1,
        };
        Ok((next, rc))
    }

    pub fn step(&self) -> Result<CrState> {
        self.step_with_rcond().map(|(s, _)| s)
    }

    /// `G_k = -Â1(k)^-1 A0` and `R_k = -A2 Â1(k)^-1`.
    pub fn approximations(&self, p: &QuadMatrixPolynomial) -> Result<SolutionPair> {
        let lu = LuFactor::new(&self.a1_hat)?;
        Ok(SolutionPair {
            g: -lu.solve(&p.a0),
            r: -lu.solve_right(&p.a2),
        })
    }
}

pub fn cr_step(s: &CrState) -> Result<CrState> {
    s.step()
}

/// Plain CR: iterate until `residual_g(G_k) <= tol` or `kmax` steps.
pub fn cr_solve(p: &QuadMatrixPolynomial, tol: f64, kmax: usize) -> Result<CrSolution> {
    cr_solve_mapped(p, p, tol, kmax, "cr", Ok)
}

/// Runs CR on `iterated`, passes each `(G_k, R_k)` through `map` and
/// measures residuals of the mapped pair against `target`. Shifted CR uses
/// this to iterate on the shifted polynomial while reporting on the original.
pub(crate) fn cr_solve_mapped(
    iterated: &QuadMatrixPolynomial,
    target: &QuadMatrixPolynomial,
    tol: f64,
    kmax: usize,
    name: &str,
    map: impl Fn(SolutionPair) -> Result<SolutionPair>,
) -> Result<CrSolution> {
    if !(tol > 0.0) || kmax == 0 {
        return Err(QmeError::InvalidArgument(format!(
            "{name} needs tol > 0 and kmax >= 1 (got tol = {tol:e}, kmax = {kmax})"
        )));
    }
    let start = Instant::now();
    let mut report = SolveReport::new(name, target.m());
    let mut state = CrState::new(iterated);
    let mut last: Option<SolutionPair> = None;
    let mut warned = false;

    let fail = |report: &mut SolveReport, step: usize, rcond: f64| {
        report.wall_time = start.elapsed();
        report.note(format!("breakdown at step {step}: rcond = {rcond:.3e}"));
        QmeError::Breakdown {
            step,
            rcond,
            partial: Some(Box::new(report.clone())),
        }
    };

    for _ in 0..kmax {
        let (next, rc) = match state.step_with_rcond() {
            Ok(v) => v,
            Err(QmeError::Breakdown { step, rcond, .. }) => return Err(fail(&mut report, step, rcond)),
            Err(e) => return Err(e),
        };
        if rc < RCOND_WARN && !warned {
            report.note(format!("ill-conditioned A1 at step {}: rcond = {rc:.3e}", state.k));
            warned = true;
        }
        state = next;
        let pair = match state.approximations(iterated).and_then(&map) {
            Ok(pair) => pair,
            Err(QmeError::SingularMatrix { rcond }) => return Err(fail(&mut report, state.k, rcond)),
            Err(e) => return Err(e),
        };
        report.iterations = state.k;
        report.residual_g = target.residual_g(&pair.g)?;
        report.residual_r = target.residual_r(&pair.r)?;
        last = Some(pair);
        if report.residual_g <= tol {
            report.converged = true;
            break;
        }
    }
    let solution = last.expect("kmax >= 1");
    let scale = target.norm_sum().max(f64::MIN_POSITIVE);
    report.relative_residual_g = report.residual_g / scale;
    report.relative_residual_r = report.residual_r / scale;
    report.wall_time = start.elapsed();
    Ok(CrSolution {
        solution,
        report,
        state,
    })
}

/// Infinity norms of the four step-`k` identities, in the order listed in the module docs.
pub fn check_cr_identities(s: &CrState, p: &QuadMatrixPolynomial, g: &Matrix, r: &Matrix) -> Result<[f64; 4]> {
    let m = p.m();
    if g.shape() != (m, m) || r.shape() != (m, m) || s.a0.shape() != (m, m) {
        return Err(QmeError::DimensionMismatch("identity check operands".into()));
    }
    let k = s.k;
    let guard = |x: &Matrix| pow2k(x, k, POWER_LIMIT).ok_or(QmeError::PowerOverflow { step: k, norm: f64::INFINITY });
    let g2k = guard(g)?;
    let r2k = guard(r)?;
    let g2k1 = &g2k * &g2k;
    let r2k1 = &r2k * &r2k;
    let id1 = &s.a0 + &s.a1 * &g2k + &s.a2 * &g2k1;
    let id2 = &r2k1 * &s.a0 + &r2k * &s.a1 + &s.a2;
    let id3 = &p.a0 + &s.a1_hat * g + &s.a2 * (&g2k * g);
    let id4 = &p.a2 + r * &s.a1_hat + (&r2k * r) * &s.a0;
    Ok([norm_inf(&id1), norm_inf(&id2), norm_inf(&id3), norm_inf(&id4)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{eye, from_real_rows, re, zeros};

    fn s(x: f64) -> Matrix {
        from_real_rows(1, 1, &[x])
    }

    fn scalar(a0: f64, a1: f64, a2: f64) -> QuadMatrixPolynomial {
        QuadMatrixPolynomial::new(s(a0), s(a1), s(a2)).unwrap()
    }

    fn close(a: &Matrix, x: f64) -> bool {
        (a[(0, 0)] - re(x)).norm() < 1e-15
    }

    #[test]
    fn identity_middle_is_a_fixed_point() {
        let p = QuadMatrixPolynomial::new(zeros(2, 2), eye(2), zeros(2, 2)).unwrap();
        let mut st = CrState::new(&p);
        for _ in 0..5 {
            let next = st.step().unwrap();
            assert_eq!(next.a0, st.a0);
            assert_eq!(next.a1, st.a1);
            assert_eq!(next.a2, st.a2);
            assert_eq!(next.a1_hat, st.a1_hat);
            st = next;
        }
    }

    #[test]
    fn scalar_first_step_fractions() {
        let st = CrState::new(&scalar(-0.5, 9.0 / 8.0, -0.25)).step().unwrap();
        assert!(close(&st.a0, -2.0 / 9.0));
        assert!(close(&st.a1, 65.0 / 72.0));
        assert!(close(&st.a2, -1.0 / 18.0));
        assert!(close(&st.a1_hat, 73.0 / 72.0));
        assert_eq!(st.k, 1);
    }

    #[test]
    fn null_recurrent_scalar_first_step() {
        let p = scalar(-0.5, 1.0, -0.5);
        let st = CrState::new(&p).step().unwrap();
        assert!(close(&st.a0, -0.25));
        assert!(close(&st.a1, 0.5));
        assert!(close(&st.a2, -0.25));
        assert!(close(&st.a1_hat, 0.75));
        let id = check_cr_identities(&st, &p, &s(1.0), &s(1.0)).unwrap();
        assert_eq!(id, [0.0; 4]);
    }

    #[test]
    fn identities_at_step_zero_are_base_residuals() {
        let p = scalar(-0.5, 9.0 / 8.0, -0.25);
        let id = check_cr_identities(&CrState::new(&p), &p, &s(0.5), &s(0.25)).unwrap();
        assert!(id.iter().all(|&x| x < 1e-16));
    }

    #[test]
    fn scalar_solve_converges_quadratically() {
        let p = scalar(-0.5, 9.0 / 8.0, -0.25);
        // G1 = -(73/72)^-1 (-1/2) = 36/73.
        let st = CrState::new(&p).step().unwrap();
        assert!(close(&st.approximations(&p).unwrap().g, 36.0 / 73.0));
        let sol = cr_solve(&p, 1e-12, 20).unwrap();
        assert!(sol.report.converged);
        assert!((sol.solution.g[(0, 0)] - re(0.5)).norm() < 1e-12);
        assert!((sol.solution.r[(0, 0)] - re(0.25)).norm() < 1e-12);
        assert!(sol.report.iterations <= 6);
    }

    #[test]
    fn breakdown_is_reported() {
        let p = QuadMatrixPolynomial::new(eye(2), zeros(2, 2), eye(2)).unwrap();
        match cr_solve(&p, 1e-12, 5) {
            Err(QmeError::Breakdown { step: 0, partial: Some(rep), .. }) => assert_eq!(rep.iterations, 0),
            other => panic!("expected breakdown, got {:?}", other.map(|s| s.report)),
        }
    }

    #[test]
    fn invalid_arguments() {
        let p = scalar(-0.5, 9.0 / 8.0, -0.25);
        assert!(cr_solve(&p, 0.0, 5).is_err());
        assert!(cr_solve(&p, 1e-12, 0).is_err());
    }

    #[test]
    fn power_guard_trips() {
        let p = scalar(-0.5, 9.0 / 8.0, -0.25);
        let mut st = CrState::new(&p);
        st.k = 7;
        assert!(matches!(
            check_cr_identities(&st, &p, &s(2.0), &s(0.25)),
            Err(QmeError::PowerOverflow { .. })
        ));
    }
}
