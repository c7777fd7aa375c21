//! Comparison solvers: the U-based fixed-point iteration and shifted CR.
//!
//! FPI iterates `G_{k+1} = -(A1 + A2 G_k)^-1 A0`, which for QBD coefficients
//! is `(I - E1 - E2 G_k)^-1 E0`. Convergence is linear, and sublinear when the
//! process is null recurrent.
//!
//! S-CR moves the eigenvalue `1` of a QBD (eigenvector `1`) to zero with a
//! rank-one right shift, runs CR on the shifted polynomial and adds the
//! correction `1 1^T / m` back. Other unimodular eigenvalues are left alone.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cr::cr_solve_mapped;
use crate::dense::{ones, re, zeros, LuFactor, Matrix};
use crate::poly::{QuadMatrixPolynomial, SolutionPair};
use crate::report::SolveReport;
use crate::shift::qbd_unit_shift;
use crate::{QmeError, Result};

pub const FPI_KMAX: usize = 200_000;
pub const CR_KMAX: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub tol: f64,
    pub kmax: usize,
    /// FPI evaluates the residual every `check_every` iterations.
    pub check_every: usize,
}

impl BaselineConfig {
    pub fn new(tol: f64, kmax: usize) -> Self {
        Self {
            tol,
            kmax,
            check_every: 100,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.kmax == 0 || self.check_every == 0 {
            return Err(QmeError::InvalidArgument(format!(
                "need tol > 0, kmax >= 1, check_every >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

pub struct BaselineSolution {
    pub solution: SolutionPair,
    pub report: SolveReport,
}

/// FPI from the uniform stochastic matrix for QBD input, from zero otherwise.
pub fn fpi_solve(p: &QuadMatrixPolynomial, cfg: &BaselineConfig) -> Result<BaselineSolution> {
    let m = p.m();
    match p.qbd_check() {
        Ok(()) => fpi_solve_with(p, ones(m, m) / re(m as f64), cfg, |_, _, _| {}),
        Err(e) => {
            let mut sol = fpi_solve_with(p, zeros(m, m), cfg, |_, _, _| {})?;
            sol.report.diagnostics.insert(0, format!("starting from G0 = 0: {e}"));
            Ok(sol)
        }
    }
}

/// FPI from `g0`. `observe(k, G_k, residual)` runs at every residual check.
pub fn fpi_solve_with(
    p: &QuadMatrixPolynomial,
    g0: Matrix,
    cfg: &BaselineConfig,
    mut observe: impl FnMut(usize, &Matrix, f64),
) -> Result<BaselineSolution> {
    cfg.validate()?;
    if g0.shape() != (p.m(), p.m()) {
        return Err(QmeError::DimensionMismatch(format!(
            "starting matrix is {:?}, polynomial has m = {}",
            g0.shape(),
            p.m()
        )));
    }
    let start = Instant::now();
    let mut report = SolveReport::new("fpi", p.m());
    let mut g = g0;
    let rhs = -&p.a0;
    for k in 1..=cfg.kmax {
        let lu = LuFactor::new(&(&p.a1 + &p.a2 * &g))?;
        g = lu.solve(&rhs);
        if k % cfg.check_every == 0 || k == cfg.kmax {
            let res = p.residual_g(&g)?;
            observe(k, &g, res);
            report.iterations = k;
            report.residual_g = res;
            if res <= cfg.tol {
                report.converged = true;
                break;
            }
        }
    }
    finish(p, g, report, start)
}

/// Shifted CR for QBD input.
pub fn scr_solve(p: &QuadMatrixPolynomial, cfg: &BaselineConfig) -> Result<BaselineSolution> {
    cfg.validate()?;
    let (shifted, spec) = qbd_unit_shift(p)?;
    let correction = spec.right.as_ref().expect("unit shift is a right shift").correction();
    let sol = cr_solve_mapped(&shifted, p, cfg.tol, cfg.kmax, "scr", |pair| {
        let g = pair.g + &correction;
        let r = p.recover_r_from_g(&g)?;
        Ok(SolutionPair { g, r })
    })?;
    Ok(BaselineSolution {
        solution: sol.solution,
        report: sol.report,
    })
}

fn finish(p: &QuadMatrixPolynomial, g: Matrix, mut report: SolveReport, start: Instant) -> Result<BaselineSolution> {
    let r = p.recover_r_from_g(&g)?;
    report.residual_r = p.residual_r(&r)?;
    let scale = p.norm_sum().max(f64::MIN_POSITIVE);
    report.relative_residual_g = report.residual_g / scale;
    report.relative_residual_r = report.residual_r / scale;
    report.wall_time = start.elapsed();
    Ok(BaselineSolution {
        solution: SolutionPair { g, r },
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cr::cr_solve;
    use crate::dense::{eye, from_real_rows, norm_inf};
    use crate::problems::qbd;

    fn toy_qbd() -> QuadMatrixPolynomial {
        // Down-rate 0.3 beats up-rate 0.1: positive recurrent.
        let e0 = eye(2) * re(0.3);
        let e1 = from_real_rows(2, 2, &[0.12, 0.48, 0.42, 0.18]);
        let e2 = from_real_rows(2, 2, &[0.05, 0.05, 0.05, 0.05]);
        qbd(&e0, &e1, &e2).unwrap()
    }

    #[test]
    fn linear_case_is_one_step() {
        let e0 = from_real_rows(2, 2, &[0.25, 0.75, 1.0, 0.0]);
        let p = QuadMatrixPolynomial::new(-&e0, eye(2), zeros(2, 2)).unwrap();
        let cfg = BaselineConfig { check_every: 1, ..BaselineConfig::new(1e-14, 10) };
        let sol = fpi_solve(&p, &cfg).unwrap();
        assert_eq!(sol.report.iterations, 1);
        assert!(norm_inf(&(&sol.solution.g - &e0)) < 1e-15);
        assert_eq!(norm_inf(&sol.solution.r), 0.0);
    }

    #[test]
    fn scalar_trace_is_monotone() {
        let p = QuadMatrixPolynomial::new(
            from_real_rows(1, 1, &[-0.5]),
            from_real_rows(1, 1, &[9.0 / 8.0]),
            from_real_rows(1, 1, &[-0.25]),
        )
        .unwrap();
        let cfg = BaselineConfig { check_every: 1, ..BaselineConfig::new(1e-14, 200) };
        let mut trace = vec![1.0];
        let sol = fpi_solve_with(&p, eye(1), &cfg, |_, g, _| trace.push(g[(0, 0)].re)).unwrap();
        assert!(sol.report.converged);
        assert!(trace.windows(2).all(|w| w[1] < w[0] && w[1] > 0.5), "{trace:?}");
        assert!((sol.solution.g[(0, 0)].re - 0.5).abs() < 1e-13);
        assert!((sol.solution.r[(0, 0)].re - 0.25).abs() < 1e-13);
    }

    #[test]
    fn non_qbd_start_is_noted() {
        let p = QuadMatrixPolynomial::new(
            from_real_rows(1, 1, &[-0.5]),
            from_real_rows(1, 1, &[9.0 / 8.0]),
            from_real_rows(1, 1, &[-0.25]),
        )
        .unwrap();
        let sol = fpi_solve(&p, &BaselineConfig::new(1e-12, 1000)).unwrap();
        assert!(sol.report.converged);
        assert!(sol.report.diagnostics[0].contains("G0 = 0"));
    }

    #[test]
    fn scr_converges_quadratically_on_recurrent_qbd() {
        let p = toy_qbd();
        let sol = scr_solve(&p, &BaselineConfig::new(1e-12, 100)).unwrap();
        assert!(sol.report.converged);
        assert!(sol.report.iterations <= 10, "{}", sol.report.iterations);
        let cr = cr_solve(&p, 1e-12, 100).unwrap();
        assert!(cr.report.converged);
        assert!(norm_inf(&(&sol.solution.g - &cr.solution.g)) < 1e-8);
        let rowsums = &sol.solution.g * ones(2, 1);
        assert!(rowsums.iter().all(|x| (x.re - 1.0).abs() < 1e-10));
    }

    #[test]
    fn scr_rejects_non_qbd() {
        let p = QuadMatrixPolynomial::new(eye(2), eye(2), eye(2)).unwrap();
        let err = scr_solve(&p, &BaselineConfig::new(1e-7, 10)).err().unwrap();
        assert!(matches!(err, QmeError::NotQbd(_)), "{err}");
    }

    #[test]
    fn config_is_validated() {
        let p = toy_qbd();
        let cfg = BaselineConfig { check_every: 0, ..BaselineConfig::new(1e-7, 10) };
        assert!(matches!(fpi_solve(&p, &cfg), Err(QmeError::InvalidArgument(_))));
        assert!(matches!(scr_solve(&p, &BaselineConfig::new(0.0, 10)), Err(QmeError::InvalidArgument(_))));
    }
}
