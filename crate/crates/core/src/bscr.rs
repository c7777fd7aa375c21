//! Block-shifted cyclic reduction.
//!
//! 1. CR runs until the interior invariant subspaces of `G` and `R` separate
//!    ([`extract_subspaces_with`]).
//! 2. Shifting those eigenvalues to zero and infinity and changing basis with
//!    `T_R` and `W_G` gives block-structured coefficients `Ā0, Ā1, Ā2`
//!    ([`assemble_deflated`]); eliminating the `(2,2)` block leaves an
//!    `ell x ell` QME whose solution has only unimodular eigenvalues.
//! 3. That QME is solved through its companion pencil ([`solve_small`]), the
//!    off-diagonal blocks follow from one linear solve each
//!    ([`recover_offdiagonal`]), and `G`, `R` are reassembled ([`reconstruct`]).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dense::{block2, drop_imag, max_imag, norm_inf, zeros, LuFactor, Matrix, RCOND_WARN};
use crate::error::StageExt;
use crate::poly::{QuadMatrixPolynomial, SolutionPair};
use crate::report::SolveReport;
use crate::small_qme::{recover_rbar11, solve_small, SmallQme, SmallSolution};
use crate::subspace::{extract_subspaces_with, SubspaceBundle};
use crate::{QmeError, Result};

pub const DEFAULT_EPS: f64 = 1e-12;
pub const DEFAULT_KMAX: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-7;

/// Imaginary parts below this fraction of `||G||` are dropped for real input.
/// Double unimodular eigenvalues limit the forward accuracy to about
/// `sqrt(eps)`, so spurious imaginary parts of order `1e-8` are routine.
const IMAG_DROP: f64 = 1e-6;

/// The transformed coefficients `Ā_i = T_R Ã_i W_G` in block form and the
/// condensed `ell x ell` coefficients
///
/// ```text
/// B0 = Ā011 - Ā112 Ā122^-1 Ā021
/// B1 = Ā111 - Ā112 Ā122^-1 Ā121 - Ā212 Ā122^-1 Ā021
/// B2 = Ā211 - Ā212 Ā122^-1 Ā121
/// ```
#[derive(Debug, Clone)]
pub struct DeflatedSystem {
    pub a011: Matrix,
    pub a021: Matrix,
    pub a111: Matrix,
    pub a112: Matrix,
    pub a121: Matrix,
    pub a122: Matrix,
    pub a211: Matrix,
    pub a212: Matrix,
    pub b0: Matrix,
    pub b1: Matrix,
    pub b2: Matrix,
    pub a122_rcond: f64,
    lu122: LuFactor,
}

impl DeflatedSystem {
    pub fn ell(&self) -> usize {
        self.a011.nrows()
    }

    pub fn small_qme(&self) -> SmallQme {
        SmallQme::new(self.b0.clone(), self.b1.clone(), self.b2.clone()).expect("square blocks")
    }

    /// Full `m x m` matrices `Ā0`, `Ā1`, `Ā2`.
    pub fn full(&self) -> [Matrix; 3] {
        let l = self.ell();
        let n = self.a122.nrows();
        [
            block2(&self.a011, &zeros(l, n), &self.a021, &zeros(n, n)),
            block2(&self.a111, &self.a112, &self.a121, &self.a122),
            block2(&self.a211, &self.a212, &zeros(n, l), &zeros(n, n)),
        ]
    }

    /// `||Ā122 + T_R1 A0 W_G1 L_G1^-1|| / ||A0||`, when `L_G1` is invertible.
    pub fn a122_identity_defect(&self, p: &QuadMatrixPolynomial, b: &SubspaceBundle) -> Option<f64> {
        let lu = LuFactor::new(&b.lambda_g1).ok()?;
        let rhs = lu.solve_right(&(b.t_r1() * &p.a0 * b.w_g1()));
        Some(norm_inf(&(&self.a122 + rhs)) / norm_inf(&p.a0).max(f64::MIN_POSITIVE))
    }

    /// Residuals of the full deflated equations `Ā0 + Ā1 Ḡ + Ā2 Ḡ^2` and
    /// `R̄^2 Ā0 + R̄ Ā1 + Ā2` for `Ḡ = [[G11, 0], [G21, 0]]`, `R̄ = [[R11, R12], [0, 0]]`.
    pub fn full_residuals(&self, g11: &Matrix, g21: &Matrix, r11: &Matrix, r12: &Matrix) -> [f64; 2] {
        let l = self.ell();
        let n = self.a122.nrows();
        let gbar = block2(g11, &zeros(l, n), g21, &zeros(n, n));
        let rbar = block2(r11, r12, &zeros(n, l), &zeros(n, n));
        let [a0, a1, a2] = self.full();
        let rg = norm_inf(&(&a0 + (&a1 + &a2 * &gbar) * &gbar));
        let rr = norm_inf(&(&rbar * (&rbar * &a0 + &a1) + &a2));
        [rg, rr]
    }
}

pub fn assemble_deflated(p: &QuadMatrixPolynomial, b: &SubspaceBundle) -> Result<DeflatedSystem> {
    if b.m() != p.m() {
        return Err(QmeError::DimensionMismatch(format!("bundle of size {} for m = {}", b.m(), p.m())));
    }
    let (w1, w2, t1, t2) = (b.w_g1(), b.w_g2(), b.t_r1(), b.t_r2());
    let a0w2 = &p.a0 * &w2;
    // A1 W1 + A2 W1 L_G1 appears in both Ā112 and Ā122.
    let shifted_w1 = &p.a1 * &w1 + &p.a2 * (&w1 * &b.lambda_g1);
    let a011 = &t2 * &a0w2;
    let a021 = &t1 * &a0w2;
    let a111 = &t2 * &p.a1 * &w2;
    let a112 = &t2 * &shifted_w1;
    let a121 = (&t1 * &p.a1 + &b.lambda_r1 * (&t1 * &p.a0)) * &w2;
    let a122 = &t1 * &shifted_w1;
    let a211 = &t2 * &p.a2 * &w2;
    let a212 = &t2 * &p.a2 * &w1;

    let lu122 = LuFactor::unchecked(&a122)?;
    let rc = lu122.rcond();
    if !(rc >= RCOND_WARN) {
        return Err(QmeError::SingularA122 { rcond: rc });
    }
    let x021 = lu122.solve(&a021);
    let x121 = lu122.solve(&a121);
    let b0 = &a011 - &a112 * &x021;
    let b1 = &a111 - &a112 * &x121 - &a212 * &x021;
    let b2 = &a211 - &a212 * &x121;
    Ok(DeflatedSystem {
        a011,
        a021,
        a111,
        a112,
        a121,
        a122,
        a211,
        a212,
        b0,
        b1,
        b2,
        a122_rcond: rc,
        lu122,
    })
}

/// `Ḡ21 = -Ā122^-1 (Ā021 + Ā121 Ḡ11)` and `R̄12 = -(Ā212 + R̄11 Ā112) Ā122^-1`.
pub fn recover_offdiagonal(d: &DeflatedSystem, g11: &Matrix, r11: &Matrix) -> (Matrix, Matrix) {
    let g21 = -d.lu122.solve(&(&d.a021 + &d.a121 * g11));
    let r12 = -d.lu122.solve_right(&(&d.a212 + r11 * &d.a112));
    (g21, r12)
}

/// ```text
/// G = W2 Ḡ11 W2^H + W1 Ḡ21 W2^H + W1 L_G1 W1^H
/// R = T2^H R̄11 T2 + T2^H R̄12 T1 + T1^H L_R1 T1
/// ```
pub fn reconstruct(b: &SubspaceBundle, g11: &Matrix, g21: &Matrix, r11: &Matrix, r12: &Matrix) -> SolutionPair {
    let (w1, w2, t1, t2) = (b.w_g1(), b.w_g2(), b.t_r1(), b.t_r2());
    let w2h = w2.adjoint();
    let g = &w2 * g11 * &w2h + &w1 * g21 * &w2h + &w1 * &b.lambda_g1 * w1.adjoint();
    let t2h = t2.adjoint();
    let r = &t2h * r11 * &t2 + &t2h * r12 * &t1 + t1.adjoint() * &b.lambda_r1 * &t1;
    SolutionPair { g, r }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BscrConfig {
    pub ell: usize,
    /// Gap threshold on `sigma_{ell+1} / sigma_ell`.
    pub eps: f64,
    /// Maximum number of CR steps in the subspace stage.
    pub kmax: usize,
    /// Residual required for `converged`.
    pub tol: f64,
    /// Also stop the subspace stage as soon as the reconstructed `G` meets `tol`.
    pub accept_on_residual: bool,
}

impl BscrConfig {
    pub fn new(ell: usize) -> Self {
        Self {
            ell,
            eps: DEFAULT_EPS,
            kmax: DEFAULT_KMAX,
            tol: DEFAULT_TOL,
            accept_on_residual: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BscrReport {
    pub solve: SolveReport,
    pub ell: usize,
    pub subspace_iterations: usize,
    pub gap_ratios: [f64; 2],
    pub small_qme_residual: f64,
    pub z11_rcond: f64,
    pub a122_rcond: f64,
    /// Residuals of the full deflated equations for `Ḡ` and `R̄`.
    pub deflated_residuals: [f64; 2],
    /// Largest imaginary part dropped from `G` or `R` for real input.
    pub discarded_imag: f64,
}

pub struct BscrSolution {
    pub solution: SolutionPair,
    pub report: BscrReport,
    pub bundle: SubspaceBundle,
    pub deflated: DeflatedSystem,
    pub small: SmallSolution,
}

struct Finished {
    deflated: DeflatedSystem,
    small: SmallSolution,
    solution: SolutionPair,
    deflated_residuals: [f64; 2],
    residual_g: f64,
}

fn finish(p: &QuadMatrixPolynomial, b: &SubspaceBundle) -> Result<Finished> {
    let deflated = assemble_deflated(p, b).stage("deflation")?;
    let q = deflated.small_qme();
    let small = solve_small(&q).stage("small QME")?;
    let r11 = recover_rbar11(&q, &small.g11).stage("small QME")?;
    let (g21, r12) = recover_offdiagonal(&deflated, &small.g11, &r11);
    let deflated_residuals = deflated.full_residuals(&small.g11, &g21, &r11, &r12);
    let solution = reconstruct(b, &small.g11, &g21, &r11, &r12);
    let residual_g = p.residual_g(&solution.g)?;
    Ok(Finished {
        deflated,
        small,
        solution,
        deflated_residuals,
        residual_g,
    })
}

pub fn bscr_solve(p: &QuadMatrixPolynomial, cfg: &BscrConfig) -> Result<BscrSolution> {
    if !(cfg.tol > 0.0) {
        return Err(QmeError::InvalidArgument(format!("tol must be positive, got {:e}", cfg.tol)));
    }
    let start = Instant::now();
    let mut early: Option<Finished> = None;
    let bundle = extract_subspaces_with(p, cfg.ell, cfg.eps, cfg.kmax, |b| {
        if !cfg.accept_on_residual {
            return false;
        }
        match finish(p, b) {
            Ok(f) if f.residual_g <= cfg.tol => {
                early = Some(f);
                true
            }
            _ => false,
        }
    })
    .stage("subspace extraction")?;
    let f = match early {
        Some(f) => f,
        None => finish(p, &bundle)?,
    };
    let Finished {
        deflated,
        small,
        mut solution,
        deflated_residuals,
        residual_g: _,
    } = f;

    let mut report = SolveReport::new("bscr", p.m());
    let mut discarded = 0.0;
    if p.is_real() {
        for (name, x) in [("G", &mut solution.g), ("R", &mut solution.r)] {
            let im = max_imag(x);
            if im <= IMAG_DROP * norm_inf(x).max(f64::MIN_POSITIVE) {
                discarded = f64::max(discarded, drop_imag(x));
            } else {
                report.note(format!("real input but {name} keeps imaginary parts up to {im:.3e}"));
            }
        }
    }
    report.iterations = bundle.iterations_used;
    report.residual_g = p.residual_g(&solution.g)?;
    report.residual_r = p.residual_r(&solution.r)?;
    report.relative_residual_g = p.relative_residual_g(&solution.g)?;
    report.relative_residual_r = p.relative_residual_r(&solution.r)?;
    report.converged = report.residual_g <= cfg.tol;
    report.diagnostics.extend(small.diagnostics.iter().cloned());
    if deflated.a122_rcond < 1e-8 {
        report.note(format!("A122 is ill-conditioned: rcond = {:.3e}", deflated.a122_rcond));
    }
    report.wall_time = start.elapsed();

    let report = BscrReport {
        ell: cfg.ell,
        subspace_iterations: bundle.iterations_used,
        gap_ratios: bundle.gap_ratios,
        small_qme_residual: small.residual,
        z11_rcond: small.rcond_z11,
        a122_rcond: deflated.a122_rcond,
        deflated_residuals,
        discarded_imag: discarded,
        solve: report,
    };
    Ok(BscrSolution {
        solution,
        report,
        bundle,
        deflated,
        small,
    })
}
