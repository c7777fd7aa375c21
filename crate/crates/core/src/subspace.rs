//! Extraction of the invariant subspaces of `G` and `R` belonging to the
//! eigenvalues strictly inside the unit disk.
//!
//! As CR proceeds, `A0(k)` and `A2(k)` lose rank: their null spaces converge to
//! the interior invariant subspaces. Once the singular values of both show a gap
//! after index `ell`, the trailing right singular vectors of `A0(k)` give
//! `W_G1` and the trailing left singular vectors of `A2(k)` give `T_R1`.

use crate::cr::CrState;
use crate::dense::{eye, generalized_schur_ordered, norm_inf, svd, LuFactor, Matrix, Selection, Svd};
use crate::poly::QuadMatrixPolynomial;
use crate::{QmeError, Result};

/// `W_G = [W_G2 | W_G1]` (unitary) and `T_R = [T_R2; T_R1]` (unitary, by rows)
/// with `G W_G1 = W_G1 L_G1` and `T_R1 R = L_R1 T_R1`.
#[derive(Debug, Clone)]
pub struct SubspaceBundle {
    pub ell: usize,
    pub w_g: Matrix,
    pub t_r: Matrix,
    pub lambda_g1: Matrix,
    pub lambda_r1: Matrix,
    pub iterations_used: usize,
    /// Last observed `sigma_{ell+1} / sigma_ell` for `A0(k)` and `A2(k)`.
    pub gap_ratios: [f64; 2],
}

impl SubspaceBundle {
    pub fn m(&self) -> usize {
        self.w_g.nrows()
    }

    /// `m x ell`: complement of the interior subspace of `G`.
    pub fn w_g2(&self) -> Matrix {
        self.w_g.columns(0, self.ell).into_owned()
    }

    /// `m x (m - ell)`: interior invariant subspace of `G`.
    pub fn w_g1(&self) -> Matrix {
        self.w_g.columns(self.ell, self.m() - self.ell).into_owned()
    }

    /// `ell x m`.
    pub fn t_r2(&self) -> Matrix {
        self.t_r.rows(0, self.ell).into_owned()
    }

    /// `(m - ell) x m`: interior left invariant subspace of `R`.
    pub fn t_r1(&self) -> Matrix {
        self.t_r.rows(self.ell, self.m() - self.ell).into_owned()
    }

    /// The exact bundle of known solutions, from ordered Schur forms of `G` and `R^H`.
    pub fn from_solutions(g: &Matrix, r: &Matrix, ell: usize) -> Result<Self> {
        let m = g.nrows();
        if ell == 0 || ell >= m || g.shape() != (m, m) || r.shape() != (m, m) {
            return Err(QmeError::InvalidArgument(format!("bundle with ell = {ell} for {:?}", g.shape())));
        }
        let interior = |e: Option<crate::C64>| e.is_some_and(|z| z.norm() < 1.0 - 1e-6);
        let basis = |a: &Matrix| -> Result<Matrix> {
            let gs = generalized_schur_ordered(a, &eye(m), Selection::Predicate(&interior))?;
            let inside = gs.eigenvalues().into_iter().filter(|e| interior(*e)).count();
            if inside != m - ell {
                return Err(QmeError::InvalidArgument(format!(
                    "expected {} interior eigenvalues, found {inside}",
                    m - ell
                )));
            }
            // Interior Schur vectors go last.
            let z = &gs.z;
            Ok(crate::dense::hcat(
                &z.columns(m - ell, ell).into_owned(),
                &z.columns(0, m - ell).into_owned(),
            ))
        };
        let w_g = basis(g)?;
        let t_r = basis(&r.adjoint())?.adjoint();
        let w1 = w_g.columns(ell, m - ell).into_owned();
        let t1 = t_r.rows(ell, m - ell).into_owned();
        Ok(Self {
            ell,
            lambda_g1: w1.adjoint() * g * &w1,
            lambda_r1: &t1 * r * t1.adjoint(),
            w_g,
            t_r,
            iterations_used: 0,
            gap_ratios: [0.0, 0.0],
        })
    }
}

/// Index `l` minimizing `max(sigma0_{l+1}/sigma0_l, sigma2_{l+1}/sigma2_l)`.
fn largest_gap(s0: &Svd, s2: &Svd) -> Option<usize> {
    let m = s0.singular_values.len();
    (1..m)
        .map(|l| (l, s0.gap_ratio(l).max(s2.gap_ratio(l))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(l, _)| l)
}

fn bundle_at(
    p: &QuadMatrixPolynomial,
    state: &CrState,
    s0: &Svd,
    s2: &Svd,
    ell: usize,
    gaps: [f64; 2],
) -> Result<SubspaceBundle> {
    let m = p.m();
    let w_g = s0.v.clone();
    let t_r = s2.u.adjoint();
    let w1 = w_g.columns(ell, m - ell).into_owned();
    let t1 = t_r.rows(ell, m - ell).into_owned();
    let lu = LuFactor::new(&state.a1_hat)?;
    let lambda_g1 = -(w1.adjoint() * lu.solve(&(&p.a0 * &w1)));
    let lambda_r1 = -(lu.solve_right(&(&t1 * &p.a2)) * t1.adjoint());
    Ok(SubspaceBundle {
        ell,
        w_g,
        t_r,
        lambda_g1,
        lambda_r1,
        iterations_used: state.k,
        gap_ratios: gaps,
    })
}

/// Runs CR until `sigma_{ell+1}/sigma_ell < eps` for both `A0(k)` and `A2(k)`,
/// then reads off the subspaces and
/// `L_G1 = -W_G1^H Â1^-1 A0 W_G1`, `L_R1 = -T_R1 A2 Â1^-1 T_R1^H`.
pub fn extract_subspaces(p: &QuadMatrixPolynomial, ell: usize, eps: f64, kmax: usize) -> Result<SubspaceBundle> {
    extract_subspaces_with(p, ell, eps, kmax, |_| false)
}

/// As [`extract_subspaces`], but every intermediate bundle is also offered to
/// `accept`; the first accepted one is returned early.
pub fn extract_subspaces_with(
    p: &QuadMatrixPolynomial,
    ell: usize,
    eps: f64,
    kmax: usize,
    mut accept: impl FnMut(&SubspaceBundle) -> bool,
) -> Result<SubspaceBundle> {
    let m = p.m();
    if ell == 0 || ell >= m {
        return Err(QmeError::InvalidArgument(format!("ell must lie in [1, {}], got {ell}", m - 1)));
    }
    if !(eps > 0.0 && eps < 1.0) || kmax == 0 {
        return Err(QmeError::InvalidArgument(format!(
            "need 0 < eps < 1 and kmax >= 1 (got eps = {eps:e}, kmax = {kmax})"
        )));
    }
    let mut state = CrState::new(p);
    let mut last = None;
    for _ in 0..kmax {
        state = state.step()?;
        let s0 = svd(&state.a0)?;
        let s2 = svd(&state.a2)?;
        let gaps = [s0.gap_ratio(ell), s2.gap_ratio(ell)];
        if gaps[0] < eps && gaps[1] < eps {
            return bundle_at(p, &state, &s0, &s2, ell, gaps);
        }
        if let Ok(b) = bundle_at(p, &state, &s0, &s2, ell, gaps) {
            if accept(&b) {
                return Ok(b);
            }
        }
        last = Some((s0, s2, gaps));
    }
    let (s0, s2, gaps) = last.expect("kmax >= 1");
    Err(QmeError::NoGap {
        iterations: kmax,
        gap0: gaps[0],
        gap2: gaps[1],
        suggested_ell: largest_gap(&s0, &s2).filter(|&l| l != ell),
    })
}

/// Defects of a bundle, all in the infinity norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleDiagnostics {
    /// `||A0 W1 + A1 W1 L_G1 + A2 W1 L_G1^2||`.
    pub g_polynomial: f64,
    /// `||L_R1^2 T1 A0 + L_R1 T1 A1 + T1 A2||`.
    pub r_polynomial: f64,
    /// `||W_G^H W_G - I||` and `||T_R T_R^H - I||`.
    pub orthogonality: [f64; 2],
    /// `||G W1 - W1 L_G1||` when `G` is known.
    pub g_invariance: Option<f64>,
    /// `||T1 R - L_R1 T1||` when `R` is known.
    pub r_invariance: Option<f64>,
}

impl BundleDiagnostics {
    pub fn worst(&self) -> f64 {
        [self.g_polynomial, self.r_polynomial]
            .into_iter()
            .chain(self.g_invariance)
            .chain(self.r_invariance)
            .fold(0.0, f64::max)
    }
}

pub fn validate_bundle(
    p: &QuadMatrixPolynomial,
    b: &SubspaceBundle,
    g: Option<&Matrix>,
    r: Option<&Matrix>,
) -> BundleDiagnostics {
    let m = b.m();
    let w1 = b.w_g1();
    let t1 = b.t_r1();
    let lg = &b.lambda_g1;
    let lr = &b.lambda_r1;
    let w1l = &w1 * lg;
    let g_poly = &p.a0 * &w1 + &p.a1 * &w1l + &p.a2 * (&w1l * lg);
    let lt = lr * &t1;
    let r_poly = lr * (&lt * &p.a0) + &lt * &p.a1 + &t1 * &p.a2;
    BundleDiagnostics {
        g_polynomial: norm_inf(&g_poly),
        r_polynomial: norm_inf(&r_poly),
        orthogonality: [
            norm_inf(&(b.w_g.adjoint() * &b.w_g - eye(m))),
            norm_inf(&(&b.t_r * b.t_r.adjoint() - eye(m))),
        ],
        g_invariance: g.map(|g| norm_inf(&(g * &w1 - &w1l))),
        r_invariance: r.map(|r| norm_inf(&(&t1 * r - lt))),
    }
}
