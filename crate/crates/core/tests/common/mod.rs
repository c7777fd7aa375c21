//! Checks shared by the property tests and the acceptance run. Each returns
//! the worst defect so callers can compare against their own tolerance.

#![allow(dead_code)]

use qme::bscr::{assemble_deflated, reconstruct, recover_offdiagonal};
use qme::cr::{check_cr_identities, CrState};
use qme::dense::{c, eigenvalues, eye, from_diag, lu_solve, multiset_distance, norm_inf, Matrix, C64};
use qme::problems::ProblemInstance;
use qme::shift::{block_shift, ShiftSpec};
use qme::small_qme::{solve_small, SmallQme};
use qme::subspace::SubspaceBundle;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn exact(inst: &ProblemInstance) -> (&Matrix, &Matrix) {
    (inst.known_g.as_ref().expect("known G"), inst.known_r.as_ref().expect("known R"))
}

/// Largest of the four CR identity residuals over `k = 1..=steps`.
pub fn cr_identity_defect(inst: &ProblemInstance, steps: usize) -> f64 {
    let p = &inst.polynomial;
    let (g, r) = exact(inst);
    let mut st = CrState::new(p);
    let mut worst = 0.0f64;
    for _ in 0..steps {
        st = st.step().unwrap();
        let ids = check_cr_identities(&st, p, g, r).unwrap();
        worst = ids.iter().fold(worst, |w, &x| w.max(x));
    }
    worst
}

/// Relative multiset distance between the spectrum of `A_k(z)` and the
/// `2^k`-th powers of the original eigenvalues, worst over `k = 1..=steps`.
pub fn root_squaring_defect(inst: &ProblemInstance, steps: usize) -> f64 {
    let base = inst.polynomial.spectrum().unwrap().finite_eigenvalues;
    let mut st = CrState::new(&inst.polynomial);
    let mut worst = 0.0f64;
    for _ in 0..steps {
        st = st.step().unwrap();
        let want: Vec<C64> = base.iter().map(|z| z.powu(1 << st.k)).collect();
        let got = st.polynomial().spectrum().unwrap().finite_eigenvalues;
        worst = worst.max(multiset_distance(&got, &want));
    }
    worst
}

fn minus(from: &[C64], drop: &[C64]) -> Vec<C64> {
    let mut rest = from.to_vec();
    for z in drop {
        let i = (0..rest.len())
            .min_by(|&i, &j| (rest[i] - z).norm().total_cmp(&(rest[j] - z).norm()))
            .unwrap();
        rest.swap_remove(i);
    }
    rest
}

/// Right, left and two-sided shifts built from the exact interior subspaces.
/// The right shift must send `sigma(L_G1)` to zero and the left shift
/// `sigma(S1)` to infinity, leaving every other eigenvalue in place.
/// Infinite on a wrong count of infinite eigenvalues.
pub fn relocation_defect(inst: &ProblemInstance) -> f64 {
    let p = &inst.polynomial;
    let (g, r) = exact(inst);
    let b = SubspaceBundle::from_solutions(g, r, inst.ell).unwrap();
    let q = p.m() - inst.ell;
    let (w1, t1) = (b.w_g1(), b.t_r1());
    let s1 = lu_solve(&b.lambda_r1, &eye(q)).unwrap();
    let moved_g = eigenvalues(&b.lambda_g1).unwrap();
    let moved_r = eigenvalues(&s1).unwrap();
    let before = p.spectrum().unwrap().finite_eigenvalues;

    let right = ShiftSpec::right(b.lambda_g1.clone(), w1.clone(), w1.adjoint()).unwrap();
    let left = ShiftSpec::left(s1, t1.clone(), t1.adjoint()).unwrap();
    let both = ShiftSpec::both(left.left.clone().unwrap(), right.right.clone().unwrap()).unwrap();

    let zeros = vec![C64::new(0.0, 0.0); q];
    let after_right: Vec<C64> = minus(&before, &moved_g).into_iter().chain(zeros.iter().copied()).collect();
    let after_left = minus(&before, &moved_r);
    let after_both: Vec<C64> = minus(&after_left, &moved_g).into_iter().chain(zeros).collect();

    let mut worst = 0.0f64;
    for (spec, want, infinite) in [(&right, &after_right, 0), (&left, &after_left, q), (&both, &after_both, q)] {
        let s = block_shift(p, spec).unwrap().spectrum().unwrap();
        if s.infinite_count != infinite {
            return f64::INFINITY;
        }
        worst = worst.max(multiset_distance(&s.finite_eigenvalues, want));
    }
    worst
}

/// Deflate with the exact subspaces and exact diagonal blocks, recover the
/// off-diagonal blocks and reconstruct. Returns the relative errors in `G`, `R`.
pub fn reconstruction_error(inst: &ProblemInstance) -> (f64, f64) {
    let (g, r) = exact(inst);
    let b = SubspaceBundle::from_solutions(g, r, inst.ell).unwrap();
    let d = assemble_deflated(&inst.polynomial, &b).unwrap();
    let (w2, t2) = (b.w_g2(), b.t_r2());
    let g11 = w2.adjoint() * g * &w2;
    let r11 = &t2 * r * t2.adjoint();
    let (g21, r12) = recover_offdiagonal(&d, &g11, &r11);
    let back = reconstruct(&b, &g11, &g21, &r11, &r12);
    (norm_inf(&(&back.g - g)) / norm_inf(g), norm_inf(&(&back.r - r)) / norm_inf(r))
}

/// `B(z) = (I - z R) (z I - G)` with `G` and `R` sharing the unimodular
/// spectrum `mu` and `conj(mu)`, so every `mu_i` is a double root.
pub fn synthetic_small(ell: usize, rng: &mut ChaCha8Rng) -> (SmallQme, Matrix, Vec<C64>) {
    let phase = rng.random::<f64>();
    let mu: Vec<C64> = (0..ell)
        .map(|i| C64::from_polar(1.0, std::f64::consts::TAU * (i as f64 + phase + 0.4 * rng.random::<f64>()) / ell as f64))
        .collect();
    let mut basis = || eye(ell) + Matrix::from_fn(ell, ell, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)) * c(0.6, 0.0);
    let s = basis();
    let t = basis();
    let g = &s * from_diag(&mu) * lu_solve(&s, &eye(ell)).unwrap();
    let conj: Vec<C64> = mu.iter().map(|z| z.conj()).collect();
    let r = &t * from_diag(&conj) * lu_solve(&t, &eye(ell)).unwrap();
    let q = SmallQme::new(-&g, eye(ell) + &r * &g, -&r).unwrap();
    (q, g, mu)
}

/// Outcome of [`solve_small`] on one synthetic instance.
pub struct SmallCheck {
    pub residual_ok: bool,
    pub unimodular_ok: bool,
    pub spectrum_distance: f64,
    pub distance_to_g: f64,
}

/// The residual bound is `1e-8 * scale`; unimodularity is checked to `1e-6`.
pub fn small_qme_check(ell: usize, rng: &mut ChaCha8Rng) -> Result<SmallCheck, String> {
    let (q, g, mu) = synthetic_small(ell, rng);
    let sol = solve_small(&q).map_err(|e| format!("ell = {ell}: {e}"))?;
    Ok(SmallCheck {
        residual_ok: sol.residual <= 1e-8 * q.scale(),
        unimodular_ok: sol.selected.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-6),
        spectrum_distance: multiset_distance(&sol.selected, &mu),
        distance_to_g: norm_inf(&(&sol.g11 - &g)) / norm_inf(&g),
    })
}
