//! Moving known eigenvalues to zero (right shift) and to infinity (left shift).

use qme::dense::{eye, norm_inf};
use qme::poly::SolutionPair;
use qme::problems::example3;
use qme::shift::{block_shift, shifted_solutions, ShiftSpec};
use qme::subspace::SubspaceBundle;

fn main() -> qme::Result<()> {
    let inst = example3(6, 1, 3)?;
    let p = &inst.polynomial;
    let g = inst.known_g.clone().unwrap();
    let r = inst.known_r.clone().unwrap();
    let ell = inst.ell;

    // Interior invariant subspaces of G and R from an ordered Schur form.
    let b = SubspaceBundle::from_solutions(&g, &r, ell)?;
    let (w1, t1) = (b.w_g1(), b.t_r1());
    let q = w1.ncols();

    // Right shift sends sigma(Lambda_G1) to zero, left shift sends the
    // eigenvalues of S1 = Lambda_R1^-1 to infinity.
    let right = ShiftSpec::right(b.lambda_g1.clone(), w1.clone(), w1.adjoint())?;
    let s1 = qme::dense::lu_solve(&b.lambda_r1, &eye(q))?;
    let left = ShiftSpec::left(s1, t1.clone(), t1.adjoint())?;
    let both = ShiftSpec::both(left.left.unwrap(), right.right.unwrap())?;

    let shifted = block_shift(p, &both)?;
    let spec = shifted.spectrum()?;
    let zeros_found = spec.finite_eigenvalues.iter().filter(|z| z.norm() < 1e-8).count();
    println!("before: {} finite, {} infinite", p.spectrum()?.finite_eigenvalues.len(), p.spectrum()?.infinite_count);
    println!("after:  {zeros_found} at zero, {} infinite, {} on the unit circle", spec.infinite_count, spec.count_unimodular(1e-6));

    let moved = shifted_solutions(&SolutionPair { g, r }, &both)?;
    println!("shifted G solves the shifted QME: {:.2e}", shifted.residual_g(&moved.g)?);
    println!("shifted R solves the shifted QME: {:.2e}", shifted.residual_r(&moved.r)?);
    println!("A0 annihilates the shifted subspace: {:.2e}", norm_inf(&(&shifted.a0 * &w1)));
    Ok(())
}
