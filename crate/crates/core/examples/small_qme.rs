//! The small equation left after deflation, solved through QZ.
//!
//! `B(z) = (I - z R) (z I - G)` with unimodular `G` has every eigenvalue of
//! `G` twice; the solver has to pick one of each pair.

use qme::dense::{c, eigenvalues, eye, from_diag, Matrix};
use qme::small_qme::{recover_rbar11, solve_small, SmallQme};

fn main() -> qme::Result<()> {
    let mu = [c(0.6, 0.8), c(-1.0, 0.0), c(0.0, 1.0)];
    let s = Matrix::from_fn(3, 3, |i, j| c(1.0 + (i * 3 + j) as f64 * 0.1, if i == j { 0.5 } else { 0.0 }));
    let g = &s * from_diag(&mu) * qme::dense::lu_solve(&s, &eye(3))?;
    let r = qme::dense::lu_solve(&g, &eye(3))?;
    // (I - zR)(zI - G) = -G + z (I + R G) - z^2 R
    let q = SmallQme::new(-&g, eye(3) + &r * &g, -&r)?;

    let sol = solve_small(&q)?;
    println!("residual {:.2e}, rcond(Z11) {:.2e}", sol.residual, sol.rcond_z11);
    println!("eigenvalues of X: {:?}", eigenvalues(&sol.g11)?);
    println!("distance to G: {:.2e}", qme::dense::norm_inf(&(&sol.g11 - &g)));
    let rbar = recover_rbar11(&q, &sol.g11)?;
    println!("reversed residual: {:.2e}", q.residual_r(&rbar));
    Ok(())
}
