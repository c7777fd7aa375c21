//! Solve a null-recurrent QBD with block-shifted cyclic reduction.
//!
//! ```bash
//! cargo run --example quickstart
//! ```

use qme::bscr::{bscr_solve, BscrConfig};
use qme::problems::example1;

fn main() -> qme::Result<()> {
    // Three double eigenvalues on the unit circle: the cube roots of unity.
    let inst = example1();
    let p = &inst.polynomial;

    let sol = bscr_solve(p, &BscrConfig::new(inst.ell))?;
    let rep = &sol.report;
    println!("CR steps in the subspace stage: {}", rep.subspace_iterations);
    println!("residual of G: {:.3e}", rep.solve.residual_g);
    println!("residual of R: {:.3e}", rep.solve.residual_r);
    println!("G =\n{:.6}", sol.solution.g.map(|x| x.re));
    println!("eigenvalues of the small block G11: {:?}", qme::dense::eigenvalues(&sol.small.g11)?);
    Ok(())
}
