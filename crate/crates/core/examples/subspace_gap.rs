//! Watching the singular-value gap open while CR runs, then extracting the
//! interior invariant subspaces and checking them against the exact solution.

use qme::cr::CrState;
use qme::dense::svd;
use qme::problems::example3;
use qme::subspace::{extract_subspaces, validate_bundle};

fn main() -> qme::Result<()> {
    let inst = example3(16, 1, 1)?;
    let p = &inst.polynomial;
    let ell = inst.ell;

    let mut st = CrState::new(p);
    for _ in 0..7 {
        st = st.step()?;
        let g0 = svd(&st.a0)?.gap_ratio(ell);
        let g2 = svd(&st.a2)?.gap_ratio(ell);
        println!("k = {}: sigma_{{l+1}}/sigma_l  A0 {g0:.2e}  A2 {g2:.2e}", st.k);
    }

    let b = extract_subspaces(p, ell, 1e-12, 12)?;
    let d = validate_bundle(p, &b, inst.known_g.as_ref(), inst.known_r.as_ref());
    println!("gap test passed after {} steps", b.iterations_used);
    println!("polynomial defects {:.1e} {:.1e}", d.g_polynomial, d.r_polynomial);
    println!("invariance vs exact G, R: {:?} {:?}", d.g_invariance, d.r_invariance);

    // Asking for the wrong number of unimodular eigenvalues fails loudly.
    match extract_subspaces(p, 3, 1e-12, 12) {
        Err(e) => println!("ell = 3: {e}"),
        Ok(_) => println!("ell = 3 unexpectedly passed"),
    }
    Ok(())
}
