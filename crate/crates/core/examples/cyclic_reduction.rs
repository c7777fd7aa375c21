//! Step-by-step cyclic reduction: eigenvalue squaring and the four identities
//! linking the iterates to the exact solutions.

use qme::cr::{check_cr_identities, CrState};
use qme::dense::{multiset_distance, C64};
use qme::problems::example3;

fn main() -> qme::Result<()> {
    let inst = example3(8, 1, 7)?;
    let p = &inst.polynomial;
    let (g, r) = (inst.known_g.as_ref().unwrap(), inst.known_r.as_ref().unwrap());
    let base: Vec<C64> = p.spectrum()?.finite_eigenvalues;

    let mut st = CrState::new(p);
    for _ in 0..4 {
        st = st.step()?;
        // Each step maps every eigenvalue z to z^2.
        let squared: Vec<C64> = base.iter().map(|z| z.powu(1 << st.k)).collect();
        let spec = st.polynomial().spectrum()?.finite_eigenvalues;
        let ids = check_cr_identities(&st, p, g, r)?;
        let approx = st.approximations(p)?;
        println!(
            "k = {}: spectrum vs z^(2^k) {:.1e}, identities {:.1e} {:.1e} {:.1e} {:.1e}, residual(G_k) {:.2e}",
            st.k,
            multiset_distance(&spec, &squared),
            ids[0],
            ids[1],
            ids[2],
            ids[3],
            p.residual_g(&approx.g)?
        );
    }
    Ok(())
}
