//! BS-CR against CR on the factorized complex family, all three cases.

use qme::bscr::{bscr_solve, BscrConfig};
use qme::cr::cr_solve;
use qme::problems::example3;

fn main() -> qme::Result<()> {
    println!("{:>4} {:>5} {:>8} {:>12} {:>8} {:>12}", "m", "case", "BS-CR it", "residual", "CR it", "residual");
    for m in [16, 32] {
        for case in 1..=3 {
            let inst = example3(m, case, 1)?;
            let cfg = BscrConfig {
                accept_on_residual: true,
                ..BscrConfig::new(inst.ell)
            };
            let b = bscr_solve(&inst.polynomial, &cfg)?.report.solve;
            let c = cr_solve(&inst.polynomial, 1e-7, 100)?.report;
            let cr_it = if c.converged { c.iterations.to_string() } else { "-".into() };
            println!("{m:>4} {case:>5} {:>8} {:>12.3e} {cr_it:>8} {:>12.3e}", b.iterations, b.residual_g, c.residual_g);
        }
    }
    Ok(())
}
