//! All four solvers on the 4x4 null-recurrent QBD, laid out like a results table.
//!
//! Plain CR and shifted CR converge linearly here because three eigenvalue
//! pairs sit on the unit circle and S-CR only removes the one at `1`. FPI is
//! sublinear.
//!
//! ```bash
//! cargo run --release --example solver_comparison
//! ```

use qme::baseline::{fpi_solve, scr_solve, BaselineConfig};
use qme::bscr::{bscr_solve, BscrConfig};
use qme::cr::cr_solve;
use qme::problems::example1;
use qme::SolveReport;

fn row(r: &SolveReport) {
    println!(
        "{:>6} {:>10} {:>12.3e} {:>12.3e} {:>10.2}",
        r.solver,
        r.iterations,
        r.residual_g,
        r.residual_r,
        r.wall_time.as_secs_f64() * 1e3
    );
}

fn main() -> qme::Result<()> {
    let p = example1().polynomial;
    println!("{:>6} {:>10} {:>12} {:>12} {:>10}", "solver", "iterations", "residual_G", "residual_R", "ms");
    row(&bscr_solve(&p, &BscrConfig::new(3))?.report.solve);
    row(&scr_solve(&p, &BaselineConfig::new(1e-10, 100))?.report);
    row(&cr_solve(&p, 1e-10, 100)?.report);
    row(&fpi_solve(&p, &BaselineConfig::new(1e-10, 200_000))?.report);
    Ok(())
}
