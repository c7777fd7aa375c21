//! Residuals of BS-CR, S-CR and CR on the two-level QBD family as the block
//! size doubles. CR and S-CR always run their full 100 steps.
//!
//! ```bash
//! cargo run --release --example example2_sweep
//! ```

use qme::bench::{doubling, example2_experiment};

fn main() -> qme::Result<()> {
    let exp = example2_experiment(&doubling(4, 32))?;
    for (name, table) in &exp.tables {
        println!("{name}\n{}", table.to_markdown());
    }
    for c in &exp.checks {
        println!("{} {}", if c.pass { "pass" } else { "FAIL" }, c.measured);
    }
    Ok(())
}
