//! Writing coefficients as Matrix Market files and a JSON bundle, reading them
//! back and solving.

use std::fs;

use qme::bench::{run, OutputFormat, ProblemSource, RunSpec, SolverKind};
use qme::io::{bundle_to_json, write_matrix_market};
use qme::poly::Field;
use qme::problems::example2;

fn main() -> qme::Result<()> {
    let dir = std::env::temp_dir().join("qme-matrix-files");
    fs::create_dir_all(&dir)?;
    let p = example2(4)?.polynomial;
    for (name, a) in [("a0.mtx", &p.a0), ("a1.mtx", &p.a1), ("a2.mtx", &p.a2)] {
        fs::write(dir.join(name), write_matrix_market(a, Field::Real))?;
    }
    fs::write(dir.join("bundle.json"), serde_json::to_string_pretty(&bundle_to_json(&p))?)?;

    let from_mtx = ProblemSource::MatrixMarket {
        a0: dir.join("a0.mtx"),
        a1: dir.join("a1.mtx"),
        a2: dir.join("a2.mtx"),
    };
    let spec = RunSpec {
        ell: Some(2),
        ..RunSpec::new(SolverKind::Bscr)
    };
    for src in [from_mtx, ProblemSource::Bundle(dir.join("bundle.json"))] {
        let inst = src.load()?;
        let out = run(&spec, &inst)?;
        print!("{}", qme::bench::format_records(&[out.record], OutputFormat::Csv)?);
    }
    println!("files in {}", dir.display());
    Ok(())
}
