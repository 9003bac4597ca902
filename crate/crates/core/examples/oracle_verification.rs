//! Full brute-force verification of a model, followed by a model that breaks
//! the resonance constraint and the commutator witness it produces.

use qes_core::model::{Model, RawModel};
use qes_core::oracle::{build_operators_raw, commutator_check, verify_model, SuiteOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = Model::from_strs(&["1/3"], &["1"], &[3], &[1], 1.0)?;
    let options = SuiteOptions { max_r: 6, max_photons: 10, ..SuiteOptions::default() };
    let report = verify_model(&model, &options)?;
    for check in &report.checks {
        println!("[{}] {}: {}", if check.passed { "ok" } else { "FAIL" }, check.name, check.detail);
    }

    let broken = build_operators_raw(&RawModel::from_strs(&["1"], &["1"], &[2], &[1], 1.0));
    let probe = "i=2;j=0".parse()?;
    match commutator_check(&broken.h0, &broken.h1, &[probe])? {
        Some(w) => println!("\nunbalanced model: [H0, H1] on {} gives {}", w.state, w.residual),
        None => println!("\nunbalanced model: no witness found"),
    }
    Ok(())
}
