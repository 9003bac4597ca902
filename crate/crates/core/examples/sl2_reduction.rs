//! The sl(2) form of a reduced sector operator, checked against direct reduction.

use qes_core::model::Model;
use qes_core::qes::{format_terms, reduced_direct, sl2_expansion, sl2_matrix};
use qes_core::sectors::SectorLabel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        (Model::from_strs(&["1/2"], &["1"], &[2], &[1], 1.0)?, "N=1;M=3"),
        (Model::from_strs(&["1/3"], &["1"], &[3], &[1], 1.0)?, "N=2;M=2"),
        (Model::from_strs(&["1", "1"], &["1"], &[2, 1], &[3], 1.0)?, "N=0,0;M=6"),
    ];
    for (model, text) in &cases {
        let sector = SectorLabel::parse(model, text)?;
        let terms = sl2_expansion(model, &sector)?;
        let from_terms = sl2_matrix(&terms, sector.r())?;
        let direct = reduced_direct(model, &sector)?;
        println!("{sector}: {}", format_terms(&terms));
        for row in direct.to_strings() {
            println!("  [{}]", row.join(", "));
        }
        println!("  EQUAL: {}", if from_terms.same_matrix(&direct) { "yes" } else { "no" });
    }
    Ok(())
}
