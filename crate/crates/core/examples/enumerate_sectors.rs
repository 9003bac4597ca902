//! Sectors touching the window of states with at most B photons.

use qes_core::model::Model;
use qes_core::sectors::enumerate_sectors;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bound: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(6);
    let model = Model::from_strs(&["1", "1"], &["1"], &[2, 1], &[3], 1.0)?;
    let sectors = enumerate_sectors(&model, bound);
    let states: usize = sectors.iter().map(|s| s.dim()).sum();
    println!("{} sectors, {} states in their closures", sectors.len(), states);
    for s in sectors.iter().filter(|s| s.r() > 0).take(12) {
        println!("  {s}  r={}", s.r());
    }
    Ok(())
}
