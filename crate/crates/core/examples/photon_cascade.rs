//! Two- and three-photon cascades: sectors reached from a few seed monomials.

use qes_core::model::Model;
use qes_core::sectors::{canonicalize, sector_basis, MonomialState};
use qes_core::spectral::full_spectrum;

fn show(model: &Model, seed: MonomialState) -> Result<(), Box<dyn std::error::Error>> {
    let sector = canonicalize(model, &seed)?;
    let basis: Vec<String> = sector_basis(model, &sector)?.iter().map(|s| s.to_string()).collect();
    let full = full_spectrum(model, &sector, 1e-12)?;
    println!("seed {seed} -> {sector}");
    println!("  basis  {}", basis.join("  "));
    let energies: Vec<String> = full.total.iter().map(|e| format!("{e:.9}")).collect();
    println!("  E      {}", energies.join("  "));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let two = Model::from_strs(&["1", "2"], &["3"], &[1, 1], &[1], 0.5)?;
    show(&two, MonomialState::new(vec![1, 1], vec![0]))?;
    show(&two, MonomialState::new(vec![3, 1], vec![2]))?;

    let three = Model::from_strs(&["1", "2", "4"], &["7"], &[1, 1, 1], &[1], 0.5)?;
    show(&three, MonomialState::new(vec![2, 0, 1], vec![3]))?;
    Ok(())
}
