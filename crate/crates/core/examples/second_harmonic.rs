//! Energies of a frequency doubler in a few small sectors, plus a coupling sweep.

use qes_core::model::Model;
use qes_core::sectors::SectorLabel;
use qes_core::spectral::full_spectrum;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = Model::from_strs(&["1/2"], &["1"], &[2], &[1], 1.0)?;
    for text in ["N=0;M=1", "N=1;M=1", "N=0;M=4"] {
        let sector = SectorLabel::parse(&model, text)?;
        let full = full_spectrum(&model, &sector, 1e-12)?;
        println!("{sector} (dim {}, E0 = {}):", sector.dim(), full.e0);
        for (lambda, total) in full.pairs() {
            println!("  lambda = {lambda:+.12}  E = {total:+.12}");
        }
    }

    println!("\nN=0;M=6 ground energy against g:");
    let sector = SectorLabel::parse(&model, "N=0;M=6")?;
    for k in 0..=5 {
        let g = 0.2 * k as f64;
        let full = full_spectrum(&model.with_coupling(g)?, &sector, 1e-12)?;
        println!("  g = {g:.1}  E_min = {:+.9}", full.total[0]);
    }
    Ok(())
}
