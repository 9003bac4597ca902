//! Spectrum of large second-harmonic sectors by Sturm bisection.
//!
//! cargo run --release --example large_sector_spectrum -- 10000

use std::time::Instant;

use qes_core::matrix::build_tridiagonal;
use qes_core::model::Model;
use qes_core::sectors::SectorLabel;
use qes_core::spectral::{eigenvalues, sturm_count, DEFAULT_TOL};

fn main() {
    let r: u64 = std::env::args().nth(1).map_or(1000, |a| a.parse().expect("r must be an integer"));
    let model = Model::from_strs(&["1/2"], &["1"], &[2], &[1], 1.0).unwrap();
    let sector = SectorLabel::new(&model, vec![0], vec![r]).unwrap();

    let start = Instant::now();
    let matrix = build_tridiagonal(&model, &sector).unwrap();
    let built = start.elapsed();
    let spectrum = eigenvalues(&matrix, DEFAULT_TOL).unwrap();
    let solved = start.elapsed() - built;

    let bound = matrix.norm_inf() + 1.0;
    println!("sector {sector}, dim {}", matrix.dim());
    println!("||H1||_inf          {:.6e}", spectrum.norm_inf);
    println!("count below bound   {}", sturm_count(&matrix, bound));
    println!("lowest, highest     {:.12e}, {:.12e}", spectrum.eigenvalues[0], spectrum.eigenvalues[matrix.dim() - 1]);
    println!("min gap             {:.6e}", spectrum.min_gap());
    println!("certified width     {:.6e}", spectrum.certified_width);
    println!("symmetry defect     {:.6e}", spectrum.symmetry_defect());
    match spectrum.crosscheck_deviation {
        Some(d) => println!("dense QL deviation  {d:.6e}"),
        None => println!("dense QL deviation  (skipped above dim 2000)"),
    }
    println!("build {built:?}, solve {solved:?}");
}
