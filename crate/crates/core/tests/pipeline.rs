use qes_core::matrix::{build_tridiagonal, TridiagonalH1};
use qes_core::model::Model;
use qes_core::oracle::{brute_force_sector, fock_dense_eigenvalues};
use qes_core::sectors::{canonicalize, enumerate_sectors, MonomialState};
use qes_core::spectral::{eigenvalues, full_spectrum, poly_spectrum};

fn general() -> Model {
    serde_json::from_str(r#"{"nu":["1","1"],"mu":["1"],"n":[2,1],"m":[3],"g":0.25}"#).unwrap()
}

#[test]
fn monomial_to_energies() {
    let model = general();
    let seed = MonomialState::new(vec![4, 2], vec![1]);
    let sector = canonicalize(&model, &seed).unwrap();
    let full = full_spectrum(&model, &sector, 1e-12).unwrap();
    assert_eq!(full.total.len(), sector.dim());

    // the same block, rebuilt from scratch and diagonalized densely
    let block = brute_force_sector(&model, &seed, seed.degree().max(20)).unwrap();
    assert!(!block.truncated);
    let dense = fock_dense_eigenvalues(&block);
    let e0: f64 = full.e0.parse().unwrap();
    for (lambda, total) in dense.iter().zip(&full.total) {
        assert!((e0 + model.g() * lambda - total).abs() < 1e-9);
    }
}

#[test]
fn sectors_dimensions_add_up() {
    // every monomial of degree <= B lies in exactly one sector; each sector
    // of r contributes its members within the window
    let model = general();
    let b = 9;
    let mut count = 0u64;
    qes_core::sectors::for_each_monomial(&model, b, |_| count += 1);
    let members: u64 = enumerate_sectors(&model, b)
        .iter()
        .map(|s| (0..=s.r()).filter(|&k| s.member(&model, k).degree() <= b).count() as u64)
        .sum();
    assert_eq!(members, count);
}

#[test]
fn matrix_json_round_trip_keeps_spectrum() {
    let model = general();
    let sector = canonicalize(&model, &MonomialState::new(vec![0, 1], vec![12])).unwrap();
    let matrix = build_tridiagonal(&model, &sector).unwrap();
    let text = serde_json::to_string(&matrix).unwrap();
    let back: TridiagonalH1 = serde_json::from_str(&text).unwrap();
    assert_eq!(back, matrix);
    assert_eq!(eigenvalues(&back, 1e-12).unwrap(), eigenvalues(&matrix, 1e-12).unwrap());
}

#[test]
fn squared_spectrum_pairs_up() {
    let model = general();
    let sector = canonicalize(&model, &MonomialState::new(vec![1, 0], vec![9])).unwrap();
    let matrix = build_tridiagonal(&model, &sector).unwrap();
    let sq = poly_spectrum(&matrix, &[0.0, 0.0, 1.0], 1e-12).unwrap();
    // +-lambda pairs give equal squares; an odd dimension adds one zero
    let start = sq.len() % 2;
    for pair in sq[start..].chunks(2) {
        assert!((pair[0] - pair[1]).abs() <= 1e-9 * pair[1].max(1.0));
    }
}
