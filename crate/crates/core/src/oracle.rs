//! Brute-force cross-checks on explicit polynomial operators.
//!
//! Everything here works on monomials `x^i y^j` with exact rational
//! coefficients and never uses the closed forms from the other modules, so it
//! can be compared against them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::ToPrimitive;

use crate::matrix::{build_tridiagonal, norm_constants, symmetrize_reduced, TridiagonalH1};
use crate::model::{format_rational, Model, RawModel};
use crate::qes::{reduced_direct, sl2_expansion, sl2_matrix};
use crate::sectors::{
    canonicalize, for_each_monomial, sector_basis, sectors_with_small_offsets, MonomialState, SectorLabel,
};
use crate::spectral::{eigenvalues, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("seed has degree {degree}, above max_photons = {max_photons}")]
    SeedTooLarge { degree: u64, max_photons: u64 },
    #[error("state has {got_x}+{got_y} variables, operator expects {want_x}+{want_y}")]
    DimensionMismatch {
        want_x: usize,
        want_y: usize,
        got_x: usize,
        got_y: usize,
    },
    #[error("state {0} is not an eigenvector of the labelling operators")]
    NotDiagonal(String),
}

/// One normal-ordered term `coeff * x^xpow y^ypow d_x^dxpow d_y^dypow`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyTerm {
    pub coeff: BigRational,
    pub xpow: Vec<u64>,
    pub ypow: Vec<u64>,
    pub dxpow: Vec<u64>,
    pub dypow: Vec<u64>,
}

/// Linear combination of monomials; zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonomialCombo {
    entries: BTreeMap<MonomialState, BigRational>,
}

impl MonomialCombo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(state: MonomialState, coeff: BigRational) -> Self {
        let mut out = Self::new();
        out.add(state, coeff);
        out
    }

    pub fn add(&mut self, state: MonomialState, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.entries.entry(state) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &MonomialCombo, factor: &BigRational) {
        for (state, c) in &other.entries {
            self.add(state.clone(), c * factor);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, state: &MonomialState) -> Option<&BigRational> {
        self.entries.get(state)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MonomialState, &BigRational)> {
        self.entries.iter()
    }
}

impl fmt::Display for MonomialCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(s, c)| format!("{}*[{}]", format_rational(c), s))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

type TermKey = (Vec<u64>, Vec<u64>);

/// Differential operator with polynomial coefficients in normal order
/// (multiplications left of derivatives). Variables are `x_1..x_A` followed
/// by `y_1..y_B` internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyOperator {
    num_x: usize,
    num_y: usize,
    terms: BTreeMap<TermKey, BigRational>,
}

fn falling(p: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(p - i))
}

impl PolyOperator {
    pub fn zero(num_x: usize, num_y: usize) -> Self {
        PolyOperator {
            num_x,
            num_y,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, term: PolyTerm) {
        assert_eq!(term.xpow.len(), self.num_x);
        assert_eq!(term.dxpow.len(), self.num_x);
        assert_eq!(term.ypow.len(), self.num_y);
        assert_eq!(term.dypow.len(), self.num_y);
        let key = ([term.xpow, term.ypow].concat(), [term.dxpow, term.dypow].concat());
        let slot = self.terms.entry(key.clone()).or_insert_with(BigRational::zero);
        *slot += term.coeff;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// `coeff * v d_v` on variable `var` of the concatenated list.
    fn add_euler(&mut self, var: usize, coeff: BigRational) {
        let mut pow = vec![0u64; self.num_x + self.num_y];
        pow[var] = 1;
        let (xpow, ypow) = pow.split_at(self.num_x);
        self.add_term(PolyTerm {
            coeff,
            xpow: xpow.to_vec(),
            ypow: ypow.to_vec(),
            dxpow: xpow.to_vec(),
            dypow: ypow.to_vec(),
        });
    }

    pub fn terms(&self) -> Vec<PolyTerm> {
        self.terms
            .iter()
            .map(|((mult, diff), c)| PolyTerm {
                coeff: c.clone(),
                xpow: mult[..self.num_x].to_vec(),
                ypow: mult[self.num_x..].to_vec(),
                dxpow: diff[..self.num_x].to_vec(),
                dypow: diff[self.num_x..].to_vec(),
            })
            .collect()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn check_state(&self, state: &MonomialState) -> Result<(), OracleError> {
        if state.i.len() != self.num_x || state.j.len() != self.num_y {
            return Err(OracleError::DimensionMismatch {
                want_x: self.num_x,
                want_y: self.num_y,
                got_x: state.i.len(),
                got_y: state.j.len(),
            });
        }
        Ok(())
    }

    /// Exact image of one monomial.
    pub fn apply(&self, state: &MonomialState) -> Result<MonomialCombo, OracleError> {
        self.check_state(state)?;
        let exps: Vec<u64> = state.i.iter().chain(&state.j).copied().collect();
        let mut out = MonomialCombo::new();
        'terms: for ((mult, diff), c) in &self.terms {
            let mut coeff = BigInt::one();
            let mut image = Vec::with_capacity(exps.len());
            for ((&p, &d), &a) in exps.iter().zip(diff).zip(mult) {
                if d > p {
                    continue 'terms;
                }
                coeff *= falling(p, d);
                image.push(p - d + a);
            }
            let j = image.split_off(self.num_x);
            out.add(MonomialState::new(image, j), c * BigRational::from_integer(coeff));
        }
        Ok(out)
    }

    pub fn apply_combo(&self, combo: &MonomialCombo) -> Result<MonomialCombo, OracleError> {
        let mut out = MonomialCombo::new();
        for (state, c) in combo.iter() {
            out.add_scaled(&self.apply(state)?, c);
        }
        Ok(out)
    }

    /// Eigenvalue on `state` if the image is a multiple of it.
    pub fn diagonal_value(&self, state: &MonomialState) -> Result<Option<BigRational>, OracleError> {
        let image = self.apply(state)?;
        Ok(match image.len() {
            0 => Some(BigRational::zero()),
            1 => image.get(state).cloned(),
            _ => None,
        })
    }
}

/// `H0`, `H1` and the integrals `A_l`, `B_k` as explicit operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSet {
    pub h0: PolyOperator,
    pub h1: PolyOperator,
    pub a: Vec<PolyOperator>,
    pub b: Vec<PolyOperator>,
}

impl OperatorSet {
    /// All operators with display names, `H0, H1, A1.., B1..`.
    pub fn named(&self) -> Vec<(String, &PolyOperator)> {
        let mut out = vec![("H0".to_string(), &self.h0), ("H1".to_string(), &self.h1)];
        out.extend(self.a.iter().enumerate().map(|(l, op)| (format!("A{}", l + 1), op)));
        out.extend(self.b.iter().enumerate().map(|(k, op)| (format!("B{}", k + 1), op)));
        out
    }

    /// Every unordered pair of distinct operators.
    pub fn pairs(&self) -> Vec<(String, &PolyOperator, &PolyOperator)> {
        let named = self.named();
        let mut out = Vec::new();
        for (i, (na, a)) in named.iter().enumerate() {
            for (nb, b) in &named[i + 1..] {
                out.push((format!("[{na},{nb}]"), *a, *b));
            }
        }
        out
    }

    /// Values of `H0, A_1.., B_1..` on a monomial, read off the operators.
    pub fn labels(&self, state: &MonomialState) -> Result<Vec<BigRational>, OracleError> {
        std::iter::once(&self.h0)
            .chain(&self.a)
            .chain(&self.b)
            .map(|op| {
                op.diagonal_value(state)?
                    .ok_or_else(|| OracleError::NotDiagonal(state.to_string()))
            })
            .collect()
    }
}

pub fn build_operators(model: &Model) -> OperatorSet {
    build_operators_raw(&RawModel::from(model))
}

/// Same construction without validating the model, so that models violating
/// the resonance constraint can be examined.
pub fn build_operators_raw(raw: &RawModel) -> OperatorSet {
    let (na, nb) = (raw.n.len(), raw.m.len());
    let mut h0 = PolyOperator::zero(na, nb);
    for (l, nu) in raw.nu.iter().enumerate() {
        h0.add_euler(l, nu.clone());
    }
    for (k, mu) in raw.mu.iter().enumerate() {
        h0.add_euler(na + k, mu.clone());
    }

    let n: Vec<u64> = raw.n.iter().map(|&v| v as u64).collect();
    let m: Vec<u64> = raw.m.iter().map(|&v| v as u64).collect();
    let mut h1 = PolyOperator::zero(na, nb);
    h1.add_term(PolyTerm {
        coeff: BigRational::one(),
        xpow: vec![0; na],
        ypow: m.clone(),
        dxpow: n.clone(),
        dypow: vec![0; nb],
    });
    h1.add_term(PolyTerm {
        coeff: BigRational::one(),
        xpow: n.clone(),
        ypow: vec![0; nb],
        dxpow: vec![0; na],
        dypow: m.clone(),
    });

    let int = |v: u64| BigRational::from_integer(BigInt::from(v));
    let a = (0..na.saturating_sub(1))
        .map(|l| {
            let mut op = PolyOperator::zero(na, nb);
            op.add_euler(l, int(n[l + 1]));
            op.add_euler(l + 1, -int(n[l]));
            op
        })
        .collect();
    let b = (0..nb.saturating_sub(1))
        .map(|k| {
            let mut op = PolyOperator::zero(na, nb);
            op.add_euler(na + k, int(m[k + 1]));
            op.add_euler(na + k + 1, -int(m[k]));
            op
        })
        .collect();
    OperatorSet { h0, h1, a, b }
}

/// A probe on which a commutator does not vanish.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub state: String,
    pub residual: String,
}

/// `[A, B]` applied to each probe; the first non-zero image is the witness.
pub fn commutator_check(
    a: &PolyOperator,
    b: &PolyOperator,
    probes: &[MonomialState],
) -> Result<Option<Witness>, OracleError> {
    for state in probes {
        let ab = a.apply_combo(&b.apply(state)?)?;
        let ba = b.apply_combo(&a.apply(state)?)?;
        let mut residual = ab;
        residual.add_scaled(&ba, &-BigRational::one());
        if !residual.is_zero() {
            return Ok(Some(Witness {
                state: state.to_string(),
                residual: residual.to_string(),
            }));
        }
    }
    Ok(None)
}

pub const PROBE_COUNT: usize = 50;
pub const PROBE_MAX_EXPONENT: u64 = 30;

/// Monomials with exponents uniform in `0..=max_exponent`, reproducible from `seed`.
pub fn random_probes(
    num_x: usize,
    num_y: usize,
    count: usize,
    max_exponent: u64,
    seed: u64,
) -> Vec<MonomialState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let i = (0..num_x).map(|_| rng.gen_range(0..=max_exponent)).collect();
            let j = (0..num_y).map(|_| rng.gen_range(0..=max_exponent)).collect();
            MonomialState::new(i, j)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<Witness>,
}

/// Every pair of the operator set on the same probe list.
pub fn commutation_suite(ops: &OperatorSet, probes: &[MonomialState]) -> Result<Vec<CheckResult>, OracleError> {
    ops.pairs()
        .into_iter()
        .map(|(name, a, b)| {
            let witness = commutator_check(a, b, probes)?;
            Ok(CheckResult {
                name,
                passed: witness.is_none(),
                detail: format!("{} probes", probes.len()),
                witness,
            })
        })
        .collect()
}

/// Orthonormal-basis matrix element stored as a sign and an exact square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedSquare {
    pub negative: bool,
    pub square: BigRational,
}

impl SignedSquare {
    pub fn zero() -> Self {
        SignedSquare {
            negative: false,
            square: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.square.is_zero()
    }
}

/// States of one common eigenspace and the `H1` matrix between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBlock {
    pub labels: Vec<BigRational>,
    pub states: Vec<MonomialState>,
    /// `elements[u][v] = <u| H1 |v>`.
    pub elements: Vec<Vec<SignedSquare>>,
    /// Images of block states that fall outside the block but within the
    /// degree bound. Always empty for a model where the labels are conserved.
    pub leaks: Vec<MonomialState>,
    /// Whether some image exceeded the degree bound.
    pub truncated: bool,
}

impl FockBlock {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Squares on the first off-diagonal when the block is tridiagonal with
    /// zero diagonal and a symmetric pattern, `None` otherwise.
    pub fn tridiagonal_squares(&self) -> Option<Vec<BigRational>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        for u in 0..n {
            for v in 0..n {
                let e = &self.elements[u][v];
                let adjacent = u + 1 == v || v + 1 == u;
                if !adjacent && !e.is_zero() {
                    return None;
                }
                if adjacent && *e != self.elements[v][u] {
                    return None;
                }
            }
            if u + 1 < n {
                out.push(self.elements[u + 1][u].square.clone());
            }
        }
        Some(out)
    }

    /// Exact comparison with the builder's squared couplings.
    pub fn matches(&self, matrix: &TridiagonalH1) -> bool {
        match self.tridiagonal_squares() {
            Some(sq) => {
                sq.len() == matrix.offdiag_sq().len()
                    && sq.iter().zip(matrix.offdiag_sq()).all(|(a, b)| {
                        a.is_integer() && a.numer() == &BigInt::from(b.clone())
                    })
            }
            None => false,
        }
    }
}

fn factorial_table(max: u64) -> Vec<BigUint> {
    let mut out = vec![BigUint::one()];
    for k in 1..=max {
        let next = out.last().unwrap() * BigUint::from(k);
        out.push(next);
    }
    out
}

fn state_factorial(state: &MonomialState, table: &[BigUint]) -> BigUint {
    state
        .i
        .iter()
        .chain(&state.j)
        .fold(BigUint::one(), |acc, &p| acc * &table[p as usize])
}

fn sort_states(states: &mut [MonomialState]) {
    states.sort_by(|a, b| a.a_degree().cmp(&b.a_degree()).then_with(|| a.cmp(b)));
}

/// `H1` in the orthonormal Fock basis `x^u / sqrt(u!)` on `states`.
pub fn fock_block(
    ops: &OperatorSet,
    labels: Vec<BigRational>,
    mut states: Vec<MonomialState>,
    max_photons: u64,
) -> Result<FockBlock, OracleError> {
    sort_states(&mut states);
    let index: BTreeMap<&MonomialState, usize> = states.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let mut max_exp = 0;
    let mut images = Vec::with_capacity(states.len());
    for s in &states {
        let image = ops.h1.apply(s)?;
        for (t, _) in image.iter() {
            max_exp = max_exp.max(t.i.iter().chain(&t.j).copied().max().unwrap_or(0));
        }
        max_exp = max_exp.max(s.i.iter().chain(&s.j).copied().max().unwrap_or(0));
        images.push(image);
    }
    let table = factorial_table(max_exp);
    let n = states.len();
    let mut elements = vec![vec![SignedSquare::zero(); n]; n];
    let mut leaks = Vec::new();
    let mut truncated = false;
    for (v, image) in images.iter().enumerate() {
        let v_fact = state_factorial(&states[v], &table);
        for (target, c) in image.iter() {
            match index.get(target) {
                Some(&u) => {
                    let ratio = BigRational::new(
                        BigInt::from(state_factorial(target, &table)),
                        BigInt::from(v_fact.clone()),
                    );
                    elements[u][v] = SignedSquare {
                        negative: c.is_negative(),
                        square: c * c * ratio,
                    };
                }
                None if target.degree() > max_photons => truncated = true,
                None => leaks.push(target.clone()),
            }
        }
    }
    Ok(FockBlock {
        labels,
        states,
        elements,
        leaks,
        truncated,
    })
}

/// Groups every monomial of degree `<= max_photons` by its operator labels.
pub fn scan_labels(
    ops: &OperatorSet,
    max_photons: u64,
) -> Result<BTreeMap<Vec<BigRational>, Vec<MonomialState>>, OracleError> {
    let mut groups: BTreeMap<Vec<BigRational>, Vec<MonomialState>> = BTreeMap::new();
    let mut error = None;
    let (na, nb) = (ops.h0.num_x, ops.h0.num_y);
    let shape = MonomialState::new(vec![0; na], vec![0; nb]);
    let vars = na + nb;
    crate::sectors::for_each_exponent_vector(vars, max_photons, |exps| {
        if error.is_some() {
            return;
        }
        let state = MonomialState::new(exps[..shape.i.len()].to_vec(), exps[shape.i.len()..].to_vec());
        match ops.labels(&state) {
            Ok(labels) => groups.entry(labels).or_default().push(state),
            Err(e) => error = Some(e),
        }
    });
    match error {
        Some(e) => Err(e),
        None => Ok(groups),
    }
}

/// All common eigenspaces found in the degree window, with their matrices.
pub fn brute_force_blocks(model: &Model, max_photons: u64) -> Result<Vec<FockBlock>, OracleError> {
    let ops = build_operators(model);
    scan_labels(&ops, max_photons)?
        .into_iter()
        .map(|(labels, states)| fock_block(&ops, labels, states, max_photons))
        .collect()
}

/// The eigenspace containing `seed`, found by scanning all monomials of
/// degree `<= max_photons`.
pub fn brute_force_sector(
    model: &Model,
    seed: &MonomialState,
    max_photons: u64,
) -> Result<FockBlock, OracleError> {
    if seed.degree() > max_photons {
        return Err(OracleError::SeedTooLarge {
            degree: seed.degree(),
            max_photons,
        });
    }
    let ops = build_operators(model);
    let labels = ops.labels(seed)?;
    let mut states = Vec::new();
    let mut error = None;
    for_each_monomial(model, max_photons, |state| {
        if error.is_some() {
            return;
        }
        match ops.labels(&state) {
            Ok(l) if l == labels => states.push(state),
            Ok(_) => {}
            Err(e) => error = Some(e),
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    fock_block(&ops, labels, states, max_photons)
}

/// One oracle block per sector, in the same order, from a single scan up to
/// the largest degree any of the sectors reaches.
pub fn oracle_blocks_for(model: &Model, sectors: &[SectorLabel]) -> Result<Vec<FockBlock>, OracleError> {
    let ops = build_operators(model);
    let max_photons = sectors
        .iter()
        .map(|s| s.member(model, 0).degree().max(s.member(model, s.r()).degree()))
        .max()
        .unwrap_or(0);
    let mut groups = scan_labels(&ops, max_photons)?;
    sectors
        .iter()
        .map(|sector| {
            let labels = ops.labels(&sector.member(model, 0))?;
            let states = groups.get(&labels).cloned().unwrap_or_default();
            groups.entry(labels.clone()).or_default();
            fock_block(&ops, labels, states, max_photons)
        })
        .collect()
}

/// Eigenvalues of a block's float matrix by a dense symmetric solver.
pub fn fock_dense_eigenvalues(block: &FockBlock) -> Vec<f64> {
    let n = block.dim();
    let m = DMatrix::from_fn(n, n, |u, v| {
        let e = &block.elements[u][v];
        let mag = e.square.to_f64().unwrap_or(f64::NAN).sqrt();
        if e.negative {
            -mag
        } else {
            mag
        }
    });
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Every common eigenspace up to `max_photons` must be exactly the
/// truncated basis of the sector containing its first state.
pub fn completeness_check(model: &Model, max_photons: u64) -> Result<CheckResult, OracleError> {
    let blocks = brute_force_blocks(model, max_photons)?;
    let mut failure = None;
    for block in &blocks {
        let sector = canonicalize(model, &block.states[0]).expect("oracle states match the model");
        let expected: Vec<MonomialState> = sector_basis(model, &sector)
            .expect("canonical sectors are valid")
            .into_iter()
            .filter(|s| s.degree() <= max_photons)
            .collect();
        if expected != block.states {
            failure = Some(Witness {
                state: block.states[0].to_string(),
                residual: format!(
                    "eigenspace has {} states, sector {} has {} within the window",
                    block.dim(),
                    sector,
                    expected.len()
                ),
            });
            break;
        }
    }
    Ok(CheckResult {
        name: "completeness".into(),
        passed: failure.is_none(),
        detail: format!("{} eigenspaces up to {} photons", blocks.len(), max_photons),
        witness: failure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub max_r: u64,
    pub max_photons: u64,
    pub seed: u64,
    pub probes: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            max_r: 10,
            max_photons: 12,
            seed: 0,
            probes: PROBE_COUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub model: String,
    pub max_r: u64,
    pub max_photons: u64,
    pub seed: u64,
    pub sectors: usize,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

fn sector_check(
    name: &str,
    sectors: &[SectorLabel],
    mut ok: impl FnMut(usize, &SectorLabel) -> Result<bool, String>,
) -> CheckResult {
    let mut witness = None;
    for (idx, sector) in sectors.iter().enumerate() {
        let outcome = ok(idx, sector);
        if outcome != Ok(true) {
            witness = Some(Witness {
                state: sector.to_string(),
                residual: outcome.err().unwrap_or_else(|| "mismatch".into()),
            });
            break;
        }
    }
    CheckResult {
        name: name.into(),
        passed: witness.is_none(),
        detail: format!("{} sectors", sectors.len()),
        witness,
    }
}

/// Runs every cross-check on sectors with `r <= max_r` (the family of
/// [`sectors_with_small_offsets`] with offset 1).
pub fn verify_model(model: &Model, opts: &SuiteOptions) -> Result<VerifyReport, OracleError> {
    let ops = build_operators(model);
    let probes = random_probes(model.num_a(), model.num_b(), opts.probes, PROBE_MAX_EXPONENT, opts.seed);
    let mut checks = commutation_suite(&ops, &probes)?;

    let sectors = sectors_with_small_offsets(model, opts.max_r, 1);
    let blocks = oracle_blocks_for(model, &sectors)?;
    let tridiagonals: Vec<Result<TridiagonalH1, String>> = sectors
        .iter()
        .map(|s| build_tridiagonal(model, s).map_err(|e| e.to_string()))
        .collect();

    checks.push(sector_check("sector-invariance", &sectors, |i, _| {
        Ok(blocks[i].leaks.is_empty() && !blocks[i].truncated)
    }));
    checks.push(sector_check("basis", &sectors, |i, s| {
        Ok(sector_basis(model, s).map_err(|e| e.to_string())? == blocks[i].states)
    }));
    checks.push(sector_check("oracle-matrix", &sectors, |i, _| {
        Ok(blocks[i].matches(tridiagonals[i].as_ref().map_err(Clone::clone)?))
    }));
    checks.push(sector_check("sl2-equals-direct", &sectors, |_, s| {
        let direct = reduced_direct(model, s).map_err(|e| e.to_string())?;
        let terms = sl2_expansion(model, s).map_err(|e| e.to_string())?;
        let via = sl2_matrix(&terms, s.r()).map_err(|e| e.to_string())?;
        Ok(via.same_matrix(&direct))
    }));
    checks.push(sector_check("similarity", &sectors, |i, s| {
        let direct = reduced_direct(model, s).map_err(|e| e.to_string())?;
        let c = norm_constants(model, s).map_err(|e| e.to_string())?;
        let sym = symmetrize_reduced(&direct, &c).map_err(|e| e.to_string())?;
        Ok(&sym == tridiagonals[i].as_ref().map_err(Clone::clone)?)
    }));
    checks.push(sector_check("dense-spectrum", &sectors, |i, _| {
        let tri = tridiagonals[i].as_ref().map_err(Clone::clone)?;
        let spectrum = eigenvalues(tri, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let dense = fock_dense_eigenvalues(&blocks[i]);
        let limit = 1e-9 * spectrum.norm_inf.max(1.0);
        let dev = dense
            .iter()
            .zip(&spectrum.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if spectrum.scale_log2 != 0 || dense.len() != spectrum.dim() || dev > limit {
            return Err(format!("deviation {dev:e}, limit {limit:e}"));
        }
        Ok(true)
    }));
    checks.push(completeness_check(model, opts.max_photons)?);

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        model: model.kind().to_string(),
        max_r: opts.max_r,
        max_photons: opts.max_photons,
        seed: opts.seed,
        sectors: sectors.len(),
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shg() -> Model {
        Model::from_strs(&["1/2"], &["1"], &[2], &[1], 1.0).unwrap()
    }

    fn cascade() -> Model {
        Model::from_strs(&["1", "2"], &["3"], &[1, 1], &[1], 1.0).unwrap()
    }

    fn st(text: &str) -> MonomialState {
        text.parse().unwrap()
    }

    fn q(text: &str) -> BigRational {
        crate::model::parse_rational(text).unwrap()
    }

    #[test]
    fn operator_shapes() {
        let ops = build_operators(&shg());
        assert_eq!(ops.h1.num_terms(), 2);
        let terms = ops.h1.terms();
        assert!(terms.iter().any(|t| t.ypow == [1] && t.dxpow == [2]));
        assert!(terms.iter().any(|t| t.xpow == [2] && t.dypow == [1]));
        assert!(ops.a.is_empty() && ops.b.is_empty());

        let ops = build_operators(&cascade());
        assert_eq!(ops.a.len(), 1);
        let a1 = ops.a[0].terms();
        assert_eq!(a1.len(), 2);
        assert!(a1.iter().any(|t| t.coeff == q("1") && t.xpow == [1, 0] && t.dxpow == [1, 0]));
        assert!(a1.iter().any(|t| t.coeff == q("-1") && t.xpow == [0, 1] && t.dxpow == [0, 1]));
    }

    #[test]
    fn applying_h1() {
        let ops = build_operators(&shg());
        let image = ops.h1.apply(&st("i=4;j=0")).unwrap();
        assert_eq!(image.len(), 1);
        assert_eq!(image.get(&st("i=2;j=1")), Some(&q("12")));
        let image = ops.h1.apply(&st("i=0;j=2")).unwrap();
        assert_eq!(image.get(&st("i=2;j=1")), Some(&q("2")));
        assert!(ops.h1.apply(&st("i=1;j=0")).unwrap().is_zero());
        assert!(matches!(
            ops.h1.apply(&st("i=1,1;j=0")),
            Err(OracleError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn h0_reproduces_sector_energy() {
        for model in [shg(), cascade()] {
            let ops = build_operators(&model);
            for_each_monomial(&model, 6, |state| {
                let e = ops.h0.diagonal_value(&state).unwrap().unwrap();
                let want = crate::sectors::quantum_numbers(&model, &state).unwrap().e0;
                assert_eq!(e, want);
            });
        }
    }

    #[test]
    fn commutators_vanish_for_valid_models() {
        for model in [shg(), cascade()] {
            let ops = build_operators(&model);
            let probes = random_probes(model.num_a(), model.num_b(), 10, PROBE_MAX_EXPONENT, 0);
            for check in commutation_suite(&ops, &probes).unwrap() {
                assert!(check.passed, "{}", check.name);
            }
        }
    }

    #[test]
    fn broken_constraint_gives_witness() {
        let raw = RawModel::from_strs(&["1"], &["1"], &[2], &[1], 1.0);
        let ops = build_operators_raw(&raw);
        let w = commutator_check(&ops.h0, &ops.h1, &[st("i=2;j=0")]).unwrap().unwrap();
        assert_eq!(w.state, "i=2;j=0");
        assert_eq!(w.residual, "-2*[i=0;j=1]");
    }

    #[test]
    fn probes_are_reproducible() {
        let a = random_probes(2, 1, 50, 30, 7);
        assert_eq!(a, random_probes(2, 1, 50, 30, 7));
        assert_ne!(a, random_probes(2, 1, 50, 30, 8));
        assert!(a.iter().all(|s| s.i.iter().chain(&s.j).all(|&e| e <= 30)));
    }

    #[test]
    fn brute_force_shg_sector() {
        let model = shg();
        let block = brute_force_sector(&model, &st("i=4;j=0"), 6).unwrap();
        assert_eq!(block.states, vec![st("i=0;j=2"), st("i=2;j=1"), st("i=4;j=0")]);
        assert_eq!(block.tridiagonal_squares().unwrap(), vec![q("4"), q("12")]);
        assert!(block.leaks.is_empty() && !block.truncated);
        let sector = SectorLabel::parse(&model, "N=0;M=2").unwrap();
        assert!(block.matches(&build_tridiagonal(&model, &sector).unwrap()));

        let vacuum = brute_force_sector(&model, &MonomialState::vacuum(&model), 6).unwrap();
        assert_eq!(vacuum.dim(), 1);
        assert!(vacuum.elements[0][0].is_zero());

        assert!(matches!(
            brute_force_sector(&model, &st("i=7;j=0"), 6),
            Err(OracleError::SeedTooLarge { .. })
        ));
    }

    #[test]
    fn brute_force_cascade_sector() {
        let block = brute_force_sector(&cascade(), &st("i=1,1;j=0"), 3).unwrap();
        assert_eq!(block.states, vec![st("i=0,0;j=1"), st("i=1,1;j=0")]);
        assert_eq!(block.tridiagonal_squares().unwrap(), vec![q("1")]);
    }

    #[test]
    fn truncation_is_reported() {
        let block = brute_force_sector(&shg(), &st("i=0;j=2"), 3).unwrap();
        assert!(block.truncated);
        assert_eq!(block.states, vec![st("i=0;j=2"), st("i=2;j=1")]);
    }

    #[test]
    fn blocks_partition_the_window() {
        let model = cascade();
        let blocks = brute_force_blocks(&model, 5).unwrap();
        let total: usize = blocks.iter().map(FockBlock::dim).sum();
        let mut count = 0;
        for_each_monomial(&model, 5, |_| count += 1);
        assert_eq!(total, count);
        assert!(blocks.iter().all(|b| b.leaks.is_empty()));
    }

    #[test]
    fn dense_block_spectrum() {
        let block = brute_force_sector(&shg(), &st("i=0;j=2"), 6).unwrap();
        let v = fock_dense_eigenvalues(&block);
        for (got, want) in v.iter().zip([-4.0, 0.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn verify_small_models() {
        let opts = SuiteOptions {
            max_r: 4,
            max_photons: 8,
            probes: 5,
            ..SuiteOptions::default()
        };
        for model in [shg(), cascade()] {
            let report = verify_model(&model, &opts).unwrap();
            assert!(report.passed, "{report:?}");
            assert!(report.sectors > 0);
        }
    }

    #[test]
    fn degenerate_exponents_break_completeness() {
        // n = m = 2 shares labels between distinct sectors
        let model = Model::from_strs(&["1"], &["1"], &[2], &[2], 1.0).unwrap();
        assert_eq!(model.exponent_gcd(), 2);
        assert!(!completeness_check(&model, 6).unwrap().passed);
    }
}
