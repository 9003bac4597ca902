//! Invariant sectors of the unperturbed integrals of motion.
//!
//! In the Bargmann picture every monomial `x^i y^j` is a joint eigenfunction
//! of `H0`, `A_l` and `B_k`. The joint eigenspaces are spanned by
//! `x^N y^M zeta^s`, `s = 0..=r`, with `zeta = x^n / y^m`; a sector is named
//! by the minimal x-exponents `N` and maximal y-exponents `M`, subject to
//! `N_l < n_l` for at least one `l`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Model;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SectorError {
    #[error("dimension mismatch: model has N={model_n}, M={model_m} but got {got_n}, {got_m}")]
    DimensionMismatch {
        model_n: usize,
        model_m: usize,
        got_n: usize,
        got_m: usize,
    },
    #[error("exponent shift produced a negative power (internal error)")]
    NegativeExponent,
    #[error("invalid sector: {0}")]
    InvalidSector(String),
    #[error("cannot parse `{text}`: {reason}")]
    Parse { text: String, reason: &'static str },
}

/// Exponents of a Bargmann monomial `x^i y^j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MonomialState {
    pub i: Vec<u64>,
    pub j: Vec<u64>,
}

impl MonomialState {
    pub fn new(i: Vec<u64>, j: Vec<u64>) -> Self {
        MonomialState { i, j }
    }

    pub fn vacuum(model: &Model) -> Self {
        MonomialState {
            i: vec![0; model.num_a()],
            j: vec![0; model.num_b()],
        }
    }

    /// Total photon number `sum i + sum j`.
    pub fn degree(&self) -> u64 {
        self.i.iter().chain(&self.j).sum()
    }

    /// Total a-photon number `sum i`.
    pub fn a_degree(&self) -> u64 {
        self.i.iter().sum()
    }

    fn check(&self, model: &Model) -> Result<(), SectorError> {
        if self.i.len() != model.num_a() || self.j.len() != model.num_b() {
            return Err(SectorError::DimensionMismatch {
                model_n: model.num_a(),
                model_m: model.num_b(),
                got_n: self.i.len(),
                got_m: self.j.len(),
            });
        }
        Ok(())
    }
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

/// Parses `"<a>=1,2;<b>=3"` into the two integer groups.
fn parse_groups(
    text: &str,
    first: &str,
    second: &str,
) -> Result<(Vec<u64>, Vec<u64>), SectorError> {
    let err = |reason| SectorError::Parse {
        text: text.to_string(),
        reason,
    };
    let (a, b) = text.trim().split_once(';').ok_or(err("expected two groups separated by ';'"))?;
    let group = |part: &str, key: &str| -> Result<Vec<u64>, SectorError> {
        let (k, v) = part.trim().split_once('=').ok_or(err("expected `key=values`"))?;
        if k.trim() != key {
            return Err(err("unexpected group name"));
        }
        v.split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| err("expected nonnegative integers")))
            .collect()
    };
    Ok((group(a, first)?, group(b, second)?))
}

impl fmt::Display for MonomialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i={};j={}", join(&self.i), join(&self.j))
    }
}

impl FromStr for MonomialState {
    type Err = SectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (i, j) = parse_groups(s, "i", "j")?;
        Ok(MonomialState { i, j })
    }
}

/// Eigenvalues of `H0`, `A_l`, `B_k` on a monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantumNumbers {
    pub e0: BigRational,
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
}

pub fn quantum_numbers(model: &Model, state: &MonomialState) -> Result<QuantumNumbers, SectorError> {
    state.check(model)?;
    let weigh = |exps: &[u64], freqs: &[BigRational]| {
        exps.iter().zip(freqs).fold(BigRational::zero(), |acc, (&e, f)| {
            acc + f * BigRational::from_integer(BigInt::from(e))
        })
    };
    let e0 = weigh(&state.i, model.nu()) + weigh(&state.j, model.mu());
    let pairs = |exps: &[u64], weights: &[u32]| -> Vec<i64> {
        (0..exps.len().saturating_sub(1))
            .map(|l| {
                weights[l + 1] as i64 * exps[l] as i64 - weights[l] as i64 * exps[l + 1] as i64
            })
            .collect()
    };
    Ok(QuantumNumbers {
        e0,
        alpha: pairs(&state.i, model.n()),
        beta: pairs(&state.j, model.m()),
    })
}

/// Canonical name of an invariant sector `S^N_M` together with its derived
/// `r` (the sector has dimension `r + 1`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorLabel {
    nvec: Vec<u64>,
    mvec: Vec<u64>,
    r: u64,
}

fn sector_r(model: &Model, mvec: &[u64]) -> u64 {
    mvec.iter()
        .zip(model.m())
        .map(|(&mk, &m)| mk / m as u64)
        .min()
        .expect("M >= 1")
}

impl SectorLabel {
    /// Builds a label, checking dimensions and that `N_l < n_l` for some `l`.
    pub fn new(model: &Model, nvec: Vec<u64>, mvec: Vec<u64>) -> Result<Self, SectorError> {
        MonomialState::new(nvec.clone(), mvec.clone()).check(model)?;
        if !nvec.iter().zip(model.n()).any(|(&nl, &n)| nl < n as u64) {
            return Err(SectorError::InvalidSector(format!(
                "N={} has no component below its exponent n={:?}",
                join(&nvec),
                model.n()
            )));
        }
        let r = sector_r(model, &mvec);
        Ok(SectorLabel { nvec, mvec, r })
    }

    /// Parses the textual form `"N=0,0;M=1"` for the given model.
    pub fn parse(model: &Model, text: &str) -> Result<Self, SectorError> {
        let (nvec, mvec) = parse_groups(text, "N", "M")?;
        SectorLabel::new(model, nvec, mvec)
    }

    pub fn nvec(&self) -> &[u64] {
        &self.nvec
    }

    pub fn mvec(&self) -> &[u64] {
        &self.mvec
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.r as usize + 1
    }

    /// Re-checks the label against `model`; labels are only meaningful for the
    /// model they were built with.
    pub fn check(&self, model: &Model) -> Result<(), SectorError> {
        let fresh = SectorLabel::new(model, self.nvec.clone(), self.mvec.clone())?;
        if fresh.r != self.r {
            return Err(SectorError::InvalidSector(format!(
                "stored r={} but model gives r={}",
                self.r, fresh.r
            )));
        }
        Ok(())
    }

    /// The basis monomial `x^(N + s n) y^(M - s m)`, `0 <= s <= r`.
    pub fn member(&self, model: &Model, s: u64) -> MonomialState {
        debug_assert!(s <= self.r);
        MonomialState {
            i: self.nvec.iter().zip(model.n()).map(|(&nl, &n)| nl + s * n as u64).collect(),
            j: self.mvec.iter().zip(model.m()).map(|(&mk, &m)| mk - s * m as u64).collect(),
        }
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={};M={}", join(&self.nvec), join(&self.mvec))
    }
}

/// Maps any monomial to the label of the sector containing it.
pub fn canonicalize(model: &Model, state: &MonomialState) -> Result<SectorLabel, SectorError> {
    state.check(model)?;
    // s0 = max_l(-floor(p_l / n_l)) <= 0; `shift` is -s0.
    let shift = state
        .i
        .iter()
        .zip(model.n())
        .map(|(&p, &n)| p / n as u64)
        .min()
        .expect("N >= 1");
    let nvec = state
        .i
        .iter()
        .zip(model.n())
        .map(|(&p, &n)| p.checked_sub(shift * n as u64).ok_or(SectorError::NegativeExponent))
        .collect::<Result<Vec<_>, _>>()?;
    let mvec = state
        .j
        .iter()
        .zip(model.m())
        .map(|(&q, &m)| {
            shift
                .checked_mul(m as u64)
                .and_then(|d| q.checked_add(d))
                .ok_or(SectorError::NegativeExponent)
        })
        .collect::<Result<Vec<_>, _>>()?;
    SectorLabel::new(model, nvec, mvec)
}

/// The `r + 1` monomials spanning the sector, in ascending powers of zeta.
pub fn sector_basis(model: &Model, sector: &SectorLabel) -> Result<Vec<MonomialState>, SectorError> {
    sector.check(model)?;
    Ok((0..=sector.r).map(|s| sector.member(model, s)).collect())
}

/// Calls `f` on every exponent vector of length `vars` with entry sum at most
/// `max_degree`, in lexicographic order.
pub fn for_each_exponent_vector(vars: usize, max_degree: u64, mut f: impl FnMut(&[u64])) {
    fn rec(buf: &mut Vec<u64>, pos: usize, budget: u64, f: &mut impl FnMut(&[u64])) {
        if pos == buf.len() {
            f(buf);
            return;
        }
        for e in 0..=budget {
            buf[pos] = e;
            rec(buf, pos + 1, budget - e, f);
        }
        buf[pos] = 0;
    }
    let mut buf = vec![0; vars];
    rec(&mut buf, 0, max_degree, &mut f);
}

/// Calls `f` on every monomial of `model` with total degree at most `max_degree`.
pub fn for_each_monomial(model: &Model, max_degree: u64, mut f: impl FnMut(MonomialState)) {
    let (na, nb) = (model.num_a(), model.num_b());
    for_each_exponent_vector(na + nb, max_degree, |v| {
        f(MonomialState::new(v[..na].to_vec(), v[na..].to_vec()))
    });
}

/// All sectors having at least one basis monomial with at most `max_photons`
/// photons, sorted lexicographically by `(N, M)`.
pub fn enumerate_sectors(model: &Model, max_photons: u64) -> Vec<SectorLabel> {
    let mut seen = BTreeSet::new();
    for_each_monomial(model, max_photons, |state| {
        let label = canonicalize(model, &state).expect("enumerated state matches model");
        seen.insert(label);
    });
    seen.into_iter().collect()
}

/// Sectors with `r <= max_r` and small offsets: every `N_l <= offset` and
/// every `M_k - m_k r <= m_k - 1 + offset`. For a single b-mode with `m = 1`
/// and `N = 1`, this is every sector with `r <= max_r`.
pub fn sectors_with_small_offsets(model: &Model, max_r: u64, offset: u64) -> Vec<SectorLabel> {
    let mut out = BTreeSet::new();
    let na = model.num_a();
    for r in 0..=max_r {
        let mut nvecs = Vec::new();
        for_each_box(na, offset, |v| nvecs.push(v.to_vec()));
        let mut mextra = Vec::new();
        let bounds: Vec<u64> = model.m().iter().map(|&m| m as u64 - 1 + offset).collect();
        for_each_bounded(&bounds, |v| mextra.push(v.to_vec()));
        for nvec in &nvecs {
            for extra in &mextra {
                let mvec: Vec<u64> = extra
                    .iter()
                    .zip(model.m())
                    .map(|(&e, &m)| m as u64 * r + e)
                    .collect();
                if let Ok(label) = SectorLabel::new(model, nvec.clone(), mvec) {
                    if label.r == r {
                        out.insert(label);
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

fn for_each_box(vars: usize, bound: u64, f: impl FnMut(&[u64])) {
    for_each_bounded(&vec![bound; vars], f);
}

fn for_each_bounded(bounds: &[u64], mut f: impl FnMut(&[u64])) {
    let mut buf = vec![0u64; bounds.len()];
    loop {
        f(&buf);
        let mut pos = 0;
        loop {
            if pos == buf.len() {
                return;
            }
            if buf[pos] < bounds[pos] {
                buf[pos] += 1;
                break;
            }
            buf[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorSummary {
    pub sector: String,
    pub r: u64,
    pub dim: usize,
}

impl From<&SectorLabel> for SectorSummary {
    fn from(label: &SectorLabel) -> Self {
        SectorSummary {
            sector: label.to_string(),
            r: label.r,
            dim: label.dim(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shg() -> Model {
        Model::from_strs(&["1/2"], &["1"], &[2], &[1], 1.0).unwrap()
    }

    fn cascade() -> Model {
        Model::from_strs(&["1", "2"], &["3"], &[1, 1], &[1], 1.0).unwrap()
    }

    fn general() -> Model {
        Model::from_strs(&["1", "1"], &["1"], &[2, 1], &[3], 1.0).unwrap()
    }

    fn ms(i: &[u64], j: &[u64]) -> MonomialState {
        MonomialState::new(i.to_vec(), j.to_vec())
    }

    fn q(text: &str) -> BigRational {
        crate::model::parse_rational(text).unwrap()
    }

    #[test]
    fn quantum_numbers_by_substitution() {
        let qn = quantum_numbers(&cascade(), &ms(&[2, 1], &[3])).unwrap();
        assert_eq!(qn.e0, q("13"));
        assert_eq!(qn.alpha, vec![1]);
        assert!(qn.beta.is_empty());

        let qn = quantum_numbers(&shg(), &ms(&[4], &[0])).unwrap();
        assert_eq!(qn.e0, q("2"));

        let qn = quantum_numbers(&cascade(), &ms(&[0, 0], &[0])).unwrap();
        assert!(qn.e0.is_zero());
        assert_eq!(qn.alpha, vec![0]);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            quantum_numbers(&shg(), &ms(&[1, 1], &[0])),
            Err(SectorError::DimensionMismatch { .. })
        ));
        assert!(canonicalize(&shg(), &ms(&[1], &[])).is_err());
    }

    #[test]
    fn canonical_labels() {
        let a = canonicalize(&shg(), &ms(&[4], &[0])).unwrap();
        assert_eq!((a.nvec(), a.mvec(), a.r()), (&[0][..], &[2][..], 2));
        let b = canonicalize(&shg(), &ms(&[0], &[2])).unwrap();
        assert_eq!(a, b);
        let c = canonicalize(&cascade(), &ms(&[0, 0], &[1])).unwrap();
        assert_eq!((c.nvec(), c.mvec(), c.r()), (&[0, 0][..], &[1][..], 1));
        let d = canonicalize(&cascade(), &ms(&[1, 1], &[0])).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn bases() {
        let model = shg();
        let label = SectorLabel::parse(&model, "N=0;M=2").unwrap();
        let basis = sector_basis(&model, &label).unwrap();
        assert_eq!(basis, vec![ms(&[0], &[2]), ms(&[2], &[1]), ms(&[4], &[0])]);

        let label = SectorLabel::parse(&model, "N=1;M=0").unwrap();
        assert_eq!(sector_basis(&model, &label).unwrap(), vec![ms(&[1], &[0])]);

        let model = cascade();
        let label = SectorLabel::parse(&model, "N=0,0;M=1").unwrap();
        let basis = sector_basis(&model, &label).unwrap();
        assert_eq!(basis, vec![ms(&[0, 0], &[1]), ms(&[1, 1], &[0])]);
    }

    #[test]
    fn invalid_sectors() {
        assert!(matches!(
            SectorLabel::parse(&shg(), "N=2;M=0"),
            Err(SectorError::InvalidSector(_))
        ));
        assert!(matches!(
            SectorLabel::parse(&shg(), "N=0;M"),
            Err(SectorError::Parse { .. })
        ));
        let label = SectorLabel::parse(&cascade(), "N=0,0;M=1").unwrap();
        assert!(sector_basis(&shg(), &label).is_err());
        // same shape, different m: r disagrees
        let other = Model::from_strs(&["1", "2"], &["3/2"], &[1, 1], &[2], 1.0).unwrap();
        let label = SectorLabel::parse(&cascade(), "N=0,0;M=2").unwrap();
        assert!(sector_basis(&other, &label).is_err());
    }

    #[test]
    fn enumerate_small_cutoffs() {
        let text = |v: Vec<SectorLabel>| -> Vec<(String, u64)> {
            v.iter().map(|l| (l.to_string(), l.r())).collect()
        };
        assert_eq!(
            text(enumerate_sectors(&shg(), 2)),
            vec![
                ("N=0;M=0".to_string(), 0),
                ("N=0;M=1".to_string(), 1),
                ("N=0;M=2".to_string(), 2),
                ("N=1;M=0".to_string(), 0),
                ("N=1;M=1".to_string(), 1),
            ]
        );
        assert_eq!(text(enumerate_sectors(&general(), 0)), vec![("N=0,0;M=0".to_string(), 0)]);
        assert_eq!(
            text(enumerate_sectors(&cascade(), 1)),
            vec![
                ("N=0,0;M=0".to_string(), 0),
                ("N=0,0;M=1".to_string(), 1),
                ("N=0,1;M=0".to_string(), 0),
                ("N=1,0;M=0".to_string(), 0),
            ]
        );
    }

    #[test]
    fn text_forms_round_trip() {
        let state: MonomialState = "i=2,1;j=3".parse().unwrap();
        assert_eq!(state, ms(&[2, 1], &[3]));
        assert_eq!(state.to_string(), "i=2,1;j=3");
        let label = SectorLabel::parse(&cascade(), "N=0,0;M=1").unwrap();
        assert_eq!(label.to_string(), "N=0,0;M=1");
    }

    #[test]
    fn small_offset_family_covers_all_shg_sectors() {
        let fam = sectors_with_small_offsets(&shg(), 5, 1);
        assert_eq!(fam.len(), 12);
        let gen = sectors_with_small_offsets(&general(), 3, 1);
        assert!(gen.iter().all(|l| l.r() <= 3));
        assert_eq!(gen.len(), 4 * 3 * 4);
    }

    proptest! {
        #[test]
        fn energy_is_constant_along_sectors(i0 in 0u64..20, i1 in 0u64..20, j0 in 0u64..20) {
            let model = general();
            let label = canonicalize(&model, &ms(&[i0, i1], &[j0])).unwrap();
            let basis = sector_basis(&model, &label).unwrap();
            let first = quantum_numbers(&model, &basis[0]).unwrap();
            for (s, member) in basis.iter().enumerate() {
                prop_assert_eq!(&quantum_numbers(&model, member).unwrap(), &first);
                prop_assert_eq!(&canonicalize(&model, member).unwrap(), &label);
                prop_assert_eq!(member, &label.member(&model, s as u64));
            }
            prop_assert!(basis.contains(&ms(&[i0, i1], &[j0])));
            // restriction and the floor formula for r
            prop_assert!(label.nvec().iter().zip(model.n()).any(|(&a, &b)| a < b as u64));
            let last = basis.last().unwrap();
            prop_assert!(last.j.iter().zip(model.m()).any(|(&j, &m)| j < m as u64));
        }

        #[test]
        fn enumerate_partitions_low_monomials(b in 0u64..7) {
            let model = cascade();
            let sectors = enumerate_sectors(&model, b);
            let mut count = 0usize;
            for_each_monomial(&model, b, |state| {
                let hits = sectors
                    .iter()
                    .filter(|l| sector_basis(&model, l).unwrap().contains(&state))
                    .count();
                assert_eq!(hits, 1, "{state}");
                count += 1;
            });
            prop_assert!(count > 0);
            for l in &sectors {
                let basis = sector_basis(&model, l).unwrap();
                prop_assert!(basis.iter().any(|s| s.degree() <= b));
            }
        }
    }
}
