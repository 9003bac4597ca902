//! Reduced quasi-exactly-solvable operator on polynomials in `zeta`.
//!
//! Acting on `x^N y^M P(zeta)`, `H1` reduces to a differential operator in
//! the single variable `zeta` which preserves the polynomials of degree at
//! most `r`. It can be written as a polynomial in the sl(2) generators
//!
//! ```text
//! J+ = zeta^2 d - r zeta,   J0 = zeta d - r/2,   J- = d
//! ```
//!
//! as one `J-` term and one `J+` term, each multiplied by a product of
//! commuting `(J0 + c)` factors. Both the direct form and the sl(2) form are
//! evaluated exactly on the monomial basis `1, zeta, .., zeta^r` so they can
//! be compared entry by entry.

use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{format_rational, Model};
use crate::sectors::{SectorError, SectorLabel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QesError {
    #[error(transparent)]
    Sector(#[from] SectorError),
    #[error("l'={l_prime}, k'={k_prime} is not a valid choice for this sector")]
    InvalidChoice { l_prime: usize, k_prime: usize },
    #[error("sl(2) evaluation produced a non-integer entry {value} at ({row}, {col})")]
    NonIntegerEntry { row: usize, col: usize, value: String },
    #[error("image of zeta^{column} leaves the polynomial space")]
    NotInvariant { column: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltFrom {
    Direct,
    Sl2,
}

/// Integer matrix of the reduced operator; column `t` is the image of `zeta^t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedOperator {
    matrix: Vec<Vec<BigInt>>,
    built_from: BuiltFrom,
}

impl ReducedOperator {
    pub fn new(matrix: Vec<Vec<BigInt>>, built_from: BuiltFrom) -> Self {
        debug_assert!(matrix.iter().all(|row| row.len() == matrix.len()));
        ReducedOperator { matrix, built_from }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<BigInt>] {
        &self.matrix
    }

    pub fn built_from(&self) -> BuiltFrom {
        self.built_from
    }

    /// Compares the matrices only, ignoring how they were built.
    pub fn same_matrix(&self, other: &ReducedOperator) -> bool {
        self.matrix == other.matrix
    }

    /// Rows of decimal strings, for JSON output.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(ToString::to_string).collect())
            .collect()
    }
}

fn product<I: IntoIterator<Item = i64>>(factors: I) -> BigInt {
    factors.into_iter().fold(BigInt::one(), |acc, f| acc * f)
}

/// Coefficient of `zeta^(t-1)` in the image of `zeta^t`.
fn lowering_coefficient(model: &Model, sector: &SectorLabel, t: u64) -> BigInt {
    product(sector.nvec().iter().zip(model.n()).flat_map(|(&nl, &n)| {
        (0..n as i64).map(move |j| nl as i64 - j + n as i64 * t as i64)
    }))
}

/// Coefficient of `zeta^(t+1)` in the image of `zeta^t`.
fn raising_coefficient(model: &Model, sector: &SectorLabel, t: u64) -> BigInt {
    product(sector.mvec().iter().zip(model.m()).flat_map(|(&mk, &m)| {
        (0..m as i64).map(move |i| mk as i64 - i - m as i64 * t as i64)
    }))
}

/// Applies `(1/zeta) prod (N_l - j + n_l zeta d) + zeta prod (M_k - i - m_k zeta d)`
/// to each basis monomial.
pub fn reduced_direct(model: &Model, sector: &SectorLabel) -> Result<ReducedOperator, QesError> {
    sector.check(model)?;
    let dim = sector.dim();
    let mut matrix = vec![vec![BigInt::zero(); dim]; dim];
    for t in 0..dim {
        let down = lowering_coefficient(model, sector, t as u64);
        let up = raising_coefficient(model, sector, t as u64);
        if t == 0 {
            if !down.is_zero() {
                return Err(QesError::NotInvariant { column: t });
            }
        } else {
            matrix[t - 1][t] = down;
        }
        if t + 1 == dim {
            if !up.is_zero() {
                return Err(QesError::NotInvariant { column: t });
            }
        } else {
            matrix[t + 1][t] = up;
        }
    }
    Ok(ReducedOperator::new(matrix, BuiltFrom::Direct))
}

/// Dense square matrix over the rationals; only used at small sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    dim: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(dim: usize) -> Self {
        RationalMatrix {
            dim,
            data: vec![BigRational::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for t in 0..dim {
            m.set(t, t, BigRational::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &BigRational {
        &self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: BigRational) {
        self.data[row * self.dim + col] = value;
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RationalMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// `self + c * I`.
    pub fn shift(&self, c: &BigRational) -> Self {
        let mut out = self.clone();
        for t in 0..self.dim {
            let v = out.get(t, t) + c;
            out.set(t, t, v);
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let ab = self * other;
        let ba = other * self;
        &ab + &ba.scale(&-BigRational::one())
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = RationalMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }
}

impl Add for &RationalMatrix {
    type Output = RationalMatrix;

    fn add(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.dim, rhs.dim);
        RationalMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Matrices of `J+`, `J0`, `J-` on `1, zeta, .., zeta^r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sl2Generators {
    pub plus: RationalMatrix,
    pub zero: RationalMatrix,
    pub minus: RationalMatrix,
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn sl2_generators(r: u64) -> Sl2Generators {
    let dim = r as usize + 1;
    let half_r = BigRational::new(BigInt::from(r), BigInt::from(2));
    let mut plus = RationalMatrix::zeros(dim);
    let mut zero = RationalMatrix::zeros(dim);
    let mut minus = RationalMatrix::zeros(dim);
    for t in 0..dim {
        zero.set(t, t, int(t as i64) - &half_r);
        if t > 0 {
            minus.set(t - 1, t, int(t as i64));
        }
        if t + 1 < dim {
            plus.set(t + 1, t, int(t as i64 - r as i64));
        }
    }
    Sl2Generators { plus, zero, minus }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    #[serde(rename = "J+")]
    Plus,
    #[serde(rename = "J-")]
    Minus,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Plus => "J+",
            Generator::Minus => "J-",
        })
    }
}

/// `scalar * leading * prod (J0 + shift)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sl2Term {
    pub leading: Generator,
    pub scalar: BigRational,
    pub shifts: Vec<BigRational>,
}

impl Sl2Term {
    /// Degree of the term as a polynomial in the generators.
    pub fn degree(&self) -> usize {
        self.shifts.len() + 1
    }
}

impl fmt::Display for Sl2Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scalar.is_negative() {
            write!(f, "({})", format_rational(&self.scalar))?;
        } else {
            f.write_str(&format_rational(&self.scalar))?;
        }
        write!(f, " * {}", self.leading)?;
        for c in &self.shifts {
            if c.is_zero() {
                f.write_str(" * J0")?;
            } else if c.is_negative() {
                write!(f, " * (J0 - {})", format_rational(&-c))?;
            } else {
                write!(f, " * (J0 + {})", format_rational(c))?;
            }
        }
        Ok(())
    }
}

/// Renders a term list as `"t1 + t2"`.
pub fn format_terms(terms: &[Sl2Term]) -> String {
    terms.iter().map(ToString::to_string).collect::<Vec<_>>().join(" + ")
}

/// Indices `l` with `N_l < n_l`.
pub fn valid_l_primes(model: &Model, sector: &SectorLabel) -> Vec<usize> {
    sector
        .nvec()
        .iter()
        .zip(model.n())
        .enumerate()
        .filter(|(_, (&nl, &n))| nl < n as u64)
        .map(|(l, _)| l)
        .collect()
}

/// Indices `k` with `floor(M_k / m_k) == r`.
pub fn valid_k_primes(model: &Model, sector: &SectorLabel) -> Vec<usize> {
    sector
        .mvec()
        .iter()
        .zip(model.m())
        .enumerate()
        .filter(|(_, (&mk, &m))| mk / m as u64 == sector.r())
        .map(|(k, _)| k)
        .collect()
}

/// The two-term sl(2) form, choosing the smallest admissible `l'` and `k'`.
pub fn sl2_expansion(model: &Model, sector: &SectorLabel) -> Result<Vec<Sl2Term>, QesError> {
    sector.check(model)?;
    let l_prime = valid_l_primes(model, sector)[0];
    let k_prime = valid_k_primes(model, sector)[0];
    sl2_expansion_with(model, sector, l_prime, k_prime)
}

/// The two-term sl(2) form for an explicit choice of `l'` and `k'`.
pub fn sl2_expansion_with(
    model: &Model,
    sector: &SectorLabel,
    l_prime: usize,
    k_prime: usize,
) -> Result<Vec<Sl2Term>, QesError> {
    sector.check(model)?;
    if !valid_l_primes(model, sector).contains(&l_prime)
        || !valid_k_primes(model, sector).contains(&k_prime)
    {
        return Err(QesError::InvalidChoice { l_prime, k_prime });
    }
    let half_r = BigRational::new(BigInt::from(sector.r()), BigInt::from(2));

    let mut a_order: Vec<usize> = vec![l_prime];
    a_order.extend((0..model.num_a()).filter(|&l| l != l_prime));
    let mut lowering_shifts = Vec::new();
    for l in a_order {
        let (nl, n) = (sector.nvec()[l] as i64, model.n()[l] as i64);
        for j in 0..n {
            if l == l_prime && j == nl {
                continue;
            }
            lowering_shifts.push(BigRational::new(BigInt::from(nl - j), BigInt::from(n)) + &half_r);
        }
    }
    let lowering_scalar = model
        .n()
        .iter()
        .fold(BigInt::one(), |acc, &n| acc * BigInt::from(n).pow(n));

    let mut b_order: Vec<usize> = vec![k_prime];
    b_order.extend((0..model.num_b()).filter(|&k| k != k_prime));
    let mut raising_shifts = Vec::new();
    for k in b_order {
        let (mk, m) = (sector.mvec()[k] as i64, model.m()[k] as i64);
        for i in 0..m {
            if k == k_prime && i == mk % m {
                continue;
            }
            raising_shifts.push(BigRational::new(BigInt::from(i - mk), BigInt::from(m)) + &half_r);
        }
    }
    let raising_scalar = model
        .m()
        .iter()
        .fold(BigInt::one(), |acc, &m| acc * (-BigInt::from(m)).pow(m));

    Ok(vec![
        Sl2Term {
            leading: Generator::Minus,
            scalar: BigRational::from_integer(lowering_scalar),
            shifts: lowering_shifts,
        },
        Sl2Term {
            leading: Generator::Plus,
            scalar: BigRational::from_integer(raising_scalar),
            shifts: raising_shifts,
        },
    ])
}

/// Evaluates the terms as exact matrix products on `P_r` and requires an
/// integer result.
pub fn sl2_matrix(terms: &[Sl2Term], r: u64) -> Result<ReducedOperator, QesError> {
    let gens = sl2_generators(r);
    let dim = r as usize + 1;
    let mut total = RationalMatrix::zeros(dim);
    for term in terms {
        let leading = match term.leading {
            Generator::Plus => &gens.plus,
            Generator::Minus => &gens.minus,
        };
        let mut acc = leading.scale(&term.scalar);
        for c in &term.shifts {
            acc = &acc * &gens.zero.shift(c);
        }
        total = &total + &acc;
    }
    let mut matrix = vec![vec![BigInt::zero(); dim]; dim];
    for (row, out) in matrix.iter_mut().enumerate() {
        for (col, slot) in out.iter_mut().enumerate() {
            let v = total.get(row, col);
            if !v.is_integer() {
                return Err(QesError::NonIntegerEntry {
                    row,
                    col,
                    value: format_rational(v),
                });
            }
            *slot = v.to_integer();
        }
    }
    Ok(ReducedOperator::new(matrix, BuiltFrom::Sl2))
}
