//! Exact tridiagonal representation of `H1` inside one sector.
//!
//! In the orthonormal Fock basis `e_s = x^(N+sn) y^(M-sm) / sqrt(C_s)` the
//! perturbation is real symmetric, tridiagonal, with zero diagonal. The
//! squared couplings `h_s^2` are integers and are kept exactly; the floating
//! couplings are a derived view.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::Model;
use crate::qes::ReducedOperator;
use crate::sectors::{SectorError, SectorLabel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error(transparent)]
    Sector(#[from] SectorError),
    #[error("coupling index s={s} outside 1..={r}")]
    IndexOutOfRange { s: u64, r: u64 },
    #[error("entry ({row}, {col}) is nonzero outside the two off-diagonals")]
    NotTridiagonal { row: usize, col: usize },
    #[error("conjugated matrix is not symmetric at link {s}")]
    AsymmetryDetected { s: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("squared coupling {s} is zero; the matrix would be reducible")]
    ZeroCoupling { s: usize },
    #[error("serialized matrix is inconsistent: {0}")]
    Inconsistent(String),
}

/// Normalization constants `C_s = prod_l (N_l + n_l s)! prod_k (M_k - m_k s)!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormConstants {
    pub c: Vec<BigUint>,
}

fn factorial(k: u64) -> BigUint {
    (2..=k).fold(BigUint::one(), |acc, x| acc * x)
}

pub fn norm_constants(model: &Model, sector: &SectorLabel) -> Result<NormConstants, MatrixError> {
    sector.check(model)?;
    let c = (0..=sector.r())
        .map(|s| {
            let member = sector.member(model, s);
            member
                .i
                .iter()
                .chain(&member.j)
                .fold(BigUint::one(), |acc, &e| acc * factorial(e))
        })
        .collect();
    Ok(NormConstants { c })
}

/// Square of the coupling between basis states `s - 1` and `s`.
pub fn offdiag_sq(model: &Model, sector: &SectorLabel, s: u64) -> Result<BigUint, MatrixError> {
    sector.check(model)?;
    if s == 0 || s > sector.r() {
        return Err(MatrixError::IndexOutOfRange { s, r: sector.r() });
    }
    Ok(offdiag_sq_unchecked(model, sector, s))
}

fn offdiag_sq_unchecked(model: &Model, sector: &SectorLabel, s: u64) -> BigUint {
    let mut acc = BigUint::one();
    for (&nl, &n) in sector.nvec().iter().zip(model.n()) {
        let base = nl + n as u64 * (s - 1);
        for j in 0..n as u64 {
            acc *= base + j + 1;
        }
    }
    for (&mk, &m) in sector.mvec().iter().zip(model.m()) {
        let base = mk - m as u64 * (s - 1);
        for i in 0..m as u64 {
            acc *= base - i;
        }
    }
    acc
}

/// Squared couplings above this trigger power-of-two rescaling.
const SCALE_THRESHOLD_BITS: u64 = 1000;

/// Splits `x` into `(mantissa, exp)` with `x ~= mantissa * 2^exp`, the mantissa
/// correctly rounded to double precision.
fn big_to_f64_parts(x: &BigUint) -> (f64, i64) {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits") as f64, 0);
    }
    let shift = bits - 64;
    let mut top = (x >> shift).to_u64().expect("64 bits");
    if x.trailing_zeros().map_or(false, |tz| tz < shift) {
        top |= 1; // sticky bit for round-to-nearest
    }
    (top as f64, shift as i64)
}

/// `x * 2^p` without intermediate overflow in the power.
fn ldexp(mut x: f64, mut p: i64) -> f64 {
    while p > 1000 {
        x *= 2f64.powi(1000);
        p -= 1000;
    }
    while p < -1000 {
        x *= 2f64.powi(-1000);
        p += 1000;
    }
    x * 2f64.powi(p as i32)
}

/// The sector matrix of `H1`. The diagonal is identically zero and is not
/// stored. Floating entries are in units of `2^scale_log2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalH1 {
    offdiag_sq: Vec<BigUint>,
    offdiag: Vec<f64>,
    offdiag_sq_f64: Vec<f64>,
    scale_log2: i64,
}

impl TridiagonalH1 {
    /// Builds the matrix from exact squared couplings; `offdiag[t]` couples
    /// basis states `t` and `t + 1`.
    pub fn from_offdiag_sq(offdiag_sq: Vec<BigUint>) -> Result<Self, MatrixError> {
        if let Some(s) = offdiag_sq.iter().position(Zero::is_zero) {
            return Err(MatrixError::ZeroCoupling { s: s + 1 });
        }
        let max_bits = offdiag_sq.iter().map(BigUint::bits).max().unwrap_or(0);
        let threshold = BigUint::one() << SCALE_THRESHOLD_BITS;
        let needs_scale = offdiag_sq.iter().any(|x| *x > threshold);
        // h_max ~ 2^(max_bits/2); scaled couplings end up of order one.
        let scale_log2 = if needs_scale { (max_bits as i64 - 1) / 2 } else { 0 };

        let mut offdiag = Vec::with_capacity(offdiag_sq.len());
        let mut offdiag_sq_f64 = Vec::with_capacity(offdiag_sq.len());
        for x in &offdiag_sq {
            let (mant, exp) = big_to_f64_parts(x);
            offdiag_sq_f64.push(ldexp(mant, exp - 2 * scale_log2));
            // sqrt(mant * 2^exp) with an even exponent
            let (mant, exp) = if exp % 2 == 0 { (mant, exp) } else { (mant * 2.0, exp - 1) };
            offdiag.push(ldexp(mant.sqrt(), exp / 2 - scale_log2));
        }
        Ok(TridiagonalH1 {
            offdiag_sq,
            offdiag,
            offdiag_sq_f64,
            scale_log2,
        })
    }

    pub fn dim(&self) -> usize {
        self.offdiag.len() + 1
    }

    pub fn offdiag_sq(&self) -> &[BigUint] {
        &self.offdiag_sq
    }

    /// Couplings `h_s`, scaled by `2^-scale_log2`.
    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Squared couplings as floats, scaled by `2^-2 scale_log2`.
    pub fn offdiag_sq_f64(&self) -> &[f64] {
        &self.offdiag_sq_f64
    }

    pub fn scale_log2(&self) -> i64 {
        self.scale_log2
    }

    /// Infinity norm of the scaled floating matrix.
    pub fn norm_inf(&self) -> f64 {
        let h = &self.offdiag;
        (0..self.dim())
            .map(|t| {
                let left = if t > 0 { h[t - 1] } else { 0.0 };
                let right = h.get(t).copied().unwrap_or(0.0);
                left + right
            })
            .fold(0.0, f64::max)
    }

    /// Multiplies a scaled value back into physical units.
    pub fn unscale(&self, x: f64) -> f64 {
        ldexp(x, self.scale_log2)
    }
}

pub fn build_tridiagonal(model: &Model, sector: &SectorLabel) -> Result<TridiagonalH1, MatrixError> {
    sector.check(model)?;
    let sq = (1..=sector.r())
        .map(|s| offdiag_sq_unchecked(model, sector, s))
        .collect();
    TridiagonalH1::from_offdiag_sq(sq)
}

/// Conjugates the integer reduced operator (monomial basis) by
/// `diag(sqrt(C_s))`, checking exactly that the result is symmetric.
pub fn symmetrize_reduced(
    reduced: &ReducedOperator,
    norms: &NormConstants,
) -> Result<TridiagonalH1, MatrixError> {
    let dim = reduced.dim();
    if dim != norms.c.len() {
        return Err(MatrixError::DimensionMismatch {
            left: dim,
            right: norms.c.len(),
        });
    }
    let m = reduced.matrix();
    for (row, entries) in m.iter().enumerate() {
        for (col, x) in entries.iter().enumerate() {
            if row.abs_diff(col) != 1 && !x.is_zero() {
                return Err(MatrixError::NotTridiagonal { row, col });
            }
        }
    }
    let mut sq = Vec::with_capacity(dim.saturating_sub(1));
    for s in 1..dim {
        let lower = &m[s][s - 1];
        let upper = &m[s - 1][s];
        let c_hi = BigInt::from(norms.c[s].clone());
        let c_lo = BigInt::from(norms.c[s - 1].clone());
        if lower * &c_hi != upper * &c_lo {
            return Err(MatrixError::AsymmetryDetected { s });
        }
        let prod = lower * upper;
        if !prod.is_positive() {
            return Err(MatrixError::AsymmetryDetected { s });
        }
        sq.push(prod.to_biguint().expect("positive"));
    }
    TridiagonalH1::from_offdiag_sq(sq)
}

#[derive(Serialize, Deserialize)]
struct TridiagonalJson {
    dim: usize,
    offdiag_sq: Vec<String>,
    scale_log2: i64,
}

impl Serialize for TridiagonalH1 {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        TridiagonalJson {
            dim: self.dim(),
            offdiag_sq: self.offdiag_sq.iter().map(ToString::to_string).collect(),
            scale_log2: self.scale_log2,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for TridiagonalH1 {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = TridiagonalJson::deserialize(de)?;
        let sq = raw
            .offdiag_sq
            .iter()
            .map(|s| s.parse::<BigUint>().map_err(D::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        let matrix = TridiagonalH1::from_offdiag_sq(sq).map_err(D::Error::custom)?;
        if matrix.dim() != raw.dim || matrix.scale_log2 != raw.scale_log2 {
            return Err(D::Error::custom(MatrixError::Inconsistent(format!(
                "dim {} / scale {} do not match the couplings",
                raw.dim, raw.scale_log2
            ))));
        }
        Ok(matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shg() -> Model {
        Model::from_strs(&["1/2"], &["1"], &[2], &[1], 1.0).unwrap()
    }

    fn thg() -> Model {
        Model::from_strs(&["1/3"], &["1"], &[3], &[1], 1.0).unwrap()
    }

    fn cascade() -> Model {
        Model::from_strs(&["1", "2"], &["3"], &[1, 1], &[1], 1.0).unwrap()
    }

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn norm_constants_by_factorials() {
        let model = shg();
        let c = |text| norm_constants(&model, &SectorLabel::parse(&model, text).unwrap()).unwrap().c;
        assert_eq!(c("N=0;M=2"), big(&[2, 2, 24]));
        assert_eq!(c("N=1;M=0"), big(&[1]));
        let model = cascade();
        let label = SectorLabel::parse(&model, "N=0,0;M=1").unwrap();
        assert_eq!(norm_constants(&model, &label).unwrap().c, big(&[1, 1]));
    }

    #[test]
    fn squared_couplings() {
        let model = shg();
        let sector = SectorLabel::parse(&model, "N=0;M=2").unwrap();
        assert_eq!(offdiag_sq(&model, &sector, 1).unwrap(), BigUint::from(4u32));
        assert_eq!(offdiag_sq(&model, &sector, 2).unwrap(), BigUint::from(12u32));
        assert!(matches!(
            offdiag_sq(&model, &sector, 3),
            Err(MatrixError::IndexOutOfRange { s: 3, r: 2 })
        ));
        assert!(offdiag_sq(&model, &sector, 0).is_err());
        let sector = SectorLabel::parse(&model, "N=1;M=1").unwrap();
        assert_eq!(offdiag_sq(&model, &sector, 1).unwrap(), BigUint::from(6u32));
        let model = cascade();
        let sector = SectorLabel::parse(&model, "N=0,0;M=1").unwrap();
        assert_eq!(offdiag_sq(&model, &sector, 1).unwrap(), BigUint::one());
    }

    #[test]
    fn build_small_matrices() {
        let model = shg();
        let m = build_tridiagonal(&model, &SectorLabel::parse(&model, "N=0;M=2").unwrap()).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.offdiag_sq(), &big(&[4, 12])[..]);
        assert_eq!(m.offdiag()[0], 2.0);
        assert!((m.offdiag()[1] - 12f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.scale_log2(), 0);

        let m = build_tridiagonal(&model, &SectorLabel::parse(&model, "N=1;M=0").unwrap()).unwrap();
        assert_eq!(m.dim(), 1);
        assert!(m.offdiag().is_empty());

        let model = thg();
        let m = build_tridiagonal(&model, &SectorLabel::parse(&model, "N=0;M=1").unwrap()).unwrap();
        assert_eq!(m.offdiag_sq(), &big(&[6])[..]);
    }

    #[test]
    fn huge_couplings_are_rescaled() {
        // 100th harmonic: h_s^2 contains 100 factors of size ~100 s.
        let model = Model::from_strs(&["1/100"], &["1"], &[100], &[1], 1.0).unwrap();
        let sector = SectorLabel::parse(&model, "N=0;M=20").unwrap();
        let m = build_tridiagonal(&model, &sector).unwrap();
        assert!(m.scale_log2() > 0);
        for (exact, h) in m.offdiag_sq().iter().zip(m.offdiag()) {
            // (h 2^k)^2 / exact == 1 to 1e-12, compared through log2.
            let (mant, exp) = big_to_f64_parts(exact);
            let lhs = 2.0 * (h.log2() + m.scale_log2() as f64);
            let rhs = mant.log2() + exp as f64;
            assert!(((lhs - rhs) / rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
        assert!(m.offdiag().iter().all(|h| h.is_finite() && *h > 0.0));
        assert!(m.norm_inf() < 4.0);
    }

    #[test]
    fn floating_view_reproduces_exact_squares() {
        let model = Model::from_strs(&["1/5"], &["1"], &[5], &[1], 1.0).unwrap();
        let sector = SectorLabel::parse(&model, "N=3;M=40").unwrap();
        let m = build_tridiagonal(&model, &sector).unwrap();
        for (exact, h) in m.offdiag_sq().iter().zip(m.offdiag()) {
            let exact = exact.to_f64().unwrap();
            assert!(((h * h - exact) / exact).abs() < 1e-12);
        }
    }

    #[test]
    fn sticky_rounding() {
        let x = (BigUint::one() << 200u32) + BigUint::one();
        let (mant, exp) = big_to_f64_parts(&x);
        assert_eq!(ldexp(mant, exp), 2f64.powi(200));
    }

    #[test]
    fn zero_coupling_rejected() {
        assert!(matches!(
            TridiagonalH1::from_offdiag_sq(big(&[3, 0])),
            Err(MatrixError::ZeroCoupling { s: 2 })
        ));
    }

    #[test]
    fn json_shape() {
        let model = shg();
        let m = build_tridiagonal(&model, &SectorLabel::parse(&model, "N=0;M=2").unwrap()).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"dim":3,"offdiag_sq":["4","12"],"scale_log2":0}"#);
        let back: TridiagonalH1 = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<TridiagonalH1>(
            r#"{"dim":4,"offdiag_sq":["4","12"],"scale_log2":0}"#
        )
        .is_err());
    }
}
