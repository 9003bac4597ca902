//! The photon-conversion Hamiltonian family `H = H0 + g H1`.
//!
//! `H0` is a sum of harmonic oscillators with frequencies `nu_l` (the "a"
//! modes) and `mu_k` (the "b" modes); `H1` converts `n_l` photons of each
//! a-mode into `m_k` photons of each b-mode and back. The model is only
//! integrable when the conversion conserves unperturbed energy,
//! `sum n_l nu_l == sum m_k mu_k`, which is checked exactly here.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("mode list `{which}` is empty")]
    EmptyModeList { which: &'static str },
    #[error("`{which}` and its exponents have different lengths ({freqs} vs {exps})")]
    LengthMismatch {
        which: &'static str,
        freqs: usize,
        exps: usize,
    },
    #[error("frequency {which}[{index}] = {value} is not positive")]
    NonPositiveFrequency {
        which: &'static str,
        index: usize,
        value: String,
    },
    #[error("exponent {which}[{index}] = {value} is not positive")]
    NonPositiveExponent {
        which: &'static str,
        index: usize,
        value: i64,
    },
    #[error("energy conservation violated: sum n*nu = {lhs} but sum m*mu = {rhs}")]
    ConstraintViolated { lhs: String, rhs: String },
    #[error("coupling g = {0} is not finite")]
    NonFiniteCoupling(f64),
    #[error(
        "frequency `{0}` looks like a floating-point number; write it as an exact rational, e.g. \"1/2\" or \"3\""
    )]
    FloatingFrequency(String),
    #[error("cannot parse `{0}` as a rational (expected \"p/q\" or an integer)")]
    BadRational(String),
}

/// Parses `"p/q"` or `"p"` into an exact rational. Decimal and exponent
/// notation is refused rather than approximated.
pub fn parse_rational(text: &str) -> Result<BigRational, ModelError> {
    let t = text.trim();
    if t.contains(['.', 'e', 'E']) || t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("nan") {
        return Err(ModelError::FloatingFrequency(t.to_string()));
    }
    let parsed = match t.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| ModelError::BadRational(t.into()))?;
            let q = BigInt::from_str(q.trim()).map_err(|_| ModelError::BadRational(t.into()))?;
            if q.is_zero() {
                return Err(ModelError::BadRational(t.into()));
            }
            BigRational::new(p, q)
        }
        None => BigRational::from_integer(
            BigInt::from_str(t).map_err(|_| ModelError::BadRational(t.into()))?,
        ),
    };
    Ok(parsed)
}

/// Canonical textual form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A model record as read from a file, before any checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RawModel {
    pub nu: Vec<BigRational>,
    pub mu: Vec<BigRational>,
    pub n: Vec<i64>,
    pub m: Vec<i64>,
    pub g: f64,
}

/// A validated model. Immutable; construct with [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    nu: Vec<BigRational>,
    mu: Vec<BigRational>,
    n: Vec<u32>,
    m: Vec<u32>,
    g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// `N = M = m_1 = 1`, `n_1 = n`.
    HarmonicGeneration(u32),
    /// `M = m_1 = 1` and every `n_l = 1`.
    PhotonCascade,
    General,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::HarmonicGeneration(n) => write!(f, "harmonic-generation(n={n})"),
            ModelKind::PhotonCascade => f.write_str("photon-cascade"),
            ModelKind::General => f.write_str("general"),
        }
    }
}

fn check_exponents(which: &'static str, exps: &[i64]) -> Result<Vec<u32>, ModelError> {
    exps.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value <= 0 || value > u32::MAX as i64 {
                Err(ModelError::NonPositiveExponent { which, index, value })
            } else {
                Ok(value as u32)
            }
        })
        .collect()
}

fn check_frequencies(which: &'static str, freqs: &[BigRational]) -> Result<(), ModelError> {
    for (index, f) in freqs.iter().enumerate() {
        if !f.is_positive() {
            return Err(ModelError::NonPositiveFrequency {
                which,
                index,
                value: format_rational(f),
            });
        }
    }
    Ok(())
}

/// Weighted frequency sum `sum_l e_l f_l`, exact.
fn weighted_sum<E: Copy + Into<i64>>(exps: &[E], freqs: &[BigRational]) -> BigRational {
    exps.iter()
        .zip(freqs)
        .fold(BigRational::zero(), |acc, (&e, f)| {
            acc + f * BigRational::from_integer(BigInt::from(e.into()))
        })
}

/// Checks a raw record and returns the validated model.
pub fn validate(raw: &RawModel) -> Result<Model, ModelError> {
    if raw.nu.is_empty() {
        return Err(ModelError::EmptyModeList { which: "nu" });
    }
    if raw.mu.is_empty() {
        return Err(ModelError::EmptyModeList { which: "mu" });
    }
    if raw.nu.len() != raw.n.len() {
        return Err(ModelError::LengthMismatch {
            which: "nu",
            freqs: raw.nu.len(),
            exps: raw.n.len(),
        });
    }
    if raw.mu.len() != raw.m.len() {
        return Err(ModelError::LengthMismatch {
            which: "mu",
            freqs: raw.mu.len(),
            exps: raw.m.len(),
        });
    }
    check_frequencies("nu", &raw.nu)?;
    check_frequencies("mu", &raw.mu)?;
    let n = check_exponents("n", &raw.n)?;
    let m = check_exponents("m", &raw.m)?;
    if !raw.g.is_finite() {
        return Err(ModelError::NonFiniteCoupling(raw.g));
    }
    let lhs = weighted_sum(&n, &raw.nu);
    let rhs = weighted_sum(&m, &raw.mu);
    if lhs != rhs {
        return Err(ModelError::ConstraintViolated {
            lhs: format_rational(&lhs),
            rhs: format_rational(&rhs),
        });
    }
    Ok(Model {
        nu: raw.nu.clone(),
        mu: raw.mu.clone(),
        n,
        m,
        g: raw.g,
    })
}

impl RawModel {
    /// Convenience constructor from rational strings; panics on malformed text.
    /// Meant for tests and examples with literal inputs.
    pub fn from_strs(nu: &[&str], mu: &[&str], n: &[i64], m: &[i64], g: f64) -> Self {
        let parse = |v: &[&str]| {
            v.iter()
                .map(|s| parse_rational(s).expect("literal rational"))
                .collect()
        };
        RawModel {
            nu: parse(nu),
            mu: parse(mu),
            n: n.to_vec(),
            m: m.to_vec(),
            g,
        }
    }
}

impl From<&Model> for RawModel {
    fn from(model: &Model) -> Self {
        RawModel {
            nu: model.nu.clone(),
            mu: model.mu.clone(),
            n: model.n.iter().map(|&x| x as i64).collect(),
            m: model.m.iter().map(|&x| x as i64).collect(),
            g: model.g,
        }
    }
}

impl Model {
    /// Shorthand for `validate(&RawModel::from_strs(..))`.
    pub fn from_strs(
        nu: &[&str],
        mu: &[&str],
        n: &[i64],
        m: &[i64],
        g: f64,
    ) -> Result<Self, ModelError> {
        validate(&RawModel::from_strs(nu, mu, n, m, g))
    }

    pub fn nu(&self) -> &[BigRational] {
        &self.nu
    }

    pub fn mu(&self) -> &[BigRational] {
        &self.mu
    }

    pub fn n(&self) -> &[u32] {
        &self.n
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Number of a-modes (`N`).
    pub fn num_a(&self) -> usize {
        self.n.len()
    }

    /// Number of b-modes (`M`).
    pub fn num_b(&self) -> usize {
        self.m.len()
    }

    /// Same model with a different coupling.
    pub fn with_coupling(&self, g: f64) -> Result<Self, ModelError> {
        if !g.is_finite() {
            return Err(ModelError::NonFiniteCoupling(g));
        }
        Ok(Model { g, ..self.clone() })
    }

    /// `sum n_l nu_l`; by validation this also equals `sum m_k mu_k`.
    pub fn conversion_energy(&self) -> BigRational {
        weighted_sum(&self.n, &self.nu)
    }

    /// `(sum n_l nu_l, sum m_k mu_k)`.
    pub fn constraint_sums(&self) -> (BigRational, BigRational) {
        (weighted_sum(&self.n, &self.nu), weighted_sum(&self.m, &self.mu))
    }

    /// Residual `sum n nu - sum m mu`, identically zero for a valid model.
    pub fn constraint_residual(&self) -> BigRational {
        weighted_sum(&self.n, &self.nu) - weighted_sum(&self.m, &self.mu)
    }

    /// gcd of all conversion exponents. When it exceeds one, distinct
    /// invariant sectors share all quantum numbers.
    pub fn exponent_gcd(&self) -> u32 {
        self.n
            .iter()
            .chain(&self.m)
            .fold(0u32, |acc, &x| num_integer::gcd(acc, x))
    }

    /// Order of the reduced differential operator, `max(sum n, sum m)`.
    pub fn operator_order(&self) -> u64 {
        let sn: u64 = self.n.iter().map(|&x| x as u64).sum();
        let sm: u64 = self.m.iter().map(|&x| x as u64).sum();
        sn.max(sm)
    }

    pub fn kind(&self) -> ModelKind {
        model_kind(self)
    }
}

pub fn model_kind(model: &Model) -> ModelKind {
    let (n, m) = (&model.n, &model.m);
    if n.len() == 1 && m.len() == 1 && m[0] == 1 {
        ModelKind::HarmonicGeneration(n[0])
    } else if m.len() == 1 && m[0] == 1 && n.iter().all(|&x| x == 1) {
        ModelKind::PhotonCascade
    } else {
        ModelKind::General
    }
}

/// One frequency entry in a model file: a string `"p/q"` / `"p"`, or a JSON
/// integer. Non-integer JSON numbers are refused.
#[derive(Debug, Clone, PartialEq)]
struct RationalText(BigRational);

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(de)?;
        let parsed = match &value {
            serde_json::Value::String(s) => parse_rational(s),
            serde_json::Value::Number(num) => match num.as_i64() {
                Some(i) => Ok(BigRational::from_integer(BigInt::from(i))),
                None => Err(ModelError::FloatingFrequency(num.to_string())),
            },
            other => Err(ModelError::BadRational(other.to_string())),
        };
        parsed.map(RationalText).map_err(D::Error::custom)
    }
}

impl Serialize for RationalText {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format_rational(&self.0))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    nu: Vec<RationalText>,
    mu: Vec<RationalText>,
    n: Vec<i64>,
    m: Vec<i64>,
    g: f64,
}

impl From<ModelFile> for RawModel {
    fn from(file: ModelFile) -> Self {
        RawModel {
            nu: file.nu.into_iter().map(|r| r.0).collect(),
            mu: file.mu.into_iter().map(|r| r.0).collect(),
            n: file.n,
            m: file.m,
            g: file.g,
        }
    }
}

impl Serialize for Model {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let raw = RawModel::from(self);
        ModelFile {
            nu: raw.nu.into_iter().map(RationalText).collect(),
            mu: raw.mu.into_iter().map(RationalText).collect(),
            n: raw.n,
            m: raw.m,
            g: raw.g,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Model {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let file = ModelFile::deserialize(de)?;
        validate(&RawModel::from(file)).map_err(D::Error::custom)
    }
}

/// Parses a model file body without validating it.
pub fn raw_model_from_json(text: &str) -> Result<RawModel, serde_json::Error> {
    serde_json::from_str::<ModelFile>(text).map(RawModel::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shg() -> RawModel {
        RawModel::from_strs(&["1/2"], &["1"], &[2], &[1], 1.0)
    }

    #[test]
    fn accepts_second_harmonic_generation() {
        let model = validate(&shg()).unwrap();
        assert_eq!(model.kind(), ModelKind::HarmonicGeneration(2));
        assert!(model.constraint_residual().is_zero());
    }

    #[test]
    fn accepts_two_photon_cascade() {
        let model = Model::from_strs(&["1", "2"], &["3"], &[1, 1], &[1], 1.0).unwrap();
        assert_eq!(model.kind(), ModelKind::PhotonCascade);
    }

    #[test]
    fn general_model_classification() {
        let model = Model::from_strs(&["1", "1"], &["1"], &[2, 1], &[3], 1.0).unwrap();
        assert_eq!(model.kind(), ModelKind::General);
        assert_eq!(model.operator_order(), 3);
    }

    #[test]
    fn constraint_violation_reports_both_sums() {
        let raw = RawModel::from_strs(&["1"], &["1"], &[2], &[1], 1.0);
        match validate(&raw) {
            Err(ModelError::ConstraintViolated { lhs, rhs }) => {
                assert_eq!(lhs, "2");
                assert_eq!(rhs, "1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_paths() {
        let mut raw = shg();
        raw.nu.clear();
        assert!(matches!(validate(&raw), Err(ModelError::EmptyModeList { which: "nu" })));

        let mut raw = shg();
        raw.mu[0] = BigRational::zero();
        assert!(matches!(validate(&raw), Err(ModelError::NonPositiveFrequency { .. })));

        let mut raw = shg();
        raw.n[0] = 0;
        assert!(matches!(validate(&raw), Err(ModelError::NonPositiveExponent { .. })));

        let mut raw = shg();
        raw.g = f64::NAN;
        assert!(matches!(validate(&raw), Err(ModelError::NonFiniteCoupling(_))));
    }

    #[test]
    fn validate_is_idempotent() {
        let once = validate(&shg()).unwrap();
        let twice = validate(&RawModel::from(&once)).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(format_rational(&parse_rational("2/4").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational(" 7 ").unwrap()), "7");
        assert!(matches!(parse_rational("0.5"), Err(ModelError::FloatingFrequency(_))));
        assert!(matches!(parse_rational("1e3"), Err(ModelError::FloatingFrequency(_))));
        assert!(matches!(parse_rational("1/0"), Err(ModelError::BadRational(_))));
        assert!(matches!(parse_rational("x"), Err(ModelError::BadRational(_))));
    }

    #[test]
    fn json_round_trip_and_float_rejection() {
        let text = r#"{"nu": ["1/2"], "mu": [1], "n": [2], "m": [1], "g": 1.0}"#;
        let model: Model = serde_json::from_str(text).unwrap();
        let out = serde_json::to_string(&model).unwrap();
        assert_eq!(out, r#"{"nu":["1/2"],"mu":["1"],"n":[2],"m":[1],"g":1.0}"#);
        let back: Model = serde_json::from_str(&out).unwrap();
        assert_eq!(back, model);

        let bad = r#"{"nu": [0.5], "mu": ["1"], "n": [2], "m": [1], "g": 1.0}"#;
        let err = serde_json::from_str::<Model>(bad).unwrap_err().to_string();
        assert!(err.contains("exact rational"), "{err}");
    }

    #[test]
    fn exponent_gcd() {
        let model = Model::from_strs(&["1"], &["1"], &[2], &[2], 1.0).unwrap();
        assert_eq!(model.exponent_gcd(), 2);
        let model = validate(&shg()).unwrap();
        assert_eq!(model.exponent_gcd(), 1);
    }
}
