//! Eigenvalues of the sector matrices.
//!
//! The leading principal minors of `E - H1` obey
//! `delta_{s+1} = E delta_s - h_s^2 delta_{s-1}` with `delta_0 = 1`,
//! `delta_1 = E`. Since every `h_s^2 > 0`, the sign agreements along this
//! sequence count the eigenvalues below `E` (a Sturm sequence), which gives
//! bisection brackets for every eigenvalue. An implicit-shift QL sweep on the
//! same floating matrix is run as an independent cross-check.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{build_tridiagonal, MatrixError, TridiagonalH1};
use crate::model::{format_rational, Model};
use crate::sectors::{quantum_numbers, SectorError, SectorLabel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Sector(#[from] SectorError),
    #[error("tolerance {0} must be positive and finite")]
    InvalidTolerance(f64),
    #[error("tolerance {tol} is below achievable precision {min}")]
    ToleranceTooSmall { tol: f64, min: f64 },
    #[error("dense cross-check deviates by {deviation}, bound {bound}")]
    CrossCheckFailed { deviation: f64, bound: f64 },
    #[error("dense QL iteration did not converge")]
    NoConvergence,
    #[error("polynomial has no coefficients")]
    EmptyPolynomial,
    #[error("eigenvalues overflow double precision; use the scaled values")]
    Unrepresentable,
}

pub const DEFAULT_TOL: f64 = 1e-12;

/// Smallest accepted relative tolerance.
pub const MIN_TOL: f64 = 4.0 * f64::EPSILON;

/// Dense cross-checks run up to this dimension.
pub const CROSSCHECK_MAX_DIM: usize = 2000;

const LANES: usize = 8;

const RESCALE_UP: f64 = pow2(512);
const RESCALE_DOWN: f64 = pow2(-512);
const RESCALE_BITS: i64 = 512;

/// `delta_0 .. delta_dim` at one probe; the true value of `delta_s` is
/// `values[s] * 2^log2_scale[s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolySequence {
    pub values: Vec<f64>,
    pub log2_scale: Vec<i64>,
}

impl CharPolySequence {
    /// Number of consecutive pairs with the same sign; equals the number of
    /// eigenvalues below the probe when no entry is zero.
    pub fn sign_agreements(&self) -> usize {
        self.values
            .windows(2)
            .filter(|w| (w[0] > 0.0) == (w[1] > 0.0))
            .count()
    }

    pub fn has_zero(&self) -> bool {
        self.values[1..].iter().any(|&v| v == 0.0)
    }

    /// The last entry, `delta_dim`, as (mantissa, power of two).
    pub fn last(&self) -> (f64, i64) {
        (*self.values.last().unwrap(), *self.log2_scale.last().unwrap())
    }
}

/// Evaluates the recursion at `e`, given in the matrix's scaled units.
pub fn char_poly_sequence(matrix: &TridiagonalH1, e: f64) -> CharPolySequence {
    let hsq = matrix.offdiag_sq_f64();
    let mut values = Vec::with_capacity(matrix.dim() + 1);
    let mut log2_scale = Vec::with_capacity(matrix.dim() + 1);
    values.push(1.0);
    values.push(e);
    log2_scale.extend([0, 0]);
    let (mut prev, mut cur, mut exp) = (1.0f64, e, 0i64);
    for &h2 in hsq {
        let mut next = e * cur - h2 * prev;
        prev = cur;
        if next.abs() > RESCALE_UP {
            next *= RESCALE_DOWN;
            prev *= RESCALE_DOWN;
            exp += RESCALE_BITS;
        } else if next.abs() < RESCALE_DOWN && prev.abs() < RESCALE_DOWN && (next != 0.0 || prev != 0.0) {
            next *= RESCALE_UP;
            prev *= RESCALE_UP;
            exp -= RESCALE_BITS;
        }
        cur = next;
        values.push(cur);
        log2_scale.push(exp);
    }
    CharPolySequence { values, log2_scale }
}

/// Count, exact-zero flag and `delta_dim = value * 2^exp`, with the same
/// arithmetic as [`char_poly_sequence`] but without storing the sequence.
fn careful_eval(hsq: &[f64], e: f64) -> (usize, bool, f64, i64) {
    let (mut prev, mut cur, mut exp) = (1.0f64, e, 0i64);
    let mut count = (e > 0.0) as usize;
    let mut zero = e == 0.0;
    for &h2 in hsq {
        let mut next = e * cur - h2 * prev;
        count += ((next > 0.0) == (cur > 0.0)) as usize;
        zero |= next == 0.0;
        prev = cur;
        if next.abs() > RESCALE_UP {
            next *= RESCALE_DOWN;
            prev *= RESCALE_DOWN;
            exp += RESCALE_BITS;
        } else if next.abs() < RESCALE_DOWN && prev.abs() < RESCALE_DOWN && (next != 0.0 || prev != 0.0) {
            next *= RESCALE_UP;
            prev *= RESCALE_UP;
            exp -= RESCALE_BITS;
        }
        cur = next;
    }
    (count, zero, cur, exp)
}

const fn pow2(k: i64) -> f64 {
    f64::from_bits(((1023 + k) as u64) << 52)
}

const FAST_LOW: f64 = pow2(-900);
const FAST_HIGH: f64 = pow2(900);

/// Steps between renormalizations in [`sturm_lanes_fast`]: the pair
/// `(delta_{s-1}, delta_s)` grows by at most `|e| + max h^2` per step, so from
/// `[1, 2)` it stays below `2^900` for this many steps.
fn check_period(hsq: &[f64], bound: f64) -> usize {
    let max_h2 = hsq.iter().copied().fold(0.0, f64::max);
    let growth = (bound + max_h2).max(2.0).log2();
    ((600.0 / growth) as usize).clamp(1, 64)
}

/// Counts and final values for `L` probes without per-step branches.
/// Magnitudes are renormalized by a power of two every `period` steps. A lane
/// is flagged whenever a value leaves `[2^-900, 2^900]` (zero, overflow,
/// subnormal) and must then be redone by [`careful_eval`].
#[allow(clippy::type_complexity)]
fn sturm_lanes_fast<const L: usize>(
    hsq: &[f64],
    es: [f64; L],
    period: usize,
) -> ([usize; L], [bool; L], [f64; L], [i64; L]) {
    let mut prev = [1.0f64; L];
    let mut cur = es;
    let mut count = [0u32; L];
    let mut bad = [false; L];
    let mut exp = [0i64; L];
    for lane in 0..L {
        count[lane] = (cur[lane] > 0.0) as u32;
        let a = cur[lane].abs();
        bad[lane] = !(a >= FAST_LOW && a <= FAST_HIGH);
    }
    for block in hsq.chunks(period) {
        for &h2 in block {
            for lane in 0..L {
                let next = es[lane] * cur[lane] - h2 * prev[lane];
                count[lane] = count[lane].wrapping_add(((next > 0.0) == (cur[lane] > 0.0)) as u32);
                let a = next.abs();
                bad[lane] |= !(a >= FAST_LOW && a <= FAST_HIGH);
                prev[lane] = cur[lane];
                cur[lane] = next;
            }
        }
        for lane in 0..L {
            // exact power of two bringing max(|cur|, |prev|) into [1, 2)
            let biased = (cur[lane].abs().max(prev[lane].abs()).to_bits() >> 52).clamp(1, 2045);
            let factor = f64::from_bits((2046 - biased) << 52);
            cur[lane] *= factor;
            prev[lane] *= factor;
            exp[lane] += biased as i64 - 1023;
        }
    }
    (count.map(|c| c as usize), bad, cur, exp)
}

/// One evaluation: the probe actually used, the Sturm count there and
/// `delta_dim = value * 2^exp`.
#[derive(Debug, Clone, Copy)]
struct Probe {
    at: f64,
    count: usize,
    value: f64,
    exp: i64,
}

/// Evaluates at `e`, moving upward past exact zeros by a step starting at
/// `EPSILON * scale` and doubling.
fn careful_probe(hsq: &[f64], mut e: f64, scale: f64) -> Probe {
    let mut step = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    loop {
        let (count, zero, value, exp) = careful_eval(hsq, e);
        if !zero {
            return Probe { at: e, count, value, exp };
        }
        e = (e + step).max(e.next_up());
        step *= 2.0;
    }
}

/// Number of eigenvalues strictly below `e` (scaled units). If `e` is a root
/// of some leading minor it is first moved up by about `EPSILON * ||H||`.
pub fn sturm_count(matrix: &TridiagonalH1, e: f64) -> usize {
    careful_probe(matrix.offdiag_sq_f64(), e, matrix.norm_inf()).count
}

struct Evaluator<'a> {
    hsq: &'a [f64],
    bound: f64,
    period: usize,
}

impl Evaluator<'_> {
    fn probes(&self, es: [f64; LANES]) -> [Probe; LANES] {
        let (counts, bad, values, exps) = sturm_lanes_fast::<LANES>(self.hsq, es, self.period);
        std::array::from_fn(|lane| {
            if bad[lane] {
                careful_probe(self.hsq, es[lane], self.bound)
            } else {
                Probe {
                    at: es[lane],
                    count: counts[lane],
                    value: values[lane],
                    exp: exps[lane],
                }
            }
        })
    }

    fn probe(&self, e: f64) -> Probe {
        careful_probe(self.hsq, e, self.bound)
    }
}

#[derive(Debug, Clone, Copy)]
struct Bracket {
    lo: Probe,
    hi: Probe,
}

impl Bracket {
    fn width(&self) -> f64 {
        self.hi.at - self.lo.at
    }

    fn inside(&self) -> usize {
        self.hi.count.saturating_sub(self.lo.count)
    }

    /// Linear interpolation of `delta_dim` between the ends when it changes
    /// sign, otherwise the midpoint. Always inside the bracket.
    fn estimate(&self) -> f64 {
        let mid = self.lo.at + 0.5 * self.width();
        if self.inside() != 1 {
            return mid;
        }
        let shift = (self.hi.exp - self.lo.exp).clamp(-1000, 1000) as i32;
        let ratio = self.hi.value / self.lo.value * 2f64.powi(shift);
        if ratio < 0.0 && ratio.is_finite() {
            (self.lo.at + self.width() / (1.0 - ratio)).clamp(self.lo.at, self.hi.at)
        } else {
            mid
        }
    }
}

/// Splits `[-bound, bound]` at midpoints until every piece holds one
/// eigenvalue, or several within `width` of each other. Returns the
/// single-eigenvalue pieces and the clusters.
fn isolate(ev: &Evaluator<'_>, dim: usize, width: f64) -> (Vec<Bracket>, Vec<Bracket>) {
    let mut lo = ev.probe(-ev.bound);
    while lo.count > 0 {
        lo = ev.probe(2.0 * lo.at);
    }
    let mut hi = ev.probe(ev.bound);
    while hi.count < dim {
        hi = ev.probe(2.0 * hi.at);
    }
    let mut queue = vec![Bracket { lo, hi }];
    let (mut single, mut clusters) = (Vec::new(), Vec::new());
    while !queue.is_empty() {
        let take = queue.len().min(LANES);
        let batch: Vec<Bracket> = queue.drain(queue.len() - take..).collect();
        let mids: [f64; LANES] = std::array::from_fn(|lane| {
            let b = &batch[lane.min(take - 1)];
            b.lo.at + 0.5 * b.width()
        });
        let probes = ev.probes(mids);
        for (b, p) in batch.iter().zip(probes) {
            let halves = if p.at < b.hi.at {
                [Bracket { lo: b.lo, hi: p }, Bracket { lo: p, hi: b.hi }]
            } else {
                // probe pushed past the bracket; keep it as a cluster
                clusters.push(*b);
                continue;
            };
            for h in halves {
                match h.inside() {
                    0 => {}
                    1 => single.push(h),
                    _ if h.width() <= width => clusters.push(h),
                    _ => queue.push(h),
                }
            }
        }
    }
    (single, clusters)
}

/// Illinois regula falsi on `delta_dim` inside a bracket holding exactly one
/// eigenvalue; every update goes through the Sturm count, so the bracket
/// stays certified. Falls back to a bisection step when two steps fail to
/// halve the bracket.
struct Refinement {
    bracket: Bracket,
    index: usize,
    f_lo: (f64, i64),
    f_hi: (f64, i64),
    last_side: i8,
    steps: u32,
    width_ref: f64,
    bisect_next: bool,
    stuck: bool,
}

impl Refinement {
    fn new(bracket: Bracket) -> Self {
        Refinement {
            bracket,
            index: bracket.lo.count,
            f_lo: (bracket.lo.value, bracket.lo.exp),
            f_hi: (bracket.hi.value, bracket.hi.exp),
            last_side: 0,
            steps: 0,
            width_ref: bracket.width(),
            bisect_next: false,
            stuck: false,
        }
    }

    fn done(&self, width: f64) -> bool {
        self.stuck || self.bracket.width() <= width
    }

    fn candidate(&self, width: f64) -> f64 {
        let (lo, w) = (self.bracket.lo.at, self.bracket.width());
        let mut x = lo + 0.5 * w;
        if !self.bisect_next {
            let shift = (self.f_hi.1 - self.f_lo.1).clamp(-1000, 1000) as i32;
            let ratio = self.f_hi.0 / self.f_lo.0 * 2f64.powi(shift);
            if ratio < 0.0 {
                x = lo + w / (1.0 - ratio);
            }
        }
        let margin = 0.5 * width;
        x.clamp(lo + margin, self.bracket.hi.at - margin)
    }

    fn update(&mut self, p: Probe) {
        if p.at >= self.bracket.hi.at || p.at <= self.bracket.lo.at {
            self.stuck = true;
            return;
        }
        if p.count > self.index {
            self.bracket.hi = p;
            self.f_hi = (p.value, p.exp);
            if self.last_side == 1 {
                self.f_lo.0 *= 0.5;
            }
            self.last_side = 1;
        } else {
            self.bracket.lo = p;
            self.f_lo = (p.value, p.exp);
            if self.last_side == -1 {
                self.f_hi.0 *= 0.5;
            }
            self.last_side = -1;
        }
        self.steps += 1;
        self.bisect_next = false;
        if self.steps % 2 == 0 {
            let w = self.bracket.width();
            self.bisect_next = w > 0.5 * self.width_ref;
            self.width_ref = w;
        }
    }
}

/// Refines isolated brackets, keeping all lanes busy.
fn refine_all(ev: &Evaluator<'_>, brackets: &[Bracket], width: f64) -> Vec<(usize, Bracket)> {
    let mut pending = brackets.iter();
    let mut slots: [Option<Refinement>; LANES] = std::array::from_fn(|_| None);
    let mut out = Vec::with_capacity(brackets.len());
    loop {
        for slot in slots.iter_mut().filter(|s| s.is_none()) {
            for b in pending.by_ref() {
                let r = Refinement::new(*b);
                if r.done(width) {
                    out.push((r.index, r.bracket));
                } else {
                    *slot = Some(r);
                    break;
                }
            }
        }
        if slots.iter().all(Option::is_none) {
            break;
        }
        let xs: [f64; LANES] = std::array::from_fn(|lane| match &slots[lane] {
            Some(r) => r.candidate(width),
            None => ev.bound,
        });
        let probes = ev.probes(xs);
        for (slot, p) in slots.iter_mut().zip(probes) {
            if let Some(r) = slot {
                r.update(p);
                if r.done(width) {
                    out.push((r.index, r.bracket));
                    *slot = None;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    SturmBisection,
    DenseCrosscheck,
}

/// Sorted eigenvalues of one sector matrix. Values are physical unless
/// `scale_log2 != 0`, in which case each is a mantissa in units of
/// `2^scale_log2` (only when the physical value would overflow).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub certified_width: f64,
    pub norm_inf: f64,
    pub scale_log2: i64,
    pub method: SpectrumMethod,
    pub crosscheck_deviation: Option<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Smallest gap between consecutive eigenvalues (infinite for dim 1).
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_i |lambda_i + lambda_{dim-1-i}|`.
    pub fn symmetry_defect(&self) -> f64 {
        let v = &self.eigenvalues;
        (0..v.len())
            .map(|i| (v[i] + v[v.len() - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

fn check_tol(tol: f64) -> Result<(), SpectralError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SpectralError::InvalidTolerance(tol));
    }
    if tol < MIN_TOL {
        return Err(SpectralError::ToleranceTooSmall { tol, min: MIN_TOL });
    }
    Ok(())
}

/// All eigenvalues, each bracketed by Sturm counts to width at most
/// `tol * max(1, ||H||_inf)`; cross-checked against a dense QL solve when
/// `dim <= 2000`.
pub fn eigenvalues(matrix: &TridiagonalH1, tol: f64) -> Result<Spectrum, SpectralError> {
    check_tol(tol)?;
    let dim = matrix.dim();
    let hsq = matrix.offdiag_sq_f64();
    let norm = matrix.norm_inf();
    let width = tol * norm.max(1.0);
    let bound = norm + 1.0;

    if dim == 1 {
        return Ok(Spectrum {
            eigenvalues: vec![0.0],
            certified_width: 0.0,
            norm_inf: 0.0,
            scale_log2: 0,
            method: SpectrumMethod::SturmBisection,
            crosscheck_deviation: Some(0.0),
        });
    }
    let ev = Evaluator {
        hsq,
        bound,
        period: check_period(hsq, bound),
    };
    let (single, clusters) = isolate(&ev, dim, width);
    let mut brackets: Vec<(usize, Bracket)> = single
        .par_chunks(256)
        .flat_map_iter(|chunk| refine_all(&ev, chunk, width))
        .collect();
    for c in clusters {
        brackets.extend((c.lo.count..c.hi.count).map(|k| (k, c)));
    }
    brackets.sort_by_key(|(k, _)| *k);
    debug_assert!(brackets.iter().enumerate().all(|(i, (k, _))| i == *k));
    let mut values: Vec<f64> = brackets.iter().map(|(_, b)| b.estimate()).collect();
    let mut certified = brackets.iter().map(|(_, b)| b.width()).fold(0.0, f64::max);

    let crosscheck_deviation = if dim <= CROSSCHECK_MAX_DIM {
        let dense = dense_eigenvalues(matrix.offdiag())?;
        let deviation = dense
            .iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let limit = 10.0 * tol * norm.max(1.0);
        if deviation > limit {
            return Err(SpectralError::CrossCheckFailed {
                deviation,
                bound: limit,
            });
        }
        Some(deviation)
    } else {
        None
    };

    let mut norm_out = norm;
    let mut deviation_out = crosscheck_deviation;
    let mut scale_log2 = matrix.scale_log2();
    if scale_log2 != 0 {
        let unscaled: Vec<f64> = values.iter().map(|&v| matrix.unscale(v)).collect();
        if unscaled.iter().all(|v| v.is_finite()) && matrix.unscale(norm).is_finite() {
            values = unscaled;
            certified = matrix.unscale(certified);
            norm_out = matrix.unscale(norm);
            deviation_out = deviation_out.map(|d| matrix.unscale(d));
            scale_log2 = 0;
        }
    }
    Ok(Spectrum {
        eigenvalues: values,
        certified_width: certified,
        norm_inf: norm_out,
        scale_log2,
        method: SpectrumMethod::SturmBisection,
        crosscheck_deviation: deviation_out,
    })
}

/// Eigenvalues of the zero-diagonal symmetric tridiagonal matrix with
/// couplings `offdiag`, by implicit-shift QL. Ascending.
pub fn dense_eigenvalues(offdiag: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let n = offdiag.len() + 1;
    let mut d = vec![0.0f64; n];
    let mut e = offdiag.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(SpectralError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Dense-solver spectrum, reported in the same shape as [`eigenvalues`].
pub fn dense_spectrum(matrix: &TridiagonalH1) -> Result<Spectrum, SpectralError> {
    let values = dense_eigenvalues(matrix.offdiag())?;
    let norm = matrix.norm_inf();
    let finite = matrix.unscale(norm).is_finite();
    Ok(Spectrum {
        eigenvalues: if finite {
            values.iter().map(|&v| matrix.unscale(v)).collect()
        } else {
            values
        },
        certified_width: 0.0,
        norm_inf: if finite { matrix.unscale(norm) } else { norm },
        scale_log2: if finite { 0 } else { matrix.scale_log2() },
        method: SpectrumMethod::DenseCrosscheck,
        crosscheck_deviation: None,
    })
}

/// Full energies `E0 + g lambda` of one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSpectrum {
    pub sector: String,
    pub e0: String,
    pub g: f64,
    pub spectrum: Spectrum,
    pub total: Vec<f64>,
}

impl SectorSpectrum {
    /// `(E_total, lambda)` pairs in ascending order of lambda.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.total
            .iter()
            .copied()
            .zip(self.spectrum.eigenvalues.iter().copied())
            .collect()
    }
}

pub fn full_spectrum(
    model: &Model,
    sector: &SectorLabel,
    tol: f64,
) -> Result<SectorSpectrum, SpectralError> {
    let matrix = build_tridiagonal(model, sector)?;
    let spectrum = eigenvalues(&matrix, tol)?;
    let e0: BigRational = quantum_numbers(model, &sector.member(model, 0))?.e0;
    let e0_f = e0.to_f64().unwrap_or(f64::NAN);
    let g = model.g();
    let total = if spectrum.scale_log2 == 0 {
        spectrum.eigenvalues.iter().map(|&l| e0_f + g * l).collect()
    } else {
        spectrum.eigenvalues.iter().map(|_| f64::INFINITY).collect()
    };
    Ok(SectorSpectrum {
        sector: sector.to_string(),
        e0: format_rational(&e0),
        g,
        spectrum,
        total,
    })
}

/// Values `P(lambda)` over the eigenvalues, sorted ascending. Coefficients are
/// in ascending powers: `P(t) = c0 + c1 t + c2 t^2 + ...`.
pub fn poly_spectrum(
    matrix: &TridiagonalH1,
    coeffs: &[f64],
    tol: f64,
) -> Result<Vec<f64>, SpectralError> {
    if coeffs.is_empty() {
        return Err(SpectralError::EmptyPolynomial);
    }
    let spectrum = eigenvalues(matrix, tol)?;
    if spectrum.scale_log2 != 0 {
        return Err(SpectralError::Unrepresentable);
    }
    let mut out: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .map(|&x| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c))
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}
