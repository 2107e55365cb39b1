//! Exact decision procedure for `K_α, K_α⁺ : L^p → L^q`.
//!
//! Everything is decided on `x = 1/p`, `y = 1/q` and `α` as exact rationals,
//! since the regions differ only in whether boundary segments are included.
//! Writing `D = d + 1` and `t = α/D`:
//!
//! | order            | bounded                                   | compact             |
//! |------------------|-------------------------------------------|---------------------|
//! | `α ≤ 0`          | everywhere                                | everywhere          |
//! | `0 < α < D`      | `y ≥ x + t − 1`, strict on `x = 1, y = 0`, and `y > 0` at `x = 1 − t` | `y > x + t − 1` |
//! | `α = D`          | `0 < x < 1, y ≥ x` or `x = 0, y > 0`      | bounded and `y > x` |
//! | `D < α < D + 1`  | `y > x + α − D`                           | same as bounded     |
//! | `α ≥ D + 1`      | nowhere                                   | nowhere             |

use crate::error::domain;
use crate::{Params, Result};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `(1/p, 1/q)` in the unit square; `0` encodes the exponent `∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExponentPair {
    inv_p: BigRational,
    inv_q: BigRational,
}

impl ExponentPair {
    pub fn new(inv_p: BigRational, inv_q: BigRational) -> Result<Self> {
        for (name, v) in [("1/p", &inv_p), ("1/q", &inv_q)] {
            if v.is_negative() || *v > BigRational::one() {
                return Err(domain!("{name} = {v} is outside [0, 1]"));
            }
        }
        Ok(ExponentPair { inv_p, inv_q })
    }

    /// From small-integer reciprocals `a/b`, `c/e`.
    pub fn from_ratios(p_num: i64, p_den: i64, q_num: i64, q_den: i64) -> Result<Self> {
        if p_den == 0 || q_den == 0 {
            return Err(domain!("zero denominator"));
        }
        ExponentPair::new(ratio(p_num, p_den), ratio(q_num, q_den))
    }

    /// Parses exponent strings such as `"2"`, `"1.5"`, `"7/3"` or `"inf"`.
    pub fn parse(p: &str, q: &str) -> Result<Self> {
        ExponentPair::new(parse_reciprocal(p)?, parse_reciprocal(q)?)
    }

    pub fn inv_p(&self) -> &BigRational {
        &self.inv_p
    }

    pub fn inv_q(&self) -> &BigRational {
        &self.inv_q
    }

    /// `(1/p′, 1/q′) ↦ (1 − 1/q, 1 − 1/p)`, the pair of the adjoint operator.
    pub fn conjugate(&self) -> Self {
        let one = BigRational::one();
        ExponentPair { inv_p: &one - &self.inv_q, inv_q: &one - &self.inv_p }
    }

    /// `p` as a float (`∞` when `1/p = 0`).
    pub fn p(&self) -> f64 {
        recip_to_exponent(&self.inv_p)
    }

    pub fn q(&self) -> f64 {
        recip_to_exponent(&self.inv_q)
    }

    /// Convex combination `θ·self + (1−θ)·other`.
    pub fn combine(&self, other: &Self, theta: &BigRational) -> Result<Self> {
        if theta.is_negative() || *theta > BigRational::one() {
            return Err(domain!("θ = {theta} is outside [0, 1]"));
        }
        let rest = BigRational::one() - theta;
        ExponentPair::new(theta * &self.inv_p + &rest * &other.inv_p, theta * &self.inv_q + &rest * &other.inv_q)
    }
}

impl core::fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "(1/p, 1/q) = ({}, {})", self.inv_p, self.inv_q)
    }
}

fn recip_to_exponent(r: &BigRational) -> f64 {
    if r.is_zero() {
        f64::INFINITY
    } else {
        1.0 / to_f64(r)
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a/b"`, a decimal such as `"-1.25e-3"`, or an integer, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_rational(num)?;
        let d = parse_rational(den)?;
        if d.is_zero() {
            return Err(domain!("zero denominator in {s:?}"));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| domain!("bad exponent in {s:?}"))?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() || !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(domain!("{s:?} is not a number"));
    }
    let all: String = [int_part, frac_part].concat();
    let n: BigInt = all.parse().map_err(|_| domain!("{s:?} is not a number"))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(n);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -r } else { r })
}

/// `1/p` for an exponent string (`"inf"`, `"∞"`, `"a/b"` or a decimal ≥ 1).
pub fn parse_reciprocal(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
        return Ok(BigRational::zero());
    }
    let v = parse_rational(t)?;
    if v < BigRational::one() {
        return Err(domain!("exponent {t} must be at least 1"));
    }
    Ok(v.recip())
}

/// The shortest decimal that round-trips to `x`, as an exact rational.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(domain!("{x} is not finite"));
    }
    parse_rational(&format!("{x:e}"))
}

/// Boundedness and compactness of `K_α` (identical regions for `K_α⁺`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub bounded: bool,
    pub compact: bool,
    /// Which case of the decision table fired, e.g. `"subcritical:interior"`.
    pub clause: String,
}

impl Verdict {
    fn new(bounded: bool, compact: bool, clause: &str) -> Self {
        Verdict { bounded, compact: compact && bounded, clause: clause.to_string() }
    }
}

/// Suffix appended to the clause when the verdict flips within `1e-12` of `α`.
pub const AMBIGUOUS_SUFFIX: &str = ";boundary-ambiguous";

/// Classifies `K_α : L^p → L^q` for a floating-point `α`.
///
/// `α` is read as the shortest decimal that represents it. If that decimal
/// has more than 12 significant digits it is treated as inexact, and the
/// clause is marked ambiguous when `α ± 1e-12` yields a different verdict.
pub fn classify(params: &Params, e: &ExponentPair) -> Verdict {
    let alpha = rational_from_f64(params.alpha).expect("Params guarantees a finite α");
    let mut v = classify_exact(params.d, &alpha, e);
    if significant_digits(params.alpha) > 12 {
        let eps = ratio(1, 1_000_000_000_000);
        let lo = classify_exact(params.d, &(&alpha - &eps), e);
        let hi = classify_exact(params.d, &(&alpha + &eps), e);
        if (lo.bounded, lo.compact) != (v.bounded, v.compact) || (hi.bounded, hi.compact) != (v.bounded, v.compact) {
            v.clause.push_str(AMBIGUOUS_SUFFIX);
        }
    }
    v
}

fn significant_digits(x: f64) -> usize {
    let s = format!("{x:e}");
    let mantissa = s.split('e').next().unwrap_or("");
    mantissa.bytes().filter(|b| b.is_ascii_digit()).count()
}

/// Classifies with an exact rational `α`.
pub fn classify_exact(d: usize, alpha: &BigRational, e: &ExponentPair) -> Verdict {
    let zero = BigRational::zero();
    let one = BigRational::one();
    let big_d = BigRational::from_integer(BigInt::from(d as u64 + 1));
    let (x, y) = (&e.inv_p, &e.inv_q);
    if *alpha <= zero {
        return Verdict::new(true, true, "nonpositive-order");
    }
    if *alpha < big_d {
        let t = alpha / &big_d;
        let critical = &one - &t;
        let gap = y - (x - &critical);
        return if *x == one {
            let ok = *y > t;
            Verdict::new(ok, ok, "subcritical:l1-source")
        } else if *x > critical {
            Verdict::new(!gap.is_negative(), gap.is_positive(), "subcritical:interior")
        } else if *x == critical {
            let ok = y.is_positive();
            Verdict::new(ok, ok, "subcritical:critical-p")
        } else {
            Verdict::new(true, true, "subcritical:large-p")
        };
    }
    if *alpha == big_d {
        return if *x == one {
            Verdict::new(false, false, "projection:l1-source")
        } else if x.is_zero() {
            let ok = y.is_positive();
            Verdict::new(ok, ok, "projection:linf-source")
        } else {
            Verdict::new(y >= x, y > x, "projection:interior")
        };
    }
    let s = alpha - &big_d;
    if s < one {
        let ok = *y > x + &s;
        let clause = if x.is_zero() { "supercritical:linf-source" } else { "supercritical:interior" };
        return Verdict::new(ok, ok, clause);
    }
    Verdict::new(false, false, "divergent-order")
}

/// The weak-type target exponent `(d+1)/α` of `L¹ → L^{(d+1)/α, ∞}`.
pub fn weak_type_exponent(params: &Params) -> Result<BigRational> {
    let alpha = rational_from_f64(params.alpha)?;
    let big_d = BigRational::from_integer(BigInt::from(params.d as u64 + 1));
    if !(alpha.is_positive() && alpha <= big_d) {
        return Err(domain!("weak type (1, (d+1)/α) needs 0 < α ≤ d+1, got α = {}", params.alpha));
    }
    Ok(big_d / alpha)
}

/// Whether `Σ n^t z₁^n` lies in `L^p(𝔹^d)`: `p(t+1) < d+1`, or `t < −1`
/// when `p = ∞`.
pub fn witness_membership(params: &Params, t: f64, p: f64) -> Result<bool> {
    if !(p >= 1.0) || t.is_nan() {
        return Err(domain!("need p ≥ 1 and a real t"));
    }
    if p.is_infinite() {
        return Ok(t < -1.0);
    }
    Ok(p * (t + 1.0) < params.bergman_order())
}

/// A corner of a region polygon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolygonVertex {
    pub inv_p: BigRational,
    pub inv_q: BigRational,
    /// Whether the corner itself belongs to the region.
    pub included: bool,
}

/// A convex polygon listed counter-clockwise; edge `i` joins vertex `i` to vertex `i + 1` (cyclically)
/// and `closed_edges[i]` says whether its relative interior is included.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegionPolygon {
    pub vertices: Vec<PolygonVertex>,
    pub closed_edges: Vec<bool>,
}

impl RegionPolygon {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// One grid point of a type diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramCell {
    pub pair: ExponentPair,
    pub verdict: Verdict,
}

/// Rasterized type diagram plus exact region outlines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramRegion {
    pub resolution: usize,
    /// Row-major over `1/q` descending, `1/p` ascending.
    pub cells: Vec<DiagramCell>,
    pub bounded: RegionPolygon,
    pub compact: RegionPolygon,
}

/// Classifies the `resolution × resolution` grid `(i, j)/(resolution − 1)`
/// and returns the exact outlines of the bounded and compact regions.
pub fn diagram_region(params: &Params, resolution: usize) -> Result<DiagramRegion> {
    let alpha = rational_from_f64(params.alpha)?;
    raster(params.d, &alpha, resolution, |pair| classify(params, pair))
}

/// [`diagram_region`] with an exact rational `α`.
pub fn diagram_region_exact(d: usize, alpha: &BigRational, resolution: usize) -> Result<DiagramRegion> {
    raster(d, alpha, resolution, |pair| classify_exact(d, alpha, pair))
}

fn raster(d: usize, alpha: &BigRational, resolution: usize, decide: impl Fn(&ExponentPair) -> Verdict) -> Result<DiagramRegion> {
    if resolution < 8 {
        return Err(domain!("resolution {resolution} is below the minimum of 8"));
    }
    let n = resolution as i64 - 1;
    let mut cells = Vec::with_capacity(resolution * resolution);
    for j in (0..=n).rev() {
        for i in 0..=n {
            let pair = ExponentPair::from_ratios(i, n, j, n)?;
            let verdict = decide(&pair);
            cells.push(DiagramCell { pair, verdict });
        }
    }
    let (bounded, compact) = region_polygons(d, alpha);
    Ok(DiagramRegion { resolution, cells, bounded, compact })
}

fn vertex(x: BigRational, y: BigRational, included: bool) -> PolygonVertex {
    PolygonVertex { inv_p: x, inv_q: y, included }
}

/// Exact outlines `(bounded, compact)` for order `α` in dimension `d`.
pub fn region_polygons(d: usize, alpha: &BigRational) -> (RegionPolygon, RegionPolygon) {
    let zero = BigRational::zero();
    let one = BigRational::one();
    let big_d = BigRational::from_integer(BigInt::from(d as u64 + 1));
    if *alpha <= zero {
        let square = RegionPolygon {
            vertices: vec![
                vertex(zero.clone(), zero.clone(), true),
                vertex(one.clone(), zero.clone(), true),
                vertex(one.clone(), one.clone(), true),
                vertex(zero.clone(), one.clone(), true),
            ],
            closed_edges: vec![true; 4],
        };
        return (square.clone(), square);
    }
    if *alpha < big_d {
        let t = alpha / &big_d;
        let vertices = vec![
            vertex(zero.clone(), zero.clone(), true),
            vertex(&one - &t, zero.clone(), false),
            vertex(one.clone(), t.clone(), false),
            vertex(one.clone(), one.clone(), true),
            vertex(zero.clone(), one.clone(), true),
        ];
        let bounded = RegionPolygon { vertices: vertices.clone(), closed_edges: vec![true; 5] };
        let compact = RegionPolygon { vertices, closed_edges: vec![true, false, true, true, true] };
        return (bounded, compact);
    }
    if *alpha == big_d {
        let vertices = vec![
            vertex(zero.clone(), zero.clone(), false),
            vertex(one.clone(), one.clone(), false),
            vertex(zero.clone(), one.clone(), true),
        ];
        let bounded = RegionPolygon { vertices: vertices.clone(), closed_edges: vec![true, true, true] };
        let compact = RegionPolygon { vertices, closed_edges: vec![false, true, true] };
        return (bounded, compact);
    }
    let s = alpha - &big_d;
    if s < one {
        let region = RegionPolygon {
            vertices: vec![
                vertex(zero.clone(), s.clone(), false),
                vertex(&one - &s, one.clone(), false),
                vertex(zero.clone(), one.clone(), true),
            ],
            closed_edges: vec![false, true, true],
        };
        return (region.clone(), region);
    }
    (RegionPolygon::default(), RegionPolygon::default())
}
