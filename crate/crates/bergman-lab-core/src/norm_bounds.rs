//! Closed-form norms and norm bounds for `K_α` and `K_α⁺`.
//!
//! All constants are ratios of Gamma functions and are evaluated in log space.
//! The basic building block is the Gauss sum
//!
//! ```text
//! G(a) = ₂F₁(a/2, a/2; d+1; 1) = Γ(d+1)Γ(d+1−a) / Γ²(d+1−a/2),   a < d+1,
//! ```
//!
//! the supremum over `z` of `∫ |1−⟨z,w⟩|^{−a} dv(w)`.

use crate::classifier::{classify, rational_from_f64, to_f64, ExponentPair};
use crate::error::domain;
use crate::kernel_integrals::trace_closed_form_disc;
use crate::special_fn::log_gamma;
use crate::{Error, Params, Result};
use alloc::format;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Whether a bound is attained or only dominates the norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    Upper,
}

/// Which operators the `kind` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// The same statement holds for `K_α` and `K_α⁺`.
    Both,
    /// Stated for `K_α⁺`; for `K_α` it is an upper bound.
    Positive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormBound {
    pub value: f64,
    pub kind: BoundKind,
    pub operator: Operator,
    /// Short name of the formula that produced the value.
    pub source: &'static str,
}

impl NormBound {
    fn new(value: f64, kind: BoundKind, operator: Operator, source: &'static str) -> Self {
        NormBound { value, kind, operator, source }
    }

    /// The kind as it applies to `K_α` (`signed`) or `K_α⁺`.
    pub fn kind_for(&self, signed: bool) -> BoundKind {
        if signed && self.operator == Operator::Positive {
            BoundKind::Upper
        } else {
            self.kind
        }
    }
}

/// `ln G(a)`, finite for `a < d+1`.
fn ln_gauss(d: usize, a: f64) -> Result<f64> {
    let big_d = d as f64 + 1.0;
    if !(a < big_d) {
        return Err(Error::Divergent(format!("Γ(d+1−a) has a pole or diverges at a = {a} ≥ d+1")));
    }
    Ok(log_gamma(big_d)? + log_gamma(big_d - a)? - 2.0 * log_gamma(big_d - a / 2.0)?)
}

fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Divergent(format!("{what} overflows ({value})")))
    }
}

/// `‖K_α‖_{L¹→L^q} = sup_w ‖k_α(·,w)‖_q = G(qα)^{1/q}`, exact for `qα < d+1`.
///
/// `q = ∞` gives `sup |k_α| = 2^{−α}` when `α ≤ 0`.
pub fn norm_l1_to_lq(params: &Params, q: f64) -> Result<NormBound> {
    if !(q >= 1.0) {
        return Err(domain!("q = {q} must be at least 1"));
    }
    let alpha = params.alpha;
    if q.is_infinite() {
        if alpha > 0.0 {
            return Err(Error::Divergent(format!("‖K_α‖_{{L¹→L^∞}} is infinite for α = {alpha} > 0")));
        }
        return Ok(NormBound::new(libm::exp2(-alpha), BoundKind::Exact, Operator::Both, "kernel-supremum"));
    }
    let a = q * alpha;
    if !(a < params.bergman_order()) {
        return Err(Error::Divergent(format!("‖K_α‖_{{L¹→L^q}} is infinite: q = {q} ≥ (d+1)/α = {}", params.bergman_order() / alpha)));
    }
    let value = finite(libm::exp(ln_gauss(params.d, a)? / q), "‖K_α‖_{L¹→L^q}")?;
    Ok(NormBound::new(value, BoundKind::Exact, Operator::Both, "sup-kernel-mass"))
}

/// `‖K_α‖_{L^p→L^∞} = ‖K_α⁺‖_{L^p→L^∞} = G(p′α)^{1/p′}`, the adjoint of
/// [`norm_l1_to_lq`] at `q = p′`.
pub fn norm_lp_to_linf(params: &Params, p: f64) -> Result<NormBound> {
    if !(p >= 1.0) {
        return Err(domain!("p = {p} must be at least 1"));
    }
    let conjugate = if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    };
    let mut b = norm_l1_to_lq(params, conjugate)?;
    if b.source == "sup-kernel-mass" {
        b.source = "dual-sup-kernel-mass";
    }
    Ok(b)
}

/// `‖K_α⁺‖_{L^∞→L¹} = (4/(α−2)²)(Γ(3−α)/Γ²(2−α/2) − 1)` on the disc,
/// `2 < α < 3`; an upper bound for `K_α`.
///
/// This is `∫ ₂F₁(α/2, α/2; 2; r) dr`, the same function of `α/2` as the
/// disc Hilbert–Schmidt trace, and is evaluated through it so the value stays
/// accurate as `α → 2`.
pub fn norm_linf_to_l1_exact_d1(alpha: f64) -> Result<NormBound> {
    if !(alpha > 2.0 && alpha < 3.0) {
        return Err(domain!("the disc L^∞ → L¹ formula needs 2 < α < 3, got {alpha}"));
    }
    let value = trace_closed_form_disc(alpha / 2.0)?;
    Ok(NormBound::new(value, BoundKind::Exact, Operator::Positive, "disc-hypergeometric-antiderivative"))
}

/// Upper bound on `‖K_α⁺‖_{L^∞→L^q}` for `d+1 < α < d+2`, `q(α−d−1) < 1`:
///
/// ```text
/// Γ(d+1)^{1+1/q} Γ(α−d−1) Γ(q(d+1−α)+1)^{1/q} / (Γ(α/2)² Γ(q(d+1−α)+d+1)^{1/q})
/// ```
pub fn upper_bound_linf_to_lq(params: &Params, q: f64) -> Result<NormBound> {
    let big_d = params.bergman_order();
    let alpha = params.alpha;
    if !(alpha > big_d && alpha < big_d + 1.0) {
        return Err(domain!("this bound needs d+1 < α < d+2, got α = {alpha}"));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(domain!("q = {q} must be finite and at least 1"));
    }
    let shift = q * (big_d - alpha);
    if !(shift + 1.0 > 0.0) {
        return Err(Error::Divergent(format!("q = {q} ≥ 1/(α−d−1): Γ(q(d+1−α)+1) has left its domain")));
    }
    let ln = (1.0 + 1.0 / q) * log_gamma(big_d)? + log_gamma(alpha - big_d)? + log_gamma(shift + 1.0)? / q
        - 2.0 * log_gamma(alpha / 2.0)?
        - log_gamma(shift + big_d)? / q;
    let value = finite(libm::exp(ln), "‖K_α⁺‖_{L^∞→L^q} bound")?;
    Ok(NormBound::new(value, BoundKind::Upper, Operator::Positive, "hypergeometric-euler-majorant"))
}

/// Best available closed-form upper bound on `‖K_α‖_{L^p→L^q}`.
///
/// * `α ≤ 0` or `0 < α < d+1` with `1/p − 1 + α/(d+1) < 1/q ≤ 1/p`:
///   `G(α/(1−δ))^{1−δ}` with `δ = 1/p − 1/q`, exact when `q = ∞`.
/// * the same orders with `1/q > 1/p`: the diagonal bound `G(α)`, since
///   `‖·‖_q ≤ ‖·‖_p` on a probability space.
/// * `d+1 < α < d+2`: the `L^∞ → L^{1/(1/q−1/p)}` majorant, which interpolation
///   with its adjoint transfers to `(1/p, 1/q)`.
///
/// Bounded pairs on the critical line `1/q = 1/p − 1 + α/(d+1)` and all pairs
/// at `α = d+1` have no closed-form constant and return an error.
pub fn upper_bound_general(params: &Params, e: &ExponentPair) -> Result<NormBound> {
    let verdict = classify(params, e);
    if !verdict.bounded {
        return Err(Error::Divergent(format!("K_α is unbounded at {e} ({})", verdict.clause)));
    }
    let alpha_q = rational_from_f64(params.alpha)?;
    let big_d = BigRational::from_integer((params.d as i64 + 1).into());
    let (x, y) = (e.inv_p(), e.inv_q());
    let one = BigRational::one();
    if alpha_q.is_zero() {
        return Ok(NormBound::new(1.0, BoundKind::Exact, Operator::Both, "constant-kernel"));
    }
    if alpha_q < big_d {
        if y > x {
            let value = finite(libm::exp(ln_gauss(params.d, params.alpha)?), "diagonal bound")?;
            return Ok(NormBound::new(value, BoundKind::Upper, Operator::Positive, "nested-lebesgue-norms"));
        }
        let delta = x - y;
        let keep = &one - &delta;
        if alpha_q.is_positive() && keep <= &alpha_q / &big_d {
            return Err(domain!("{e} lies on the critical line; no closed-form constant is available"));
        }
        if keep.is_zero() {
            // α < 0, L¹ → L^∞
            return norm_l1_to_lq(params, f64::INFINITY);
        }
        let keep = to_f64(&keep);
        let value = finite(libm::exp(keep * ln_gauss(params.d, params.alpha / keep)?), "interpolated bound")?;
        let kind = if y.is_zero() { BoundKind::Exact } else { BoundKind::Upper };
        let operator = if y.is_zero() { Operator::Both } else { Operator::Positive };
        return Ok(NormBound::new(value, kind, operator, "subcritical-adjoint-interpolation"));
    }
    if alpha_q == big_d {
        return Err(domain!("no closed-form constant for the Bergman projection order α = d+1"));
    }
    let gap = to_f64(&(y - x));
    let mut b = upper_bound_linf_to_lq(params, 1.0 / gap)?;
    b.source = "supercritical-adjoint-interpolation";
    Ok(b)
}

/// Riesz–Thorin combination `M₁^θ M₂^{1−θ}` of bounds at `e1` and `e2`,
/// valid at `θ·e1 + (1−θ)·e2`, which must equal `target`.
pub fn interpolate_norm(
    b1: &NormBound,
    e1: &ExponentPair,
    b2: &NormBound,
    e2: &ExponentPair,
    theta: &BigRational,
    target: &ExponentPair,
) -> Result<NormBound> {
    let combined = e1.combine(e2, theta)?;
    if combined != *target {
        return Err(domain!("θ-combination of the endpoints is {combined}, not {target}"));
    }
    if theta.is_one() {
        return Ok(b1.clone());
    }
    if theta.is_zero() {
        return Ok(b2.clone());
    }
    let th = to_f64(theta);
    let value = libm::exp(th * libm::log(b1.value) + (1.0 - th) * libm::log(b2.value));
    let operator = if b1.operator == Operator::Both && b2.operator == Operator::Both { Operator::Both } else { Operator::Positive };
    Ok(NormBound::new(value, BoundKind::Upper, operator, "riesz-thorin"))
}

/// Exponents `(1/p, 1/s)` of a bilinear form `∫∫ f(w) g(z) |1−⟨z,w⟩|^{−α}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HlsExponents {
    pub inv_p: BigRational,
    pub inv_s: BigRational,
}

impl HlsExponents {
    pub fn new(inv_p: BigRational, inv_s: BigRational) -> Result<Self> {
        let one = BigRational::one();
        for (name, v) in [("1/p", &inv_p), ("1/s", &inv_s)] {
            if !v.is_positive() || *v >= one {
                return Err(domain!("{name} = {v} must lie strictly between 0 and 1"));
            }
        }
        Ok(HlsExponents { inv_p, inv_s })
    }

    /// Parses exponent strings such as `"2"` or `"4/3"`.
    pub fn parse(p: &str, s: &str) -> Result<Self> {
        HlsExponents::new(crate::classifier::parse_reciprocal(p)?, crate::classifier::parse_reciprocal(s)?)
    }

    pub fn p(&self) -> f64 {
        1.0 / to_f64(&self.inv_p)
    }

    pub fn s(&self) -> f64 {
        1.0 / to_f64(&self.inv_s)
    }

    /// The operator pair `(1/p, 1 − 1/s)`: the form is `⟨K_α⁺ f, g⟩` with
    /// `K_α⁺ : L^p → L^{s′}`.
    pub fn operator_pair(&self) -> ExponentPair {
        ExponentPair::new(self.inv_p.clone(), BigRational::one() - &self.inv_s).expect("both reciprocals lie in (0, 1)")
    }
}

/// Upper bound on the best constant of the bilinear inequality.
///
/// * `d+1 < α < d+2` needs `1/p + 1/s + α < d+2`.
/// * `α ≤ d+1` needs `1/p + 1/s + α/(d+1) ≤ 2`; the constant is `G(α)` when
///   `1/p + 1/s < 1`, and `G(α/(2−1/p−1/s))^{2−1/p−1/s}` when
///   `1/p − 1 + α/(d+1) < 1 − 1/s ≤ 1/p`.
pub fn hls_constants(params: &Params, e: &HlsExponents) -> Result<NormBound> {
    let alpha = rational_from_f64(params.alpha)?;
    let big_d = BigRational::from_integer((params.d as i64 + 1).into());
    let sum = &e.inv_p + &e.inv_s;
    let two = BigRational::from_integer(2.into());
    if alpha > big_d {
        if !(&sum + &alpha < &big_d + BigRational::one()) {
            return Err(domain!("need 1/p + 1/s + α < d+2 and α < d+2, got 1/p + 1/s = {sum}, α = {}", params.alpha));
        }
        let mut b = upper_bound_general(params, &e.operator_pair())?;
        b.source = "hls-supercritical";
        return Ok(b);
    }
    if !(&sum + &alpha / &big_d <= two) {
        return Err(domain!("need 1/p + 1/s + α/(d+1) ≤ 2, got 1/p + 1/s = {sum}, α = {}", params.alpha));
    }
    let mut b = upper_bound_general(params, &e.operator_pair())?;
    b.source = if sum < BigRational::one() { "hls-subcritical-diagonal" } else { "hls-subcritical-interpolation" };
    b.kind = BoundKind::Upper;
    Ok(b)
}
