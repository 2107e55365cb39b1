//! Randomized checks of the bilinear inequalities, the weak-type estimate and
//! the boundedness classification.
//!
//! Test functions have the form `f(w) = (1−|w|²)^γ Σ a_k w₁^k`. For these the
//! bilinear form `∫∫ f(w) ḡ(z) |1−⟨z,w⟩|^{−α} dv(w) dv(z)` reduces, through the
//! reproducing formula `∫ ⟨z,w⟩^m P(w) dv(w) = P(z)·m!/(d+1)_m`, to one radial
//! integral of a ₂F₁ per degree `k`. This stays accurate where a plain Monte
//! Carlo estimate of the double integral has infinite variance
//! (`α ≥ (d+3)/2`). [`bilinear_form_mc`] cross-checks it where it does not.

use crate::ball_measure::{
    automorphism_coords, inner, integrate, radial_integral_split, sample_uniform_point, seeded_stream, slice_norm, BallPoint, ScaleLadder,
    SliceProfile, Stream,
};
use crate::classifier::{classify, ExponentPair, Verdict};
use crate::error::domain;
use crate::kernel_integrals::{distribution_function, kernel_weak_bound, lorentz_quasinorm, QuadratureEstimate};
use crate::norm_bounds::{hls_constants, HlsExponents, NormBound};
use crate::operator_engine::BLOW_UP_FACTOR;
use crate::par::map_chunks;
use crate::special_fn::{beta, gamma_ratio, hyp2f1_near_one, ln_hyp2f1_near_one, log_gamma, pochhammer};
use crate::{Error, Params, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

/// `(1−|w|²)^weight · Σ coefficients[k] w₁^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub weight: f64,
    pub coefficients: Vec<f64>,
}

impl TestFunction {
    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        TestFunction { weight: 0.0, coefficients }
    }

    /// `(1−|w|²)^{−θ}`.
    pub fn radial_power(theta: f64) -> Self {
        TestFunction { weight: -theta, coefficients: vec![1.0] }
    }

    pub fn eval(&self, w: &[Complex64]) -> Complex64 {
        let norm_sq: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        let poly = self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * w[0] + a);
        poly * libm::pow(1.0 - norm_sq, self.weight)
    }

    /// `‖f‖_{L^p(𝔹^d)}` (finite `p`). Weighted functions must be monomials.
    pub fn lp_norm(&self, p: f64, d: usize) -> Result<f64> {
        if self.weight == 0.0 {
            return slice_norm(&SliceProfile::Coefficients(&self.coefficients), p, d);
        }
        let nonzero: Vec<usize> = (0..self.coefficients.len()).filter(|&k| self.coefficients[k] != 0.0).collect();
        let k = match nonzero.as_slice() {
            [] => return Ok(0.0),
            [k] => *k as f64,
            _ => return Err(domain!("weighted test functions must be monomials")),
        };
        let pg = p * self.weight;
        if !(pg > -1.0) || !p.is_finite() {
            return Err(Error::Divergent(format!("(1−|w|²)^{} is not in L^{p}", self.weight)));
        }
        // ∫ |w₁|^{kp} (1−|w|²)^{pγ} dv = Γ(d+1)Γ(pγ+1)/Γ(d+pγ) · B(kp/2 + 1, pγ + d)
        let df = d as f64;
        let ln = log_gamma(df + 1.0)? + log_gamma(pg + 1.0)? - log_gamma(df + pg)? + libm::log(beta(k * p / 2.0 + 1.0, pg + df)?);
        Ok(libm::fabs(self.coefficients[k as usize]) * libm::exp(ln / p))
    }
}

/// `∫∫ f(w) ḡ(z) |1−⟨z,w⟩|^{−α} dv(w) dv(z)` for real-coefficient test functions.
///
/// With `ρ_k(u) = Γ(d+1)Γ(γ_f+1)(α/2)_k/Γ(k+d+1+γ_f) · ₂F₁(α/2+k, α/2; k+d+1+γ_f; u)`,
/// `K_α⁺[(1−|w|²)^{γ_f} w₁^k](z) = z₁^k ρ_k(|z|²)` and the form is
///
/// ```text
/// Σ_k a_k b_k · d!k!/(d+k−1)! · ∫₀¹ u^{k+d−1} (1−u)^{γ_g} ρ_k(u) du.
/// ```
pub fn bilinear_form(params: &Params, f: &TestFunction, g: &TestFunction) -> Result<f64> {
    let (d, alpha) = (params.d, params.alpha);
    let df = d as f64;
    let big_d = params.bergman_order();
    let (gf, gg) = (f.weight, g.weight);
    if !(gf > -1.0 && gg > -1.0) {
        return Err(Error::Divergent("test function weights must exceed −1".into()));
    }
    let n = f.coefficients.len().min(g.coefficients.len());
    let mut total = 0.0;
    for k in 0..n {
        let ab = f.coefficients[k] * g.coefficients[k];
        if ab == 0.0 {
            continue;
        }
        let kf = k as f64;
        let c = kf + big_d + gf;
        // (1−u)^{γ_g + min(0, c − α − k)} at u = 1
        if !(gg + (c - alpha - kf).min(0.0) > -1.0) {
            return Err(Error::Divergent(format!("the bilinear form diverges at degree {k}")));
        }
        let pre = gamma_ratio(&[df + 1.0, kf + 1.0, big_d, gf + 1.0], &[df + kf, c])? * pochhammer(alpha / 2.0, k as u32);
        if pre == 0.0 {
            continue;
        }
        let mut failure = None;
        let integral = radial_integral_split(
            |r, u| {
                let h = hyp2f1_near_one(alpha / 2.0 + kf, alpha / 2.0, c, u).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    f64::NAN
                });
                libm::pow(r, kf + df - 1.0) * libm::pow(u, gg) * h
            },
            1,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        total += ab * pre * integral?;
    }
    Ok(total)
}

/// Monte Carlo estimate of [`bilinear_form`]: `z` uniform, `w` from
/// `½ dv + ½ (φ_z)_* dv`. The variance is finite for `α < (d+3)/2`.
pub fn bilinear_form_mc(params: &Params, f: &TestFunction, g: &TestFunction, n: usize, seed: u64) -> Result<QuadratureEstimate> {
    let d = params.d;
    let alpha = params.alpha;
    let power = params.bergman_order();
    QuadratureEstimate::from_sampler(n, seed, |rng: &mut Stream| {
        let z = sample_uniform_point(rng, d);
        let u = sample_uniform_point(rng, d);
        let w = if rng.random::<bool>() { automorphism_coords(z.coords(), u.coords()) } else { u.coords().to_vec() };
        let x = (Complex64::new(1.0, 0.0) - inner(z.coords(), &w)).norm_sqr();
        let h = libm::pow((1.0 - z.norm_sq()) / x, power);
        let value = f.eval(&w) * g.eval(z.coords()).conj();
        value.re * libm::pow(x, -alpha / 2.0) / (0.5 + 0.5 * h)
    })
}

/// Outcome of a randomized verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub params: Params,
    pub n_trials: usize,
    pub seed: u64,
    pub max_ratio: f64,
    /// The constant checked against, when one is known.
    pub bound: Option<NormBound>,
    pub violations: usize,
    /// `(trial parameter, ratio)` for every trial.
    pub curve: Vec<(f64, f64)>,
}

/// Relative slack for quadrature error when comparing a ratio with its bound.
pub const RATIO_ALLOWANCE: f64 = 1e-6;

/// Compares `|B(f,g)|/(‖f‖_p ‖g‖_s)` with the closed-form constant over
/// `n_trials` random pairs. Even trials use polynomials in `z₁` of degree at
/// most 32 with coefficients uniform in `[−1, 1]`; odd trials use radial
/// powers `(1−|z|²)^{−θ}` with `θ` below the integrability threshold.
pub fn verify_hls(params: &Params, e: &HlsExponents, n_trials: usize, seed: u64) -> Result<VerificationReport> {
    let bound = hls_constants(params, e)?;
    let (p, s) = (e.p(), e.s());
    let trials = map_chunks(n_trials, |i| -> Result<(f64, f64)> {
        let mut rng = seeded_stream(seed, i as u64);
        let (f, g) = if i % 2 == 0 {
            (random_polynomial(&mut rng), random_polynomial(&mut rng))
        } else {
            (random_radial(&mut rng, p), random_radial(&mut rng, s))
        };
        let form = bilinear_form(params, &f, &g)?;
        let norms = f.lp_norm(p, params.d)? * g.lp_norm(s, params.d)?;
        let ratio = if norms > 0.0 { libm::fabs(form) / norms } else { 0.0 };
        Ok((i as f64, ratio))
    });
    let curve = trials.into_iter().collect::<Result<Vec<_>>>()?;
    let max_ratio = curve.iter().map(|c| c.1).fold(0.0, f64::max);
    let violations = curve.iter().filter(|c| c.1 > bound.value * (1.0 + RATIO_ALLOWANCE)).count();
    Ok(VerificationReport { params: *params, n_trials, seed, max_ratio, bound: Some(bound), violations, curve })
}

fn random_polynomial(rng: &mut Stream) -> TestFunction {
    let degree = rng.random_range(0..=32usize);
    TestFunction::polynomial((0..=degree).map(|_| rng.random_range(-1.0..=1.0)).collect())
}

fn random_radial(rng: &mut Stream, p: f64) -> TestFunction {
    // θ ∈ [−1/2, 0.95/p)
    let top = 0.95 / p;
    TestFunction::radial_power(-0.5 + (top + 0.5) * rng.random::<f64>())
}

/// Number of Monte Carlo points per weak-type trial.
pub const WEAK_TYPE_SAMPLES: usize = 1 << 16;

/// Empirical weak-type constant of `K_α : L¹ → L^{(d+1)/α, ∞}`.
///
/// Each trial draws up to four normalized ball bumps `1_B / v(B)` centred at
/// random points near the sphere, with radius half the distance to it. By the
/// mean-value property `K_α` maps such a bump to `k_α(·, centre)` exactly, so
/// `K_α f = Σ c_j k_α(·, z_j)` and only its distribution function is sampled.
/// No constant is asserted: `bound` is `None` and `violations` is 0.
pub fn verify_weak_type(params: &Params, n_trials: usize, seed: u64) -> Result<VerificationReport> {
    let (d, alpha) = (params.d, params.alpha);
    let big_d = params.bergman_order();
    if !(alpha > 0.0 && alpha <= big_d) {
        return Err(domain!("weak type (1, (d+1)/α) needs 0 < α ≤ d+1, got α = {alpha}"));
    }
    let trials = map_chunks(n_trials, |i| -> Result<(f64, f64)> {
        let mut rng = seeded_stream(seed, i as u64);
        let m = rng.random_range(1..=4usize);
        let mut centres = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for _ in 0..m {
            let depth = 1.0 + 7.0 * rng.random::<f64>();
            let radius = 1.0 - libm::exp2(-depth);
            let dir = sample_uniform_point(&mut rng, d);
            let scale = radius / libm::sqrt(dir.norm_sq()).max(1e-300);
            centres.push(dir.coords().iter().map(|c| c * scale).collect::<Vec<_>>());
            weights.push(rng.random::<f64>() + 0.1);
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let peak = centres.iter().map(|c| libm::pow(1.0 - libm::sqrt(norm_sq(c)), -alpha)).fold(0.0, f64::max);
        let lambdas = level_grid(libm::pow(2.0, -alpha) * 0.5, peak * 2.0);
        let masses = mixture_distribution(params, &centres, &weights, &lambdas, WEAK_TYPE_SAMPLES, seed ^ ((i as u64) << 20))?;
        let q = big_d / alpha;
        let quasi = lambdas.iter().zip(&masses).map(|(&l, &m)| l * libm::pow(m, 1.0 / q)).fold(0.0, f64::max);
        Ok((i as f64, quasi))
    });
    let curve = trials.into_iter().collect::<Result<Vec<_>>>()?;
    let max_ratio = curve.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(VerificationReport { params: *params, n_trials, seed, max_ratio, bound: None, violations: 0, curve })
}

fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

fn level_grid(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (libm::log2(lo), libm::log2(hi));
    let n = (libm::ceil((b - a) * 32.0) as usize).max(2);
    (0..=n).map(|i| libm::exp2(a + (b - a) * i as f64 / n as f64)).collect()
}

/// Distribution function of `|Σ c_j k_α(·, z_j)|` under `dv`, sampled from the
/// [`ScaleLadder`] toward all centres.
fn mixture_distribution(
    params: &Params,
    centres: &[Vec<Complex64>],
    weights: &[f64],
    lambdas: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let one = Complex64::new(1.0, 0.0);
    let refs: Vec<&[Complex64]> = centres.iter().map(|c| c.as_slice()).collect();
    let ladder = ScaleLadder::toward(params.d, &refs);
    let chunk = 1usize << 14;
    let parts = map_chunks(n.div_ceil(chunk), |c| {
        let mut rng = seeded_stream(seed, c as u64);
        let len = chunk.min(n - c * chunk);
        let mut acc = vec![0.0; lambdas.len()];
        for _ in 0..len {
            let z = ladder.sample(&mut rng);
            let weight = 1.0 / ladder.density(&z);
            let mut value = Complex64::new(0.0, 0.0);
            for (zj, &cj) in centres.iter().zip(weights) {
                value += ((one - inner(&z, zj)).ln() * -params.alpha).exp() * cj;
            }
            let k = value.norm();
            for (a, &l) in acc.iter_mut().zip(lambdas) {
                if k > l {
                    *a += weight;
                }
            }
        }
        acc
    });
    let mut masses = vec![0.0; lambdas.len()];
    for part in parts {
        for (m, v) in masses.iter_mut().zip(part) {
            *m += v;
        }
    }
    Ok(masses.into_iter().map(|v| (v / n as f64).clamp(0.0, 1.0)).collect())
}

/// Weak and strong norms of `K_α` applied to bumps concentrating at the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFamilyReport {
    pub ks: Vec<u32>,
    /// Sampled `L^{(d+1)/α, ∞}` quasinorms (`‖f_k‖₁ = 1`).
    pub weak: Vec<f64>,
    /// Exact `L^{(d+1)/α}` norms.
    pub strong: Vec<f64>,
    pub weak_growth: f64,
    pub strong_growth: f64,
    /// Uniform bound on the weak quasinorm of a single kernel.
    pub weak_bound: f64,
    /// Weak quasinorm of the boundary kernel `|1−⟨·,e₁⟩|^{−α}`, the `k → ∞` limit.
    pub weak_limit: f64,
}

/// Bumps `f_k = 1_B / v(B)` on the ball of radius `2^{−k−1}` centred at
/// `(1 − 2^{−k}) e₁`, for each `k` in `ks`. `K_α f_k = k_α(·, z_k)`, whose
/// strong norm is `₂F₁((d+1)/2, (d+1)/2; d+1; |z_k|²)^{α/(d+1)}`.
pub fn concentrating_bumps(params: &Params, ks: &[u32], n: usize, seed: u64) -> Result<BumpFamilyReport> {
    let big_d = params.bergman_order();
    let alpha = params.alpha;
    if !(alpha > 0.0 && alpha <= big_d) || ks.is_empty() {
        return Err(domain!("needs 0 < α ≤ d+1 and at least one k"));
    }
    let q = big_d / alpha;
    let mut weak = Vec::with_capacity(ks.len());
    let mut strong = Vec::with_capacity(ks.len());
    for &k in ks {
        let gap = libm::exp2(-(k as f64));
        let z = BallPoint::on_axis(params.d, 1.0 - gap)?;
        // 1 − |z|² = gap(2 − gap)
        let u = gap * (2.0 - gap);
        let lambdas = level_grid(libm::pow(2.0 - gap, -alpha) * 0.5, libm::pow(gap, -alpha) * 2.0);
        let profile = distribution_function(params, &z, &lambdas, n, seed.wrapping_add(k as u64))?;
        weak.push(lorentz_quasinorm(&profile, q)?);
        strong.push(libm::pow(hyp2f1_near_one(big_d / 2.0, big_d / 2.0, big_d, u)?, 1.0 / q));
    }
    let growth = |v: &[f64]| v[v.len() - 1] / v[0];
    Ok(BumpFamilyReport {
        ks: ks.to_vec(),
        weak_growth: growth(&weak),
        strong_growth: growth(&strong),
        weak,
        strong,
        weak_bound: kernel_weak_bound(params),
        weak_limit: boundary_weak_quasinorm(params)?,
    })
}

/// `sup_δ δ^{−α} P(δ)^{α/(d+1)}` with `P(δ) = v{w : |1 − w₁| < δ}`, the weak
/// `L^{(d+1)/α}` quasinorm of the kernel at the boundary point `e₁`.
///
/// `w₁` has density `d(1−|w₁|²)^{d−1}/π` on the disc; in polar coordinates
/// `w₁ = 1 − s e^{iφ}` about `1` this gives
/// `P(δ) = (d/π) ∫₀^δ s ∫_{|φ|<acos(s/2)} (2s cos φ − s²)^{d−1} dφ ds`.
/// As `δ → 0`, `P(δ) ≈ c δ^{d+1}` with `c = d 2^{d−1} Γ(d/2) / (√π (d+1) Γ((d+1)/2))`.
pub fn boundary_weak_quasinorm(params: &Params) -> Result<f64> {
    let (d, alpha) = (params.d, params.alpha);
    let df = d as f64;
    let big_d = params.bergman_order();
    if !(alpha > 0.0 && alpha <= big_d) {
        return Err(domain!("needs 0 < α ≤ d+1"));
    }
    let pi = core::f64::consts::PI;
    let c = libm::exp(
        libm::log(df) + (df - 1.0) * core::f64::consts::LN_2 + log_gamma(df / 2.0)?
            - 0.5 * libm::log(pi)
            - libm::log(big_d)
            - log_gamma(big_d / 2.0)?,
    );
    let mut best = libm::pow(c, alpha / big_d);
    let mut failure = None;
    let mut inner = |s: f64| {
        let phi0 = libm::acos((s / 2.0).min(1.0));
        let mut g = |phi: f64| libm::pow((2.0 * s * libm::cos(phi) - s * s).max(0.0), df - 1.0);
        match integrate(&mut g, -phi0, phi0, 1e-14, 1e-11) {
            Ok(v) => df / pi * s * v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let mut mass = 0.0;
    let mut lo = 0.0;
    for i in 0..=400 {
        let delta = 2.0 * libm::pow(1e-4, 1.0 - i as f64 / 400.0);
        mass += integrate(&mut inner, lo, delta, 1e-16, 1e-10)?;
        lo = delta;
        best = best.max(libm::pow(delta, -alpha) * libm::pow(mass.min(1.0), alpha / big_d));
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(best)
}

/// Empirical verdict of [`probe_boundedness`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmpiricalVerdict {
    ConsistentWithBounded,
    BlowUpDetected,
    Indeterminate,
}

impl EmpiricalVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            EmpiricalVerdict::ConsistentWithBounded => "consistent-with-bounded",
            EmpiricalVerdict::BlowUpDetected => "blow-up-detected",
            EmpiricalVerdict::Indeterminate => "indeterminate",
        }
    }
}

/// Ratios `‖K f‖_q/‖f‖_p` along one test-function family.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeCurve {
    /// Family name, suffixed with `:adjoint` when run on the conjugate pair.
    pub family: String,
    /// Family parameter (`−log₂(1−|z|²)` or `−log₂(1/p − θ)`).
    pub parameter: Vec<f64>,
    pub ratios: Vec<f64>,
    pub outcome: EmpiricalVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessProbe {
    pub pair: ExponentPair,
    pub verdict: EmpiricalVerdict,
    pub classified: Verdict,
    pub curves: Vec<ProbeCurve>,
}

impl BoundednessProbe {
    /// Agreement with the classifier; `None` when indeterminate.
    pub fn agrees(&self) -> Option<bool> {
        match self.verdict {
            EmpiricalVerdict::Indeterminate => None,
            EmpiricalVerdict::BlowUpDetected => Some(!self.classified.bounded),
            EmpiricalVerdict::ConsistentWithBounded => Some(self.classified.bounded),
        }
    }
}

/// Largest last-step growth factor of a tame curve.
const TAME_STEP: f64 = 1.001;
/// Refinement depth of the radial family (`1/p − θ = 2^{−j}`).
const RADIAL_DEPTH: u32 = 30;

/// Looks for blow-up of `K_α : L^p → L^q` along test-function families with
/// closed-form or one-dimensional norms, run on `e` and on the adjoint pair.
///
/// * `bergman-kernel`: `f = (1−⟨·,z⟩)^{−(d+1)}`, `K_α f = (1−⟨·,z⟩)^{−α}`.
/// * `ball-bump`: `f = 1_B/v(B)` for the ball of radius `(1−|z|)/2` about `z`,
///   `K_α f = k_α(·, z)` by the mean-value property.
/// * `radial-power` (only for `α > d+1`): `f = (1−|w|²)^{−θ}` under `K_α⁺`,
///   `θ ↑ 1/p`.
/// * `witness`: the truncated series sweep of
///   [`crate::operator_engine::unboundedness_probe`] (for `α > 0`, finite `p, q`),
///   run only when the families above are inconclusive, and then decisive.
///
/// A curve blows up when it is infinite, or has grown by [`BLOW_UP_FACTOR`] and
/// its last step still rises by more than 0.1%; it is tame when the last step
/// rises by at most 0.1%. Any blow-up decides the verdict; otherwise all curves must be tame.
pub fn probe_boundedness(params: &Params, e: &ExponentPair) -> Result<BoundednessProbe> {
    let classified = classify(params, e);
    let mut curves = Vec::new();
    for (pair, suffix) in [(e.clone(), ""), (e.conjugate(), ":adjoint")] {
        let (p, q) = (pair.p(), pair.q());
        curves.push(finish(format!("bergman-kernel{suffix}"), kernel_curve(params, p, q, false)?));
        curves.push(finish(format!("ball-bump{suffix}"), kernel_curve(params, p, q, true)?));
        if params.alpha > params.bergman_order() {
            curves.push(finish(format!("radial-power{suffix}"), radial_curve(params, p, q)?));
        }
    }
    if combine(&curves) == EmpiricalVerdict::Indeterminate && params.alpha > 0.0 {
        for (pair, suffix) in [(e.clone(), ""), (e.conjugate(), ":adjoint")] {
            let (p, q) = (pair.p(), pair.q());
            if !(p.is_finite() && q.is_finite()) {
                continue;
            }
            let r = crate::operator_engine::unboundedness_probe(params, p, q, 5)?;
            let parameter = r.truncations.iter().map(|&n| n as f64).collect();
            let mut c = finish(format!("witness{suffix}"), (parameter, r.ratios));
            if c.outcome == EmpiricalVerdict::Indeterminate && r.settled {
                c.outcome = EmpiricalVerdict::ConsistentWithBounded;
            }
            curves.push(c);
        }
        // the witness decides when the closed-form families could not
        let witness: Vec<ProbeCurve> = curves.iter().filter(|c| c.family.starts_with("witness")).cloned().collect();
        if !witness.is_empty() && combine(&witness) != EmpiricalVerdict::Indeterminate {
            let verdict = combine(&witness);
            return Ok(BoundednessProbe { pair: e.clone(), verdict, classified, curves });
        }
    }
    let verdict = combine(&curves);
    Ok(BoundednessProbe { pair: e.clone(), verdict, classified, curves })
}

fn combine(curves: &[ProbeCurve]) -> EmpiricalVerdict {
    if curves.iter().any(|c| c.outcome == EmpiricalVerdict::BlowUpDetected) {
        EmpiricalVerdict::BlowUpDetected
    } else if curves.iter().all(|c| c.outcome == EmpiricalVerdict::ConsistentWithBounded) {
        EmpiricalVerdict::ConsistentWithBounded
    } else {
        EmpiricalVerdict::Indeterminate
    }
}

fn finish(family: String, (parameter, ratios): (Vec<f64>, Vec<f64>)) -> ProbeCurve {
    let outcome = curve_outcome(&ratios);
    ProbeCurve { family, parameter, ratios, outcome }
}

fn curve_outcome(r: &[f64]) -> EmpiricalVerdict {
    if r.iter().any(|v| v.is_infinite()) {
        return EmpiricalVerdict::BlowUpDetected;
    }
    let n = r.len();
    if n < 2 {
        return EmpiricalVerdict::Indeterminate;
    }
    let (last, prev) = (r[n - 1], r[n - 2]);
    let min = r.iter().copied().fold(f64::INFINITY, f64::min);
    if last >= BLOW_UP_FACTOR * min && last > prev * TAME_STEP {
        EmpiricalVerdict::BlowUpDetected
    } else if last <= prev * TAME_STEP {
        EmpiricalVerdict::ConsistentWithBounded
    } else {
        EmpiricalVerdict::Indeterminate
    }
}

/// `ln ‖(1−⟨·,z⟩)^{−a}‖_p` at `1 − |z|² = 2^{−j}`.
fn ln_kernel_norm(d: usize, a: f64, p: f64, j: f64) -> Result<f64> {
    let big_d = d as f64 + 1.0;
    if p.is_infinite() {
        // sup = (1 − |z|)^{−a}
        return Ok(-a * ln_gap(j));
    }
    Ok(ln_hyp2f1_near_one(p * a / 2.0, p * a / 2.0, big_d, libm::exp2(-j))? / p)
}

/// `ln(1 − |z|)` at `1 − |z|² = 2^{−j}`.
fn ln_gap(j: f64) -> f64 {
    let u = libm::exp2(-j);
    -j * core::f64::consts::LN_2 - libm::log1p(libm::sqrt(1.0 - u))
}

/// Depths `j` of `1 − |z|² = 2^{−j}`: unit steps to 32, then quarter octaves to 1024.
fn kernel_depths() -> Vec<f64> {
    let mut js: Vec<f64> = (1..=32).map(f64::from).collect();
    js.extend((1..=20).map(|k| libm::round(32.0 * libm::exp2(k as f64 / 4.0))));
    js
}

fn kernel_curve(params: &Params, p: f64, q: f64, bump: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = params.d;
    let big_d = params.bergman_order();
    let parameter = kernel_depths();
    let mut ratios = Vec::with_capacity(parameter.len());
    for &j in &parameter {
        let num = ln_kernel_norm(d, params.alpha, q, j)?;
        let den = if bump {
            // ‖1_B/v(B)‖_p = v(B)^{1/p − 1}, v(B) = ((1−|z|)/2)^{2d}
            let ln_v = 2.0 * d as f64 * (ln_gap(j) - core::f64::consts::LN_2);
            ln_v * (1.0 / p - 1.0)
        } else {
            ln_kernel_norm(d, big_d, p, j)?
        };
        ratios.push(libm::exp(num - den));
    }
    Ok((parameter, ratios))
}

fn radial_curve(params: &Params, p: f64, q: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = params.d;
    let big_d = params.bergman_order();
    let alpha = params.alpha;
    let x = 1.0 / p;
    let mut parameter = Vec::new();
    let mut ratios = Vec::new();
    for j in 0..=RADIAL_DEPTH {
        let theta = x - libm::exp2(-(j as f64));
        // ‖K⁺f‖_q is finite iff q(d+1−θ−α) > −1 (q < ∞) or d+1−θ−α > 0 (q = ∞)
        let margin = if q.is_infinite() { big_d - theta - alpha } else { q * (big_d - theta - alpha) + 1.0 };
        if margin <= 0.0 {
            parameter.push(j as f64);
            ratios.push(f64::INFINITY);
            break;
        }
        if margin < 1e-3 {
            break;
        }
        let den = if p.is_infinite() {
            1.0
        } else {
            let pt = p * theta;
            libm::exp((log_gamma(big_d)? + log_gamma(1.0 - pt)? - log_gamma(big_d - pt)?) / p)
        };
        let c = big_d - theta;
        let pre = gamma_ratio(&[big_d, 1.0 - theta], &[c])?;
        let num = if q.is_infinite() {
            pre * gamma_ratio(&[c, c - alpha], &[c - alpha / 2.0, c - alpha / 2.0])?
        } else {
            let mut failure = None;
            let integral = radial_integral_split(
                |_, u| {
                    let h = hyp2f1_near_one(alpha / 2.0, alpha / 2.0, c, u).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        f64::NAN
                    });
                    libm::pow(pre * h, q)
                },
                d,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            match integral {
                Ok(v) => libm::pow(v, 1.0 / q),
                // too close to the integrability edge for the quadrature
                Err(Error::Divergent(_)) => break,
                Err(e) => return Err(e),
            }
        };
        parameter.push(j as f64);
        ratios.push(num / den);
    }
    Ok((parameter, ratios))
}
