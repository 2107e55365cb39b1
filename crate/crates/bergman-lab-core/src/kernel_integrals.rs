//! Integrals of the kernels `k_α(z,w) = (1−⟨z,w⟩)^{−α}` and `|k_α|`.
//!
//! The central closed form is
//!
//! ```text
//! ∫ (1−|w|²)^γ / |1−⟨z,w⟩|^{2β} dv(w) = Γ(1+d)Γ(1+γ)/Γ(1+d+γ) · ₂F₁(β, β; 1+d+γ; |z|²)
//! ```
//!
//! which gives the kernel mass, the Hilbert–Schmidt trace and the Carleson
//! probe. Monte Carlo estimators draw from a half-and-half mixture of the
//! weighted measure and its image under the automorphism `φ_z`, which keeps
//! importance weights bounded even when the kernel peak is very sharp.

use crate::ball_measure::{
    automorphism_coords, inner, radial_integral_split, seeded_stream, BallPoint, ScaleLadder, Stream, WeightedMeasure, WeightedSampler,
};
use crate::error::domain;
use crate::par::map_chunks;
use crate::special_fn::{gamma_ratio, hyp2f1, hyp2f1_near_one, ln_hyp2f1_near_one, log_gamma, HyperParams};
use crate::{Error, Result};
use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

/// Dimension `d` and kernel order `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub d: usize,
    pub alpha: f64,
}

impl Params {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if d == 0 {
            return Err(domain!("dimension must be at least 1"));
        }
        if !alpha.is_finite() {
            return Err(domain!("α must be finite"));
        }
        Ok(Params { d, alpha })
    }

    /// `d + 1`, the order of the Bergman kernel.
    pub fn bergman_order(&self) -> f64 {
        self.d as f64 + 1.0
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

const CHUNK: usize = 1 << 14;

#[derive(Clone, Copy)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + delta * delta * (self.n as f64 * o.n as f64 / n as f64),
        }
    }
}

impl QuadratureEstimate {
    /// Mean of `n` draws of `sample`. Chunk `i` uses stream `i` of `seed`, so the
    /// result depends only on `(n, seed)` and not on the thread count.
    pub fn from_sampler<F>(n: usize, seed: u64, sample: F) -> Result<Self>
    where
        F: Fn(&mut Stream) -> f64 + Sync,
    {
        if n < 2 {
            return Err(domain!("Monte Carlo needs at least two samples"));
        }
        let chunks = n.div_ceil(CHUNK);
        let parts = map_chunks(chunks, |i| {
            let mut rng = seeded_stream(seed, i as u64);
            let len = CHUNK.min(n - i * CHUNK);
            let mut m = Moments { n: 0, mean: 0.0, m2: 0.0 };
            for _ in 0..len {
                let x = sample(&mut rng);
                m.n += 1;
                let delta = x - m.mean;
                m.mean += delta / m.n as f64;
                m.m2 += delta * (x - m.mean);
            }
            m
        });
        let total = parts.into_iter().fold(Moments { n: 0, mean: 0.0, m2: 0.0 }, Moments::merge);
        if !total.mean.is_finite() || !total.m2.is_finite() {
            return Err(Error::Divergent("Monte Carlo sample mean is not finite".into()));
        }
        let var = total.m2 / (total.n - 1) as f64;
        Ok(QuadratureEstimate { value: total.mean, std_error: libm::sqrt(var / n as f64), n_samples: n })
    }

    /// Whether `target` lies within `k` standard errors.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        libm::fabs(self.value - target) <= k * self.std_error
    }
}

/// `(1−⟨z,w⟩)^{−α}` on the principal branch when `signed`, otherwise
/// `|1−⟨z,w⟩|^{−α}` returned as a real number.
pub fn kernel_eval(params: &Params, z: &BallPoint, w: &BallPoint, signed: bool) -> Result<Complex64> {
    let ip = crate::ball_measure::inner_product(z, w)?;
    let base = Complex64::new(1.0, 0.0) - ip;
    if params.alpha == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if signed {
        // Re(1 − ⟨z,w⟩) > 0 on the ball, so the principal log is smooth
        Ok((base.ln() * -params.alpha).exp())
    } else {
        Ok(Complex64::new(libm::pow(base.norm(), -params.alpha), 0.0))
    }
}

/// `∫ (1−|w|²)^γ |1−⟨z,w⟩|^{−2β} dv(w)` for `|z|² = r` (closed form).
pub fn rudin_integral(params: &Params, beta: f64, gamma: f64, r: f64) -> Result<f64> {
    let df = params.d as f64;
    if !(gamma > -1.0) {
        return Err(domain!("γ = {gamma} must exceed −1"));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(domain!("|z|² = {r} outside [0, 1]"));
    }
    let c = 1.0 + df + gamma;
    if r == 1.0 && !(c - 2.0 * beta > 0.0) {
        return Err(Error::Divergent(format!("at |z| = 1 the integral needs 1 + d + γ − 2β > 0, got {}", c - 2.0 * beta)));
    }
    let pre = gamma_ratio(&[1.0 + df, 1.0 + gamma], &[c])?;
    Ok(pre * hyp2f1(HyperParams::new(beta, beta, c, r)?)?)
}

/// Monte Carlo estimate of [`rudin_integral`] with `n` samples.
///
/// Proposal: `½ dv_γ + ½ (φ_z)_* dv_γ`. The importance weight is
/// `2 |1−⟨z,w⟩|^{−2β} / (c_γ [1 + ((1−|z|²)/|1−⟨w,z⟩|²)^{γ+d+1}])`,
/// bounded whenever `2β < 1 + d + γ`.
pub fn rudin_integral_mc(params: &Params, beta: f64, gamma: f64, r: f64, n: usize, seed: u64) -> Result<QuadratureEstimate> {
    if !(0.0..1.0).contains(&r) {
        return Err(domain!("Monte Carlo requires |z|² = {r} in [0, 1)"));
    }
    let d = params.d;
    let measure = WeightedMeasure::new(d, gamma)?;
    let sampler = WeightedSampler::new(measure);
    let z = BallPoint::on_axis(d, libm::sqrt(r))?;
    let power = gamma + d as f64 + 1.0;
    let one_minus = 1.0 - r;
    QuadratureEstimate::from_sampler(n, seed, |rng| {
        let u = sampler.sample(rng);
        let w = if rng.random::<bool>() { automorphism_coords(z.coords(), u.coords()) } else { u.coords().to_vec() };
        let x = (Complex64::new(1.0, 0.0) - inner(z.coords(), &w)).norm_sqr();
        let h = libm::pow(one_minus / x, power);
        2.0 * libm::pow(x, -beta) / (measure.c_beta * (1.0 + h))
    })
}

/// `∫ |1−⟨z,w⟩|^{−α} dv(w) = ₂F₁(α/2, α/2; d+1; |z|²)` at `|z|² = r`.
///
/// At `r = 1` this is the Gauss value `Γ(d+1)Γ(d+1−α)/Γ²(d+1−α/2)` when
/// `α < d+1` and `+∞` otherwise.
pub fn kernel_mass(params: &Params, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(domain!("|z|² = {r} outside [0, 1]"));
    }
    let (a, c) = (params.alpha / 2.0, params.bergman_order());
    if r == 1.0 && params.alpha >= c {
        return Ok(f64::INFINITY);
    }
    hyp2f1(HyperParams::new(a, a, c, r)?)
}

/// Sampled distribution function `λ ↦ v{w : |k_α(z,w)| > λ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionProfile {
    pub lambdas: Vec<f64>,
    pub masses: Vec<f64>,
}

/// Monte Carlo distribution function of `w ↦ |1−⟨z,w⟩|^{−α}`.
///
/// Samples come from the [`ScaleLadder`] toward `z`, so every level set from
/// the bulk down to the scale `1−|z|` receives a fixed share of the samples.
/// Levels above `(1−|z|)^{−α}` get exact zeros, levels below `(1+|z|)^{−α}`
/// exact ones.
pub fn distribution_function(params: &Params, z: &BallPoint, lambdas: &[f64], n: usize, seed: u64) -> Result<DistributionProfile> {
    if !(params.alpha > 0.0) {
        return Err(domain!("distribution function needs α > 0"));
    }
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(domain!("λ grid must be positive and increasing"));
    }
    if z.dim() != params.d {
        return Err(Error::DimensionMismatch { expected: params.d, got: z.dim() });
    }
    let alpha = params.alpha;
    let zn = libm::sqrt(z.norm_sq());
    let sup = libm::pow(1.0 - zn, -alpha);
    let inf = libm::pow(1.0 + zn, -alpha);
    let ladder = ScaleLadder::toward(params.d, &[z.coords()]);
    let chunks = n.max(1).div_ceil(CHUNK);
    let parts = map_chunks(chunks, |i| {
        let mut rng = seeded_stream(seed, i as u64);
        let len = CHUNK.min(n - i * CHUNK);
        let mut acc = alloc::vec![0.0; lambdas.len()];
        for _ in 0..len {
            let w = ladder.sample(&mut rng);
            let x = (Complex64::new(1.0, 0.0) - inner(&w, z.coords())).norm_sqr();
            let weight = 1.0 / ladder.density(&w);
            let k = libm::pow(x, -alpha / 2.0);
            for (a, &l) in acc.iter_mut().zip(lambdas) {
                if k > l {
                    *a += weight;
                }
            }
        }
        acc
    });
    let mut masses = alloc::vec![0.0; lambdas.len()];
    for part in parts {
        for (m, v) in masses.iter_mut().zip(part) {
            *m += v;
        }
    }
    for (m, &l) in masses.iter_mut().zip(lambdas) {
        *m = if l >= sup {
            0.0
        } else if l < inf {
            1.0
        } else {
            (*m / n as f64).clamp(0.0, 1.0)
        };
    }
    // sampling noise near 1 can break monotonicity only through the clamp
    for i in 1..masses.len() {
        if masses[i] > masses[i - 1] {
            masses[i] = masses[i - 1];
        }
    }
    Ok(DistributionProfile { lambdas: lambdas.to_vec(), masses })
}

/// `max_λ λ · d(λ)^{1/p}` over the grid (`p = ∞` gives the largest level with
/// positive mass).
pub fn lorentz_quasinorm(profile: &DistributionProfile, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(domain!("p = {p} must be at least 1"));
    }
    Ok(profile
        .lambdas
        .iter()
        .zip(&profile.masses)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&l, &m)| if p.is_infinite() { l } else { l * libm::pow(m, 1.0 / p) })
        .fold(0.0, f64::max))
}

/// Uniform bound `max(2^α, (d·2^{3d−1})^{α/(d+1)})` on the weak
/// `L^{(d+1)/α}` quasinorm of `k_α(·, z)`.
pub fn kernel_weak_bound(params: &Params) -> f64 {
    let d = params.d as f64;
    let a = params.alpha;
    libm::pow(2.0, a).max(libm::pow(d * libm::pow(2.0, 3.0 * d - 1.0), a / (d + 1.0)))
}

/// Carleson vanishing probe along `|z|²` in `grid`:
///
/// ```text
/// (1−|z|²)^s ∫ |1−⟨z,w⟩|^{−(s + q(d+1)/p)} dv_γ(w),   γ = q(d+1−α).
/// ```
///
/// Evaluated in Euler-transformed form so that the factor
/// `(1−|z|²)^{q(d+1)(1/q − 1/p − α/(d+1) + 1)}` appears explicitly.
pub fn carleson_probe(params: &Params, p: f64, q: f64, s: f64, grid: &[f64]) -> Result<Vec<f64>> {
    let big_d = params.bergman_order();
    let alpha = params.alpha;
    if !(alpha > 0.0 && alpha < big_d) {
        return Err(domain!("the Carleson probe needs 0 < α < d+1"));
    }
    if !(p > 1.0 && p <= q && q.is_finite()) {
        return Err(domain!("the Carleson probe needs 1 < p ≤ q < ∞"));
    }
    if !(s > 0.0) {
        return Err(domain!("s = {s} must be positive"));
    }
    let gamma = q * (big_d - alpha);
    let b = 0.5 * (s + q * big_d / p);
    let c = big_d + gamma;
    let decay = s + c - 2.0 * b;
    grid.iter()
        .map(|&r| {
            if !(0.0..1.0).contains(&r) {
                return Err(domain!("|z|² = {r} outside [0, 1)"));
            }
            let u = 1.0 - r;
            if c - b > 0.0 && u > 0.0 {
                // both factors can leave the double range for large q
                return Ok(libm::exp(decay * libm::log(u) + ln_hyp2f1_near_one(c - b, c - b, c, u)?));
            }
            Ok(libm::pow(u, decay) * hyp2f1_near_one(c - b, c - b, c, u)?)
        })
        .collect()
}

/// Local log–log slope of the probe between the last two grid points.
/// Positive means the probe still decays like a power of `1−|z|²`.
pub fn carleson_decay_rate(values: &[f64], grid: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 || grid.len() != n {
        return Err(domain!("need at least two matching probe values"));
    }
    let (v1, v2) = (values[n - 2], values[n - 1]);
    let (u1, u2) = (1.0 - grid[n - 2], 1.0 - grid[n - 1]);
    Ok((libm::log(v2) - libm::log(v1)) / (libm::log(u2) - libm::log(u1)))
}

const ZETA: [f64; 19] = [
    1.6449340668482264,
    1.2020569031595942,
    1.0823232337111381,
    1.03692775514337,
    1.0173430619844492,
    1.008349277381923,
    1.0040773561979444,
    1.0020083928260821,
    1.000994575127818,
    1.0004941886041194,
    1.000246086553308,
    1.0001227133475785,
    1.0000612481350588,
    1.000030588236307,
    1.0000152822594086,
    1.0000076371976379,
    1.000003817293265,
    1.0000019082127165,
    1.0000009539620338,
];

fn zeta_int(k: usize) -> f64 {
    if k - 2 < ZETA.len() {
        return ZETA[k - 2];
    }
    let kf = k as f64;
    1.0 + libm::pow(2.0, -kf) + libm::pow(3.0, -kf) + libm::pow(4.0, -kf) + libm::pow(5.0, -kf)
}

/// `(Γ(3−2α)/Γ²(2−α) − 1)/(α−1)²`, continuous through `α = 1` (value π²/6).
pub fn trace_closed_form_disc(alpha: f64) -> Result<f64> {
    if !(alpha < 1.5) {
        return Err(domain!("α = {alpha} ≥ 3/2: not Hilbert–Schmidt on the disc"));
    }
    let h = alpha - 1.0;
    if libm::fabs(h) < 0.25 {
        // ln G = h² Σ_{k≥2} ζ(k)(2^k − 2) h^{k−2} / k
        let mut s = 0.0;
        let mut hk = 1.0;
        for k in 2..64 {
            let term = zeta_int(k) * (libm::ldexp(1.0, k as i32) - 2.0) * hk / k as f64;
            s += term;
            if libm::fabs(term) < 1e-18 * libm::fabs(s) {
                break;
            }
            hk *= h;
        }
        let x = s * h * h;
        // expm1(x)/h² = s · expm1(x)/x
        let ratio = if x == 0.0 { 1.0 } else { libm::expm1(x) / x };
        return Ok(s * ratio);
    }
    let g = libm::exp(log_gamma(3.0 - 2.0 * alpha)? - 2.0 * log_gamma(2.0 - alpha)?);
    Ok((g - 1.0) / (h * h))
}

/// `Tr(K_α* K_α) = ∫∫ |1−⟨z,w⟩|^{−2α} dv dv`, finite iff `α < (d+2)/2`.
///
/// Closed form on the disc; for `d ≥ 2` the radial integral of
/// `₂F₁(α, α; d+1; r)`.
pub fn hs_trace(params: &Params) -> Result<f64> {
    let (d, alpha) = (params.d, params.alpha);
    let limit = (d as f64 + 2.0) / 2.0;
    if !(alpha < limit) {
        return Err(domain!("α = {alpha} ≥ (d+2)/2 = {limit}: K_α is not Hilbert–Schmidt"));
    }
    if alpha == 0.0 {
        return Ok(1.0);
    }
    if d == 1 {
        return trace_closed_form_disc(alpha);
    }
    let c = params.bergman_order();
    let mut failure = None;
    let value = radial_integral_split(
        |_, u| match hyp2f1_near_one(alpha, alpha, c, u) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        d,
    );
    match failure {
        Some(e) => Err(e),
        None => value,
    }
}
