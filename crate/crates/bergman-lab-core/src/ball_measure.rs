//! Geometry and measure on the unit ball 𝔹^d ⊂ ℂ^d.
//!
//! `dv` is Lebesgue measure normalized to total mass 1. Radial integrals use
//! polar coordinates, `∫ g(|z|²) dv(z) = d ∫₀¹ g(r) r^{d−1} dr`, evaluated with
//! adaptive Gauss–Kronrod on dyadic shells that accumulate at `r = 1`.

use crate::error::domain;
use crate::fft::fft;
use crate::special_fn::{beta, log_gamma, pochhammer};
use crate::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// The seeded random stream used by every Monte Carlo routine.
pub type Stream = ChaCha8Rng;

/// Stream number `index` of the family determined by `seed`. Distinct
/// indices give independent streams, which is how chunks and trials are split.
pub fn seeded_stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A point of the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<Complex64>,
}

impl BallPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(domain!("a ball point needs at least one coordinate"));
        }
        let p = BallPoint { coords };
        if !(p.norm_sq() < 1.0) {
            return Err(domain!("|z|² = {} is not below 1", p.norm_sq()));
        }
        Ok(p)
    }

    /// The origin of ℂ^d.
    pub fn origin(d: usize) -> Self {
        BallPoint { coords: vec![Complex64::new(0.0, 0.0); d] }
    }

    /// `(r, 0, …, 0)` for real `0 ≤ r < 1`.
    pub fn on_axis(d: usize, r: f64) -> Result<Self> {
        let mut coords = vec![Complex64::new(0.0, 0.0); d];
        coords[0] = Complex64::new(r, 0.0);
        BallPoint::new(coords)
    }

    pub(crate) fn from_coords_unchecked(coords: Vec<Complex64>) -> Self {
        BallPoint { coords }
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Hermitian pairing `⟨z, w⟩ = Σ z_k · conj(w_k)`.
pub fn inner_product(z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
    if z.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: z.dim(), got: w.dim() });
    }
    Ok(inner(z.coords(), w.coords()))
}

pub(crate) fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

/// The involutive automorphism `φ_z` of the ball exchanging `0` and `z`.
///
/// If `u` has law `dv_γ`, then `φ_z(u)` has density
/// `c_γ (1−|z|²)^{γ+d+1} (1−|w|²)^γ / |1−⟨w,z⟩|^{2(γ+d+1)}`.
pub fn automorphism(z: &BallPoint, u: &BallPoint) -> Result<BallPoint> {
    if z.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: z.dim(), got: u.dim() });
    }
    Ok(BallPoint::from_coords_unchecked(automorphism_coords(z.coords(), u.coords())))
}

pub(crate) fn automorphism_coords(z: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
    let zz: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    if zz == 0.0 {
        return u.iter().map(|c| -c).collect();
    }
    let uz = inner(u, z);
    let s = libm::sqrt(1.0 - zz);
    let denom = Complex64::new(1.0, 0.0) - uz;
    z.iter()
        .zip(u)
        .map(|(&zk, &uk)| {
            let p = zk * (uz / zz);
            (zk - p - (uk - p) * s) / denom
        })
        .collect()
}

/// Equal mixture of the images `(φ_a)_* dv` over centres `a` that step from
/// the origin toward given points one dyadic scale at a time.
///
/// For a target point `z` the centres are `0`, `(1 − 2^{−j}) z/|z|` while
/// `2^{−j} > 1 − |z|`, and `z` itself. The image of `dv` under `φ_a` has
/// density `((1−|a|²)/|1−⟨w,a⟩|²)^{d+1}`, which is `1` for `a = 0`, so the
/// importance weight `1/density` never exceeds the number of centres.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleLadder {
    d: usize,
    centres: Vec<Vec<Complex64>>,
}

impl ScaleLadder {
    /// Ladders toward each of `points`, sharing the origin.
    pub fn toward(d: usize, points: &[&[Complex64]]) -> Self {
        let mut centres = vec![vec![Complex64::new(0.0, 0.0); d]];
        for z in points {
            let r = libm::sqrt(z.iter().map(|c| c.norm_sqr()).sum::<f64>());
            if r == 0.0 {
                continue;
            }
            let mut j = 1;
            while libm::exp2(-(j as f64)) > 1.0 - r {
                let t = (1.0 - libm::exp2(-(j as f64))) / r;
                centres.push(z.iter().map(|c| c * t).collect());
                j += 1;
            }
            centres.push(z.to_vec());
        }
        ScaleLadder { d, centres }
    }

    pub fn len(&self) -> usize {
        self.centres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centres.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let u = sample_uniform_point(rng, self.d);
        let a = &self.centres[rng.random_range(0..self.centres.len())];
        if a.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
            return u.coords;
        }
        automorphism_coords(a, u.coords())
    }

    /// Density of the mixture with respect to `dv` at `w`.
    pub fn density(&self, w: &[Complex64]) -> f64 {
        let power = self.d as f64 + 1.0;
        let one = Complex64::new(1.0, 0.0);
        let total: f64 = self
            .centres
            .iter()
            .map(|a| {
                let aa: f64 = a.iter().map(|c| c.norm_sqr()).sum();
                if aa == 0.0 {
                    1.0
                } else {
                    libm::pow((1.0 - aa) / (one - inner(w, a)).norm_sqr(), power)
                }
            })
            .sum();
        total / self.centres.len() as f64
    }
}

/// `c_β (1−|z|²)^β dv(z)` on 𝔹^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedMeasure {
    pub d: usize,
    pub beta: f64,
    pub c_beta: f64,
}

impl WeightedMeasure {
    pub fn new(d: usize, beta: f64) -> Result<Self> {
        if d == 0 {
            return Err(domain!("dimension must be at least 1"));
        }
        if !(beta > -1.0) {
            return Err(domain!("weight exponent β = {beta} must exceed −1"));
        }
        let df = d as f64;
        let c_beta = libm::exp(log_gamma(df + beta + 1.0)? - log_gamma(df + 1.0)? - log_gamma(beta + 1.0)?);
        Ok(WeightedMeasure { d, beta, c_beta })
    }
}

fn unit_sphere_point<R: Rng + ?Sized>(rng: &mut R, d: usize, radius: f64) -> BallPoint {
    loop {
        let g: Vec<Complex64> = (0..d).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let norm = libm::sqrt(g.iter().map(|c| c.norm_sqr()).sum::<f64>());
        if norm > 0.0 {
            return BallPoint::from_coords_unchecked(g.into_iter().map(|c| c * (radius / norm)).collect());
        }
    }
}

/// One point uniform for `dv`: Gaussian direction, radius `U^{1/(2d)}`.
pub fn sample_uniform_point<R: Rng + ?Sized>(rng: &mut R, d: usize) -> BallPoint {
    let u: f64 = rng.random();
    unit_sphere_point(rng, d, libm::pow(u, 1.0 / (2 * d) as f64))
}

/// `n` i.i.d. points uniform for `dv` on 𝔹^d.
pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Vec<BallPoint> {
    (0..n).map(|_| sample_uniform_point(rng, d)).collect()
}

const TABLE_SIZE: usize = 4096;

/// Sampler for `dv_β`: `|z|²` has the Beta(d, β+1) law, drawn by inverting a
/// 4096-point monotone cubic table of its distribution function.
#[derive(Debug, Clone)]
pub struct WeightedSampler {
    measure: WeightedMeasure,
    u: Vec<f64>,
    t: Vec<f64>,
    slope: Vec<f64>,
}

impl WeightedSampler {
    pub fn new(measure: WeightedMeasure) -> Self {
        let (d, b1) = (measure.d, measure.beta + 1.0);
        // P(|z|² ≤ t) = 1 − (1−t)^{β+1} Σ_{j<d} (β+1)_j t^j / j!
        let cdf = |t: f64| {
            let mut s = 0.0;
            let mut tj = 1.0;
            let mut fact = 1.0;
            for j in 0..d {
                if j > 0 {
                    tj *= t;
                    fact *= j as f64;
                }
                s += pochhammer(b1, j as u32) * tj / fact;
            }
            1.0 - libm::pow(1.0 - t, b1) * s
        };
        let mut u = Vec::with_capacity(TABLE_SIZE);
        let mut t = Vec::with_capacity(TABLE_SIZE);
        for i in 0..TABLE_SIZE {
            let target = 0.5 * (1.0 - libm::cos(core::f64::consts::PI * i as f64 / (TABLE_SIZE - 1) as f64));
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if cdf(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            u.push(target);
            t.push(if i == 0 {
                0.0
            } else if i == TABLE_SIZE - 1 {
                1.0
            } else {
                0.5 * (lo + hi)
            });
        }
        let slope = pchip_slopes(&u, &t);
        WeightedSampler { measure, u, t, slope }
    }

    pub fn measure(&self) -> &WeightedMeasure {
        &self.measure
    }

    /// Inverse distribution function of `|z|²`.
    pub fn radius_sq(&self, p: f64) -> f64 {
        let k = match self.u.partition_point(|&x| x <= p) {
            0 => 0,
            k if k >= self.u.len() => self.u.len() - 2,
            k => k - 1,
        };
        let h = self.u[k + 1] - self.u[k];
        let s = (p - self.u[k]) / h;
        let (h00, h10, h01, h11) =
            ((1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s), s * (1.0 - s) * (1.0 - s), s * s * (3.0 - 2.0 * s), s * s * (s - 1.0));
        let v = h00 * self.t[k] + h10 * h * self.slope[k] + h01 * self.t[k + 1] + h11 * h * self.slope[k + 1];
        v.clamp(0.0, 1.0 - f64::EPSILON)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BallPoint {
        let p: f64 = rng.random();
        let r2 = self.radius_sq(p);
        unit_sphere_point(rng, self.measure.d, libm::sqrt(r2))
    }
}

/// Fritsch–Carlson monotone slopes.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = (0..n - 1).map(|k| x[k + 1] - x[k]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    m
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, libm::fabs((kron - gauss) * h))
}

/// Adaptive Gauss–Kronrod on `[a, b]` to `max(abs_tol, rel_tol·|I|)`.
pub(crate) fn integrate<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    let mut stack: Vec<(f64, f64, f64, f64, u32)> = Vec::new();
    let (v, e) = gk15(f, a, b);
    stack.push((a, b, v, e, 0));
    let mut total = v;
    let mut err = e;
    let mut done = 0.0;
    let mut done_err = 0.0;
    let mut evals = 0usize;
    while let Some(&(_, _, _, _, _)) = stack.last() {
        if err <= abs_tol.max(rel_tol * libm::fabs(total)) {
            break;
        }
        // split the interval with the largest error
        let (idx, _) = stack.iter().enumerate().fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (lo, hi, v, e, depth) = stack.swap_remove(idx);
        if depth >= 60 || !v.is_finite() {
            if !v.is_finite() {
                return Err(Error::Divergent(format!("non-finite integrand near [{lo}, {hi}]")));
            }
            done += v;
            done_err += e;
            total = done + stack.iter().map(|s| s.2).sum::<f64>();
            err = done_err + stack.iter().map(|s| s.3).sum::<f64>();
            if stack.is_empty() {
                break;
            }
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        evals += 30;
        stack.push((lo, mid, v1, e1, depth + 1));
        stack.push((mid, hi, v2, e2, depth + 1));
        total += v1 + v2 - v;
        err += e1 + e2 - e;
        if evals > 2_000_000 {
            return Err(Error::Convergence(format!("adaptive quadrature on [{a}, {b}] did not converge")));
        }
    }
    if !total.is_finite() {
        return Err(Error::Divergent(format!("integral over [{a}, {b}] is not finite")));
    }
    Ok(total)
}

/// `∫_{𝔹^d} g(|z|²) dv(z) = d ∫₀¹ g(r) r^{d−1} dr`.
///
/// Integrable singularities at `r = 1` are handled by summing dyadic shells
/// `1 − r ∈ [2^{−k−1}, 2^{−k}]` and extrapolating their geometric tail.
pub fn radial_integral<G: FnMut(f64) -> f64>(mut g: G, d: usize) -> Result<f64> {
    radial_integral_split(|r, _| g(r), d)
}

/// Same as [`radial_integral`] but `g` receives both `r` and `1 − r`, the latter
/// computed without cancellation, so integrands singular at `r = 1` keep full
/// relative precision deep into the boundary layer.
pub fn radial_integral_split<G: FnMut(f64, f64) -> f64>(mut g: G, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(domain!("dimension must be at least 1"));
    }
    let df = d as f64;
    let mut f = |u: f64| {
        let r = 1.0 - u;
        df * g(r, u) * libm::pow(r, df - 1.0)
    };
    const ABS_TOL: f64 = 1e-12;
    let mut partial = 0.0;
    let mut shells: Vec<f64> = Vec::new();
    let mut previous_estimate = f64::NAN;
    let mut stable = 0;
    let mut growing = 0;
    for k in 0..1000 {
        let hi = libm::ldexp(1.0, -k);
        let lo = 0.5 * hi;
        let shell = integrate(&mut f, lo, hi, ABS_TOL * 1e-3, 1e-13)?;
        partial += shell;
        shells.push(shell);
        if k < 6 {
            continue;
        }
        let n = shells.len();
        let (s2, s1, s0) = (shells[n - 3], shells[n - 2], shells[n - 1]);
        if s0 == 0.0 && s1 == 0.0 {
            return Ok(partial);
        }
        let rho = s0 / s1;
        let rho_prev = s1 / s2;
        let tail = if rho.is_finite() && rho > 0.0 && rho < 1.0 {
            s0 * rho / (1.0 - rho)
        } else if libm::fabs(s0) < ABS_TOL * 1e-3 {
            0.0
        } else {
            f64::NAN
        };
        let estimate = partial + tail;
        if estimate.is_finite() {
            let close = libm::fabs(estimate - previous_estimate) <= ABS_TOL.max(1e-12 * libm::fabs(estimate));
            let steady = libm::fabs(rho - rho_prev) < 1e-3 || libm::fabs(s0) < ABS_TOL * 1e-3;
            if close && steady {
                stable += 1;
                if stable >= 2 {
                    return Ok(estimate);
                }
            } else {
                stable = 0;
            }
        }
        if rho.is_finite() && rho >= 1.0 - 1e-9 && libm::fabs(s0) >= ABS_TOL * 1e-3 {
            growing += 1;
        } else {
            growing = 0;
        }
        if k >= 12 && growing >= 8 {
            return Err(Error::Divergent(format!("radial integral diverges at r = 1 (shell ratio {rho})")));
        }
        previous_estimate = estimate;
    }
    Err(Error::Convergence("radial integral shells did not settle".into()))
}

/// A function of `z₁` on the unit disc.
pub enum SliceProfile<'a> {
    /// Power-series coefficients `a_n` of `Σ a_n z₁^n` (finitely many).
    Coefficients(&'a [f64]),
    /// Any function that can be evaluated at points of the disc.
    Function(&'a dyn Fn(Complex64) -> Complex64),
}

/// `‖f(z₁)‖_{L^p(𝔹^d)}` computed on the disc,
/// `‖f(z₁)‖_p^p = d ∫_𝔻 |f|^p (1−|z₁|²)^{d−1} dA/π`.
///
/// Monomials and `p = 2` use the exact Beta-integral values; other series are
/// sampled on circles with an FFT. A divergent norm is returned as `+∞`.
pub fn slice_norm(profile: &SliceProfile<'_>, p: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(domain!("dimension must be at least 1"));
    }
    if !(p >= 1.0) {
        return Err(domain!("exponent p = {p} must be at least 1"));
    }
    match profile {
        SliceProfile::Coefficients(a) => series_norm(a, p, d),
        SliceProfile::Function(f) => function_norm(*f, p, d),
    }
}

fn series_norm(a: &[f64], p: f64, d: usize) -> Result<f64> {
    let last = match a.iter().rposition(|&c| c != 0.0) {
        None => return Ok(0.0),
        Some(k) => k,
    };
    let a = &a[..=last];
    let df = d as f64;
    let nonzero: Vec<usize> = (0..a.len()).filter(|&k| a[k] != 0.0).collect();
    if p.is_infinite() {
        if nonzero.len() == 1 {
            return Ok(libm::fabs(a[nonzero[0]]));
        }
        let values = circle_values(a, 1.0, 8 * a.len());
        return Ok(values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    if nonzero.len() == 1 {
        // ∫_𝔻 |z|^{np} (1−|z|²)^{d−1} dA/π = B(np/2 + 1, d)
        let n = nonzero[0] as f64;
        return Ok(libm::fabs(a[nonzero[0]]) * libm::pow(df * beta(n * p / 2.0 + 1.0, df)?, 1.0 / p));
    }
    if p == 2.0 {
        let mut s = 0.0;
        for &k in &nonzero {
            s += a[k] * a[k] * beta(k as f64 + 1.0, df)?;
        }
        return Ok(libm::sqrt(df * s));
    }
    Ok(libm::pow(sampled_series_integral(a, p, d)?, 1.0 / p))
}

/// `d ∫₀¹ u^{d−1} mean_θ |f(√(1−u) e^{iθ})|^p du` over dyadic shells in `u`.
///
/// At `|z|² = 1 − u` only the first `~320/u` coefficients matter (the rest are
/// damped by `e^{−nu/2}`), so shells far from the circle use short FFTs.
/// Once `u ≪ 1/N` the integrand is flat in `u` and the shells are summed as a
/// geometric tail.
fn sampled_series_integral(a: &[f64], p: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    let n = a.len();
    let mut f = |u: f64| {
        let n_eff = if u > 0.0 { n.min((320.0 / u) as usize + 1) } else { n };
        let vals = circle_values(&a[..n_eff], libm::sqrt(1.0 - u), 4 * n_eff);
        let mean = vals.iter().map(|v| libm::pow(v.norm(), p)).sum::<f64>() / vals.len() as f64;
        df * libm::pow(u, df - 1.0) * mean
    };
    // beyond this shell the integrand is d·u^{d−1}(g₀ + g₁u + O(u²))
    let flat_from = (usize::BITS - n.leading_zeros()) as i32 + 8;
    let (r1, r2) = (libm::pow(0.5, df), libm::pow(0.5, df + 1.0));
    let mut total = 0.0;
    let mut previous = 0.0;
    for k in 0..=flat_from {
        let hi = libm::ldexp(1.0, -k);
        let shell = integrate(&mut f, 0.5 * hi, hi, 0.0, 1e-11)?;
        total += shell;
        if k == flat_from {
            // shells behave like A·2^{−kd} + B·2^{−k(d+1)}
            let b = (previous - shell / r1) * r1;
            let a = shell - b;
            return Ok(total + a * r1 / (1.0 - r1) + b * r2 / (1.0 - r2));
        }
        previous = shell;
    }
    Err(Error::Convergence("slice norm shells did not become geometric".into()))
}

/// Values of `Σ a_n (ρ e^{iθ})^n` on at least `min_points` equally spaced angles.
fn circle_values(a: &[f64], rho: f64, min_points: usize) -> Vec<Complex64> {
    let m = min_points.max(64).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let mut rn = 1.0;
    for (n, &c) in a.iter().enumerate() {
        buf[n % m] += Complex64::new(c * rn, 0.0);
        rn *= rho;
    }
    fft(&mut buf);
    buf
}

fn function_norm(f: &dyn Fn(Complex64) -> Complex64, p: f64, d: usize) -> Result<f64> {
    const ANGLES: usize = 256;
    const MAX_ANGLES: usize = 1 << 16;
    let df = d as f64;
    if p.is_infinite() {
        let mut sup = 0.0f64;
        for i in 1..=200 {
            let rho = 1.0 - libm::pow(0.5, i as f64 / 8.0);
            for j in 0..ANGLES {
                let th = 2.0 * core::f64::consts::PI * j as f64 / ANGLES as f64;
                sup = sup.max(f(Complex64::from_polar(rho, th)).norm());
            }
        }
        return Ok(sup);
    }
    let result = radial_integral_split(
        |t, u| {
            let rho = libm::sqrt(t);
            // resolve peaks of width ~(1−ρ) near the circle
            let m = ((32.0 / u.max(1e-300)).min(MAX_ANGLES as f64) as usize).next_power_of_two().clamp(ANGLES, MAX_ANGLES);
            let mut s = 0.0;
            for j in 0..m {
                let th = 2.0 * core::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                s += libm::pow(f(Complex64::from_polar(rho, th)).norm(), p);
            }
            df * libm::pow(u, df - 1.0) * s / m as f64
        },
        1,
    );
    match result {
        Ok(v) => Ok(libm::pow(v, 1.0 / p)),
        Err(Error::Divergent(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, libm::sqrt(var / n))
    }

    #[test]
    fn inner_product_basics() {
        let z = BallPoint::origin(3);
        let w = BallPoint::new(vec![Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.0), Complex64::new(0.0, 0.4)]).unwrap();
        assert_eq!(inner_product(&z, &w).unwrap(), Complex64::new(0.0, 0.0));
        let a = BallPoint::on_axis(2, 0.6).unwrap();
        assert_relative_eq!(inner_product(&a, &a).unwrap().re, 0.36, max_relative = 1e-15);
        assert!(inner_product(&a, &w).is_err());
        assert!(BallPoint::on_axis(2, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(seed in any::<u64>(), d in 1usize..5) {
            let mut rng = seeded_stream(seed, 0);
            let z = sample_uniform_point(&mut rng, d);
            let w = sample_uniform_point(&mut rng, d);
            let ip = inner_product(&z, &w).unwrap().norm();
            prop_assert!(ip <= libm::sqrt(z.norm_sq() * w.norm_sq()) + 1e-15);
            prop_assert!(ip < 1.0);
        }

        #[test]
        fn automorphism_is_an_involution(seed in any::<u64>(), d in 1usize..4) {
            let mut rng = seeded_stream(seed, 1);
            let z = sample_uniform_point(&mut rng, d);
            let u = sample_uniform_point(&mut rng, d);
            let w = automorphism(&z, &u).unwrap();
            prop_assert!(w.norm_sq() < 1.0);
            let back = automorphism(&z, &w).unwrap();
            for (a, b) in back.coords().iter().zip(u.coords()) {
                prop_assert!((a - b).norm() < 1e-9);
            }
            // 1 − |φ_z(u)|² = (1−|z|²)(1−|u|²)/|1−⟨u,z⟩|²
            let lhs = 1.0 - w.norm_sq();
            let rhs = (1.0 - z.norm_sq()) * (1.0 - u.norm_sq()) / (Complex64::new(1.0, 0.0) - inner_product(&u, &z).unwrap()).norm_sqr();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-3));
        }
    }

    #[test]
    fn uniform_moments() {
        for d in [1usize, 2] {
            let mut rng = seeded_stream(7, d as u64);
            let xs: Vec<f64> = sample_uniform(&mut rng, 1_000_000, d).iter().map(|z| z.norm_sq()).collect();
            assert!(xs.iter().all(|&x| x < 1.0));
            let (m, se) = mean_and_se(&xs);
            // d ∫₀¹ r · r^{d−1} dr = d/(d+1)
            let want = radial_integral(|r| r, d).unwrap();
            assert_relative_eq!(want, d as f64 / (d as f64 + 1.0), max_relative = 1e-12);
            assert!((m - want).abs() < 3.0 * se, "d={d}: {m} vs {want} ± {se}");
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a = sample_uniform(&mut seeded_stream(42, 3), 5, 3);
        let b = sample_uniform(&mut seeded_stream(42, 3), 5, 3);
        let c = sample_uniform(&mut seeded_stream(42, 4), 5, 3);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn weighted_mass_is_one() {
        for (i, &b) in [0.0, 1.0, 2.5].iter().enumerate() {
            let m = WeightedMeasure::new(2, b).unwrap();
            let mut rng = seeded_stream(11, i as u64);
            let xs: Vec<f64> = sample_uniform(&mut rng, 400_000, 2).iter().map(|z| m.c_beta * libm::pow(1.0 - z.norm_sq(), b)).collect();
            let (mean, se) = mean_and_se(&xs);
            assert!((mean - 1.0).abs() < 3.0 * se + 1e-12, "β={b}: {mean} ± {se}");
        }
        assert!(WeightedMeasure::new(2, -1.0).is_err());
    }

    #[test]
    fn weighted_sampler_moments() {
        // E|z|² under dv_β is d/(d+β+1)
        for &(d, b) in &[(1usize, -0.7), (2, 0.0), (3, 1.5), (2, -0.95)] {
            let s = WeightedSampler::new(WeightedMeasure::new(d, b).unwrap());
            let mut rng = seeded_stream(5, d as u64);
            let xs: Vec<f64> = (0..300_000).map(|_| s.sample(&mut rng).norm_sq()).collect();
            let (m, se) = mean_and_se(&xs);
            let want = d as f64 / (d as f64 + b + 1.0);
            assert!((m - want).abs() < 4.0 * se, "d={d} β={b}: {m} vs {want} ± {se}");
        }
    }

    #[test]
    fn radial_integral_examples() {
        assert_relative_eq!(radial_integral(|_| 1.0, 3).unwrap(), 1.0, max_relative = 1e-13);
        for &g in &[0.0, 0.5, 2.0, -0.5, -0.9] {
            let v = radial_integral_split(|_, u| libm::pow(u, g), 1).unwrap();
            assert_relative_eq!(v, 1.0 / (g + 1.0), max_relative = 1e-10);
        }
        assert_relative_eq!(radial_integral(|r| r, 2).unwrap(), 2.0 / 3.0, max_relative = 1e-13);
        assert!(radial_integral_split(|_, u| 1.0 / u, 1).is_err());
    }

    #[test]
    fn slice_norm_examples() {
        assert_relative_eq!(slice_norm(&SliceProfile::Coefficients(&[1.0]), 3.0, 2).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(slice_norm(&SliceProfile::Coefficients(&[0.0, 1.0]), 2.0, 1).unwrap(), libm::sqrt(0.5), max_relative = 1e-14);
        assert_relative_eq!(
            slice_norm(&SliceProfile::Coefficients(&[0.0, 1.0]), 2.0, 2).unwrap(),
            libm::sqrt(1.0 / 3.0),
            max_relative = 1e-14
        );
        // the sampled path agrees with the exact p = 2 path
        let a = [0.3, -1.0, 0.5, 0.25, 0.0, 0.7];
        let exact = slice_norm(&SliceProfile::Coefficients(&a), 2.0, 3).unwrap();
        let sampled = series_norm_sampled(&a, 2.0, 3);
        assert_relative_eq!(exact, sampled, max_relative = 1e-10);
        let shells = libm::sqrt(sampled_series_integral(&a, 2.0, 3).unwrap());
        assert_relative_eq!(exact, shells, max_relative = 1e-9);
        // long series: the truncated-FFT shells still match the exact p = 2 value
        let long: Vec<f64> = (0..20000).map(|n| libm::pow(n as f64 + 1.0, 0.2)).collect();
        for d in [1usize, 2] {
            let exact = slice_norm(&SliceProfile::Coefficients(&long), 2.0, d).unwrap();
            let shells = libm::sqrt(sampled_series_integral(&long, 2.0, d).unwrap());
            assert_relative_eq!(exact, shells, max_relative = 1e-8);
        }
        let f = |z: Complex64| Complex64::new(0.3, 0.0) - z + z * z * 0.5 + z * z * z * 0.25 + z.powi(5) * 0.7;
        let via_fn = slice_norm(&SliceProfile::Function(&f), 2.0, 3).unwrap();
        assert_relative_eq!(exact, via_fn, max_relative = 1e-8);
        let blowup = |z: Complex64| (Complex64::new(1.0, 0.0) - z).powf(-1.5);
        assert!(slice_norm(&SliceProfile::Function(&blowup), 2.0, 1).unwrap().is_infinite());
    }

    fn series_norm_sampled(a: &[f64], p: f64, d: usize) -> f64 {
        let m = 4 * a.len();
        let df = d as f64;
        let v = radial_integral_split(
            |t, u| {
                let vals = circle_values(a, libm::sqrt(t), m);
                df * libm::pow(u, df - 1.0) * vals.iter().map(|v| libm::pow(v.norm(), p)).sum::<f64>() / vals.len() as f64
            },
            1,
        )
        .unwrap();
        libm::pow(v, 1.0 / p)
    }

    #[test]
    fn slice_isometry_against_ball_sampling() {
        // ‖f(z₁)‖_{L^p(𝔹^d)} sampled over the full ball vs the disc formula
        let coeffs = [0.4, 1.0, -0.6, 0.3];
        for &(d, p) in &[(2usize, 3.0), (3, 1.5), (1, 4.0)] {
            let want = slice_norm(&SliceProfile::Coefficients(&coeffs), p, d).unwrap();
            let mut rng = seeded_stream(99, d as u64);
            let xs: Vec<f64> = (0..400_000)
                .map(|_| {
                    let z = sample_uniform_point(&mut rng, d);
                    let z1 = z.coords()[0];
                    let v = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z1 + c);
                    libm::pow(v.norm(), p)
                })
                .collect();
            let (m, se) = mean_and_se(&xs);
            let wp = libm::pow(want, p);
            assert!((m - wp).abs() < 3.0 * se, "d={d} p={p}: {m} vs {wp} ± {se}");
        }
    }
}
