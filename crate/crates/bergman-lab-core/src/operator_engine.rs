//! `K_α` and `R^{s,t}` as diagonal operators on homogeneous expansions.
//!
//! On a holomorphic `f = Σ f_n` (homogeneous parts `f_n`),
//!
//! ```text
//! K_α f   = Σ c_n f_n,   c_n = Γ(d+1)Γ(α+n) / (Γ(α)Γ(d+1+n)) = (α)_n / (d+1)_n
//! R^{s,t} f = Σ Γ(d+1+s)Γ(d+1+n+s+t) / (Γ(d+1+s+t)Γ(d+1+n+s)) f_n
//! ```
//!
//! Series inputs are functions of `z₁` only, so `f_n` is a multiple of `z₁^n`.

use crate::ball_measure::{slice_norm, SliceProfile};
use crate::error::domain;
use crate::kernel_integrals::trace_closed_form_disc;
use crate::special_fn::{gamma_ratio, gamma_shift_ratio, is_nonpositive_integer};
use crate::{Error, Params, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Eigenvalue `c_n` of `K_α` on degree-`n` homogeneous polynomials.
///
/// For `α ≤ 0` this is the Pochhammer ratio `(α)_n/(d+1)_n`, which vanishes
/// once `α + k = 0` for some `k < n`.
pub fn kalpha_coefficient(params: &Params, n: usize) -> Result<f64> {
    let (a, big_d) = (params.alpha, params.bergman_order());
    if a > 0.0 {
        // Γ(α+n)/Γ(d+1+n) · Γ(d+1)/Γ(α)
        let delta = a - big_d;
        return Ok(gamma_shift_ratio(big_d + n as f64, delta)? / gamma_shift_ratio(big_d, delta)?);
    }
    let mut c = 1.0;
    for k in 0..n {
        c *= (a + k as f64) / (big_d + k as f64);
        if c == 0.0 {
            break;
        }
    }
    Ok(c)
}

/// `c_0, …, c_N` by the recurrence `c_{n+1} = c_n (α+n)/(d+1+n)`.
pub fn kalpha_coefficients(params: &Params, n_max: usize) -> Vec<f64> {
    let (a, big_d) = (params.alpha, params.bergman_order());
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = 1.0;
    for n in 0..=n_max {
        out.push(c);
        c *= (a + n as f64) / (big_d + n as f64);
    }
    out
}

/// The fractional radial operator `R^{s,t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOperator {
    pub s: f64,
    pub t: f64,
}

impl RadialOperator {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !(s.is_finite() && t.is_finite()) {
            return Err(domain!("R^{{s,t}} needs finite s, t"));
        }
        Ok(RadialOperator { s, t })
    }

    /// The inverse `R^{s+t, −t}`.
    pub fn inverse(&self) -> Self {
        RadialOperator { s: self.s + self.t, t: -self.t }
    }
}

/// Degree-`n` coefficient of `R^{s,t}` in dimension `params.d`.
pub fn radial_coefficient(op: &RadialOperator, params: &Params, n: usize) -> Result<f64> {
    let big_d = params.bergman_order();
    let (s, t) = (op.s, op.t);
    let df = params.d as f64;
    if is_nonpositive_integer(df + s + 1.0) || is_nonpositive_integer(df + s + t + 1.0) {
        return Err(Error::Pole(format!("R^{{{s},{t}}} is undefined in dimension {}", params.d)));
    }
    let nf = n as f64;
    if is_nonpositive_integer(big_d + nf + s) {
        return Err(Error::Pole(format!("R^{{{s},{t}}} has a pole at degree {n}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if big_d + s > 0.0 && big_d + s + t > 0.0 {
        return Ok(gamma_shift_ratio(big_d + nf + s, t)? / gamma_shift_ratio(big_d + s, t)?);
    }
    gamma_ratio(&[big_d + s, big_d + nf + s + t], &[big_d + s + t, big_d + nf + s])
}

/// Eigenvalues of `K_α` up to a truncation, with a bound on the omitted
/// squared tail.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSpectrum {
    pub params: Params,
    /// `c_0, …, c_N`.
    pub coefficients: Vec<f64>,
    pub truncation: usize,
    /// Upper bound on `Σ_{n>N} mult(n)·c_n²`; `+∞` when that sum diverges.
    pub tail_bound: f64,
}

impl DiagonalSpectrum {
    pub fn new(params: &Params, truncation: usize) -> Result<Self> {
        let sum = squared_series(params, truncation)?;
        Ok(DiagonalSpectrum {
            params: *params,
            coefficients: kalpha_coefficients(params, truncation),
            truncation,
            tail_bound: sum.tail_bound,
        })
    }
}

/// Termwise product `c_n a_n`.
pub fn apply_diagonal(spectrum: &DiagonalSpectrum, series: &[f64]) -> Result<Vec<f64>> {
    if series.len() > spectrum.coefficients.len() {
        return Err(Error::DimensionMismatch { expected: spectrum.coefficients.len(), got: series.len() });
    }
    Ok(series.iter().zip(&spectrum.coefficients).map(|(a, c)| a * c).collect())
}

/// `Σ_n mult(n)·c_n²` with `mult(n) = C(n+d−1, d−1)` (the dimension of the
/// degree-`n` homogeneous polynomials), which equals `Tr(K_α*K_α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub partial: f64,
    /// Extrapolated `Σ_{n>N}` from the fit `A n^{−k}(1 + B/n)`.
    pub tail: f64,
    pub tail_bound: f64,
    pub total: f64,
}

/// Partial sum to `N` plus tail extrapolation. The terms decay like
/// `n^{−k}` with `k = d + 3 − 2α`; the sum converges iff `k > 1`.
pub fn squared_series(params: &Params, truncation: usize) -> Result<SeriesSum> {
    if truncation < 16 {
        return Err(domain!("truncation {truncation} is too short for tail extrapolation"));
    }
    let (a, big_d, d) = (params.alpha, params.bergman_order(), params.d);
    let mut sum = CompensatedSum::default();
    let mut c = 1.0;
    let mut mult = 1.0;
    let half = truncation / 2;
    let mut term_half = 0.0;
    let mut term_last = 0.0;
    for n in 0..=truncation {
        let term = mult * c * c;
        sum.add(term);
        if n == half {
            term_half = term;
        }
        if n == truncation {
            term_last = term;
        }
        let nf = n as f64;
        c *= (a + nf) / (big_d + nf);
        // C(n+d, d−1) / C(n+d−1, d−1) = (n+d)/(n+1)
        mult *= (nf + d as f64) / (nf + 1.0);
    }
    let k = d as f64 + 3.0 - 2.0 * a;
    let partial = sum.value();
    if term_last == 0.0 {
        // terminating series (nonpositive integer α)
        return Ok(SeriesSum { partial, tail: 0.0, tail_bound: 0.0, total: partial });
    }
    if !(k > 1.0) {
        let inf = f64::INFINITY;
        return Ok(SeriesSum { partial, tail: inf, tail_bound: inf, total: inf });
    }
    let (nf, hf) = (truncation as f64, half as f64);
    let f_n = term_last * libm::pow(nf, k);
    let f_h = term_half * libm::pow(hf, k);
    // f(n) = A(1 + B/n): A = 2f(N) − f(N/2), AB/N = f(N/2) − f(N) (N = 2·half)
    let amp = (hf * f_h - nf * f_n) / (hf - nf);
    let ab = (f_h - f_n) * hf * nf / (nf - hf);
    let m = nf + 0.5;
    let tail = amp * libm::pow(m, 1.0 - k) / (k - 1.0) + ab * libm::pow(m, -k) / k;
    let tail_bound = f_n.max(amp) * libm::pow(nf, 1.0 - k) / (k - 1.0);
    Ok(SeriesSum { partial, tail, tail_bound, total: partial + tail })
}

/// Summary of `K_α` on `L²(𝔻)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub spectrum: DiagonalSpectrum,
    /// `sup_j c_j`: 1 for `α ≤ 2`, infinite for `α > 2`.
    pub norm: f64,
    /// Index where the supremum is attained, if it is.
    pub norm_attained_at: Option<usize>,
    /// Whether `c_{j+1}/c_j = (α+j)/(2+j)` is monotone in the direction that
    /// puts the maximum at `j = 0` (checked on every truncated ratio).
    pub monotone_ratio_check: bool,
    /// `Σ c_j²` with tail extrapolation, `None` when it diverges.
    pub hilbert_schmidt_sum: Option<SeriesSum>,
    /// Notes on the spectrum outside the listed eigenvalues.
    pub remark: String,
}

/// Eigenvalues, operator norm and Hilbert–Schmidt sum of `K_α` on the disc.
pub fn l2_spectral_report(params: &Params, truncation: usize) -> Result<SpectralReport> {
    if params.d != 1 {
        return Err(domain!("the spectral report is available for d = 1 only"));
    }
    let a = params.alpha;
    if !(a > 0.0) {
        return Err(domain!("the spectral report needs α > 0"));
    }
    let spectrum = DiagonalSpectrum::new(params, truncation)?;
    let cs = &spectrum.coefficients;
    let ratios_ok = (0..cs.len() - 1).all(|j| {
        let r = (a + j as f64) / (2.0 + j as f64);
        if a < 2.0 {
            r < 1.0 && cs[j + 1] < cs[j]
        } else if a == 2.0 {
            r == 1.0 && cs[j + 1] == cs[j]
        } else {
            r > 1.0 && cs[j + 1] > cs[j]
        }
    });
    let (norm, at) = if a <= 2.0 { (1.0, Some(0)) } else { (f64::INFINITY, None) };
    let hs = squared_series(params, truncation)?;
    let hilbert_schmidt_sum = if hs.total.is_finite() { Some(hs) } else { None };
    let remark = String::from(if a < 2.0 {
        "eigenvalues accumulate only at 0"
    } else if a == 2.0 {
        "orthogonal projection: every eigenvalue equals 1"
    } else {
        "eigenvalues increase without bound"
    });
    Ok(SpectralReport { spectrum, norm, norm_attained_at: at, monotone_ratio_check: ratios_ok, hilbert_schmidt_sum, remark })
}

/// Series side, closed form and residual of
/// `Σ_j c_j² = (Γ(3−2α)/Γ²(2−α) − 1)/(α−1)²` on the disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerJacobiCheck {
    pub alpha: f64,
    pub truncation: usize,
    pub series: SeriesSum,
    pub closed_form: f64,
    pub residual: f64,
}

pub fn euler_jacobi_check(alpha: f64, truncation: usize) -> Result<EulerJacobiCheck> {
    if !(alpha > 0.0 && alpha < 1.5) {
        return Err(domain!("α = {alpha} outside (0, 3/2)"));
    }
    let series = squared_series(&Params::new(1, alpha)?, truncation)?;
    let closed_form = trace_closed_form_disc(alpha)?;
    Ok(EulerJacobiCheck { alpha, truncation, series, closed_form, residual: libm::fabs(series.total - closed_form) })
}

/// Outcome of the witness-family sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    /// Growth exponent of the witness `Σ n^t z₁^n`.
    pub t: f64,
    pub truncations: Vec<usize>,
    /// `‖K_α f_N‖_q / ‖f_N‖_p` for each truncation.
    pub ratios: Vec<f64>,
    /// `ratios.last / ratios.first`.
    pub growth: f64,
    pub blow_up: bool,
    /// Whether the last two ratios agree to 1%.
    pub settled: bool,
}

/// Growth factor that counts as an empirical blow-up.
pub const BLOW_UP_FACTOR: f64 = 10.0;

/// Sweeps truncations `N = 2^6, …, 2^{5+n_points}` of the witness
/// `f_t = Σ_{n≥1} n^t z₁^n` and records `‖K_α f_N‖_q / ‖f_N‖_p`.
///
/// With `t* = (d+1)/p − 1` and `τ = (d+1)/q + d − α`, `f_t ∈ L^p` iff
/// `t < t*` and `K_α f_t ∈ L^q` iff `t < τ`. Taking `t = t* + 1/2` makes both
/// norms grow like powers of `N`, so the ratio behaves like `N^{t*−τ}`: it
/// grows exactly when the necessary condition `τ ≥ t*` fails.
pub fn unboundedness_probe(params: &Params, p: f64, q: f64, n_points: usize) -> Result<GrowthReport> {
    if !(params.alpha > 0.0) {
        return Err(domain!("the witness probe needs α > 0"));
    }
    if !(p >= 1.0 && q >= 1.0) {
        return Err(domain!("exponents must be at least 1"));
    }
    if !(2..=10).contains(&n_points) {
        return Err(domain!("n_points must be between 2 and 10"));
    }
    let big_d = params.bergman_order();
    let t_star = big_d / p - 1.0;
    let t = t_star + 0.5;
    let n_max = 1usize << (5 + n_points);
    let coeffs = kalpha_coefficients(params, n_max);
    let mut truncations = Vec::with_capacity(n_points);
    let mut ratios = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let n = 1usize << (6 + i);
        let f: Vec<f64> = (0..=n).map(|k| if k == 0 { 0.0 } else { libm::pow(k as f64, t) }).collect();
        let kf: Vec<f64> = f.iter().zip(&coeffs).map(|(a, c)| a * c).collect();
        let num = slice_norm(&SliceProfile::Coefficients(&kf), q, params.d)?;
        let den = slice_norm(&SliceProfile::Coefficients(&f), p, params.d)?;
        if !(num.is_finite() && den.is_finite() && den > 0.0) {
            return Err(Error::Convergence(format!("truncated witness norms at N = {n} are not finite")));
        }
        truncations.push(n);
        ratios.push(num / den);
    }
    let growth = ratios[n_points - 1] / ratios[0];
    let settled = libm::fabs(ratios[n_points - 1] / ratios[n_points - 2] - 1.0) < 0.01;
    Ok(GrowthReport { t, truncations, ratios, growth, blow_up: growth >= BLOW_UP_FACTOR, settled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball_measure::{sample_uniform_point, seeded_stream, BallPoint};
    use crate::kernel_integrals::{hs_trace, kernel_eval, QuadratureEstimate};
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::Rng;

    fn params(d: usize, a: f64) -> Params {
        Params::new(d, a).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        assert_relative_eq!(kalpha_coefficient(&params(2, 0.7), 0).unwrap(), 1.0, max_relative = 1e-14);
        for n in [0, 1, 10, 500] {
            assert_relative_eq!(kalpha_coefficient(&params(3, 4.0), n).unwrap(), 1.0, max_relative = 1e-12);
        }
        assert_relative_eq!(kalpha_coefficient(&params(1, 1.0), 3).unwrap(), 0.25, max_relative = 1e-14);
        // mpmath
        assert_relative_eq!(kalpha_coefficient(&params(2, 0.7), 1000).unwrap(), 1.93370131735521474528943316599e-7, max_relative = 1e-14);
        assert_relative_eq!(
            kalpha_coefficient(&params(1, 1.4), 100_000).unwrap(),
            0.00112705238322654053119901572843,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            kalpha_coefficient(&params(3, 2.5), 1_000_000).unwrap(),
            4.51349805019014588527313128245e-9,
            max_relative = 1e-14
        );
        // polynomial kernel for nonpositive integer order
        assert_eq!(kalpha_coefficient(&params(1, -1.0), 1).unwrap(), -0.5);
        assert_eq!(kalpha_coefficient(&params(1, -1.0), 2).unwrap(), 0.0);
        assert_eq!(kalpha_coefficient(&params(1, 0.0), 0).unwrap(), 1.0);
    }

    #[test]
    fn recurrence_matches_gamma_ratio() {
        let p = params(2, 1.3);
        let cs = kalpha_coefficients(&p, 100_000);
        for n in [0, 7, 1000, 100_000] {
            assert_relative_eq!(cs[n], kalpha_coefficient(&p, n).unwrap(), max_relative = 1e-11);
        }
    }

    proptest! {
        #[test]
        fn radial_operator_laws(d in 1usize..5, a in 0.05f64..6.0, s in -0.5f64..3.0, t in -0.9f64..3.0, n in 0usize..1000) {
            let p = params(d, a);
            let k = radial_coefficient(&RadialOperator::new(0.0, a - d as f64 - 1.0).unwrap(), &p, n).unwrap();
            let c = kalpha_coefficient(&p, n).unwrap();
            prop_assert!((k - c).abs() <= 1e-11 * c.abs().max(1e-300));
            let op = RadialOperator::new(s, t).unwrap();
            let prod = radial_coefficient(&op, &p, n).unwrap() * radial_coefficient(&op.inverse(), &p, n).unwrap();
            prop_assert!((prod - 1.0).abs() < 1e-12);
            // composing with the Bergman projection changes nothing
            let proj = kalpha_coefficient(&params(d, d as f64 + 1.0), n).unwrap();
            prop_assert!((c * proj - c).abs() <= 1e-12 * c.abs());
            prop_assert_eq!(radial_coefficient(&RadialOperator::new(s, 0.0).unwrap(), &p, n).unwrap(), 1.0);
        }
    }

    #[test]
    fn stirling_asymptotics() {
        for &(d, a) in &[(1usize, 0.5), (2, 1.7), (3, 5.5)] {
            let p = params(d, a);
            let n = 10_000usize;
            let scaled = kalpha_coefficient(&p, n).unwrap() * libm::pow(n as f64, d as f64 + 1.0 - a);
            let limit = crate::special_fn::gamma_ratio(&[d as f64 + 1.0], &[a]).unwrap();
            assert!((scaled / limit - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn apply_diagonal_examples() {
        let s = DiagonalSpectrum::new(&params(1, 1.0), 64).unwrap();
        assert_eq!(apply_diagonal(&s, &[1.0, 0.0, 0.0]).unwrap(), alloc::vec![1.0, 0.0, 0.0]);
        let f: Vec<f64> = (0..=64).map(|n| if n == 0 { 0.0 } else { 1.0 }).collect();
        let kf = apply_diagonal(&s, &f).unwrap();
        for (n, v) in kf.iter().enumerate().skip(1) {
            assert_relative_eq!(*v, 1.0 / (n as f64 + 1.0), max_relative = 1e-14);
        }
        let proj = DiagonalSpectrum::new(&params(2, 3.0), 32).unwrap();
        assert_eq!(apply_diagonal(&proj, &[0.5, -2.0, 3.0]).unwrap(), alloc::vec![0.5, -2.0, 3.0]);
        assert!(apply_diagonal(&proj, &[0.0; 40]).is_err());
    }

    #[test]
    fn spectral_report_on_the_disc() {
        let r = l2_spectral_report(&params(1, 1.0), 1_000_000).unwrap();
        for j in 0..20 {
            assert!((r.spectrum.coefficients[j] - 1.0 / (j as f64 + 1.0)).abs() < 1e-15);
        }
        assert_eq!(r.norm, 1.0);
        assert!(r.monotone_ratio_check);
        let hs = r.hilbert_schmidt_sum.unwrap();
        assert!((hs.total - core::f64::consts::PI.powi(2) / 6.0).abs() < 1e-11, "{hs:?}");
        assert!(hs.tail_bound >= hs.tail);
        let r = l2_spectral_report(&params(1, 2.0), 100).unwrap();
        assert!(r.monotone_ratio_check && r.norm == 1.0 && r.hilbert_schmidt_sum.is_none());
        let r = l2_spectral_report(&params(1, 2.5), 100).unwrap();
        assert!(r.monotone_ratio_check && r.norm.is_infinite());
        assert!(l2_spectral_report(&params(2, 1.0), 100).is_err());
    }

    #[test]
    fn euler_jacobi_examples() {
        let c = euler_jacobi_check(1.0, 1_000_000).unwrap();
        assert!(c.residual < 1e-8, "{c:?}");
        let c = euler_jacobi_check(0.5, 100_000).unwrap();
        assert!(c.residual < 1e-6, "{c:?}");
        // hypergeometric oracle ₃F₂(α, α, 1; 2, 2; 1) from mpmath
        for (a, want) in
            [(0.75, 1.25928323802813941337394311538), (1.25, 2.88544958425753961672540704894), (1.45, 13.0490352055647059817953129569)]
        {
            let c = euler_jacobi_check(a, 1_000_000).unwrap();
            assert!((c.series.total - want).abs() < 1e-7, "{c:?}");
            assert!(c.residual < 1e-7, "{c:?}");
        }
        assert!(euler_jacobi_check(1.5, 100).is_err());
        assert!(euler_jacobi_check(0.0, 100).is_err());
    }

    #[test]
    fn trace_series_matches_radial_trace() {
        for &(d, a) in &[(2usize, 1.0), (3, 2.0), (2, 1.7)] {
            let p = params(d, a);
            let s = squared_series(&p, 1_000_000).unwrap();
            assert_relative_eq!(s.total, hs_trace(&p).unwrap(), max_relative = 1e-8);
        }
    }

    #[test]
    fn witness_probe_examples() {
        // Bergman projection from L² to L⁴ fails
        let r = unboundedness_probe(&params(1, 2.0), 2.0, 4.0, 8).unwrap();
        assert!(r.blow_up, "{r:?}");
        // projection on L²: every ratio is 1
        let r = unboundedness_probe(&params(1, 2.0), 2.0, 2.0, 6).unwrap();
        assert!(r.ratios.iter().all(|x| (x - 1.0).abs() < 1e-9), "{r:?}");
        // interior bounded point: no growth
        let r = unboundedness_probe(&params(1, 1.0), 2.0, 3.0, 6).unwrap();
        assert!(!r.blow_up && r.growth < 3.0, "{r:?}");
    }

    /// Series action of `K_α` on a polynomial in `z₁` against Monte Carlo
    /// quadrature of the defining integral.
    #[test]
    fn diagonal_action_matches_integral() {
        let p = params(2, 1.6);
        let mut rng = seeded_stream(17, 0);
        let coeffs: Vec<f64> = (0..=6).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let spectrum = DiagonalSpectrum::new(&p, 16).unwrap();
        let kf = apply_diagonal(&spectrum, &coeffs).unwrap();
        for i in 0..5 {
            let z = sample_uniform_point(&mut rng, 2);
            let z = BallPoint::new(z.coords().iter().map(|c| c * 0.8).collect()).unwrap();
            let poly = |w: Complex64, a: &[f64]| a.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c);
            let want = poly(z.coords()[0], &kf);
            for part in 0..2 {
                let est = QuadratureEstimate::from_sampler(200_000, 100 + 2 * i + part as u64, |rng| {
                    let w = sample_uniform_point(rng, 2);
                    let v = kernel_eval(&p, &z, &w, true).unwrap() * poly(w.coords()[0], &coeffs);
                    if part == 0 {
                        v.re
                    } else {
                        v.im
                    }
                })
                .unwrap();
                let target = if part == 0 { want.re } else { want.im };
                assert!(est.agrees_with(target, 4.0), "z={z:?} {est:?} vs {target}");
            }
        }
    }
}
