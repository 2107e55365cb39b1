//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p bergman-lab --test acceptance`.

use bergman_lab_core::ball_measure::{radial_integral_split, seeded_stream};
use bergman_lab_core::classifier::{classify, classify_exact, parse_rational, ExponentPair};
use bergman_lab_core::hls_verifier::{concentrating_bumps, probe_boundedness, verify_hls};
use bergman_lab_core::kernel_integrals::{carleson_decay_rate, carleson_probe, rudin_integral, rudin_integral_mc, trace_closed_form_disc};
use bergman_lab_core::norm_bounds::{norm_l1_to_lq, norm_linf_to_l1_exact_d1, norm_lp_to_linf, HlsExponents};
use bergman_lab_core::operator_engine::{euler_jacobi_check, l2_spectral_report, squared_series};
use bergman_lab_core::special_fn::hyp2f1_near_one;
use bergman_lab_core::Params;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde_json::Value;
use std::process::Command;
use std::time::{Duration, Instant};

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cli_json(args: &[&str]) -> (Value, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_bergman-lab"))
        .args(args)
        .args(["--format", "json", "--no-timestamp"])
        .output()
        .expect("the binary runs");
    let elapsed = start.elapsed();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    (serde_json::from_slice(&out.stdout).expect("valid JSON"), elapsed)
}

fn params(d: usize, alpha: f64) -> Params {
    Params::new(d, alpha).unwrap()
}

fn rational(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

/// Trace on the disc at α = 1 from the CLI, and the closed form against the
/// tail-extrapolated eigenvalue-square series at five more orders.
fn trace_formula() -> Outcome {
    let (v, t) = cli_json(&["trace", "--d", "1", "--alpha", "1"]);
    let value = v["value"].as_f64().unwrap();
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    let mut pass = (value - zeta2).abs() < 1e-9 && t < Duration::from_secs(10);
    let mut worst: f64 = 0.0;
    let mut slowest = t;
    for alpha in [0.25, 0.5, 0.75, 1.25, 1.4] {
        let start = Instant::now();
        let series = squared_series(&params(1, alpha), 1_000_000).unwrap().total;
        let closed = trace_closed_form_disc(alpha).unwrap();
        slowest = slowest.max(start.elapsed());
        worst = worst.max((series - closed).abs());
    }
    pass &= worst < 1e-6 && slowest < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "|trace − π²/6| = {:.1e} (tol 1e-9); series vs closed form max {worst:.1e} (tol 1e-6); slowest {slowest:.2?} (limit 10 s)",
            (value - zeta2).abs()
        ),
    )
}

fn euler_jacobi() -> Outcome {
    let alphas = [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95, 1.1, 1.25, 1.4];
    let worst = alphas.iter().map(|&a| euler_jacobi_check(a, 1_000_000).unwrap().residual).fold(0.0, f64::max);
    outcome(worst < 1e-6, format!("10 orders in (0, 1.45), max residual {worst:.1e} (tol 1e-6)"))
}

/// 30 random `(d, β, γ, r)` with `d ≤ 3`, `γ ∈ (−0.5, 2)`, `2β ∈ (−2, 1+d+γ−0.5)`
/// and `r ∈ [0, 0.9]`, where the importance weight is bounded.
fn rudin_integral_cases() -> Outcome {
    let mut rng = seeded_stream(SEED, 3);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for case in 0..30u64 {
        let d = rng.random_range(1..=3usize);
        let gamma = rng.random_range(-0.5..2.0);
        let beta = 0.5 * rng.random_range(-2.0..(1.0 + d as f64 + gamma - 0.5));
        let r = rng.random_range(0.0..0.9);
        let p = params(d, 2.0 * beta);
        let exact = rudin_integral(&p, beta, gamma, r).unwrap();
        let mc = rudin_integral_mc(&p, beta, gamma, r, 1_000_000, SEED + case).unwrap();
        worst = worst.max((mc.value - exact).abs() / mc.std_error);
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 4.0 && elapsed < Duration::from_secs(60),
        format!("30 cases at 10⁶ samples, max |z-score| {worst:.2} (tol 4σ), {elapsed:.2?} (limit 60 s)"),
    )
}

/// Duality of the two exact norms, the kernel-power extremal probe at `|z|² = 1 − 1e-8`,
/// and the disc `L^∞ → L¹` value against radial quadrature.
fn exact_norms() -> Outcome {
    let mut rng = seeded_stream(SEED, 4);
    let mut duality = true;
    let mut worst_gap: f64 = 0.0;
    let mut dominated = true;
    for case in 0..10u64 {
        let d = rng.random_range(1..=3usize);
        let big_d = d as f64 + 1.0;
        let alpha = rng.random_range(0.2..big_d - 0.6);
        let q = rng.random_range(1.05..(big_d - 0.3) / alpha);
        let p = q / (q - 1.0);
        let prm = params(d, alpha);
        let forward = norm_l1_to_lq(&prm, q).unwrap().value;
        let dual = norm_lp_to_linf(&prm, p).unwrap().value;
        duality &= forward == dual;
        // f = |k_α(z, ·)|^{q−1} gives |K f(z)|/‖f‖_p = (∫ |k_α(z, ·)|^q)^{1/q}
        let mc = rudin_integral_mc(&params(d, q * alpha), q * alpha / 2.0, 0.0, 1.0 - 1e-8, 1 << 20, SEED + case).unwrap();
        let ratio = mc.value.powf(1.0 / q);
        let ratio_hi = (mc.value + 4.0 * mc.std_error).powf(1.0 / q);
        dominated &= ratio_hi >= ratio && (mc.value - 4.0 * mc.std_error).powf(1.0 / q) <= dual;
        worst_gap = worst_gap.max((dual - ratio).abs() / dual);
    }
    let mut worst_quad: f64 = 0.0;
    for alpha in [2.2, 2.5, 2.8] {
        let exact = norm_linf_to_l1_exact_d1(alpha).unwrap().value;
        let a = alpha / 2.0;
        let quad = radial_integral_split(|_, u| hyp2f1_near_one(a, a, 2.0, u).unwrap(), 1).unwrap();
        worst_quad = worst_quad.max((quad - exact).abs());
    }
    outcome(
        duality && dominated && worst_gap < 0.1 && worst_quad < 1e-8,
        format!(
            "duality exact: {duality}; probes dominated within 4σ: {dominated}; max probe gap {:.2}% (tol 10%); disc L^∞→L¹ vs quadrature {worst_quad:.1e} (tol 1e-8)",
            100.0 * worst_gap
        ),
    )
}

/// `(d, α, p, q, bounded, compact)` derived by hand from the boundedness and
/// compactness statements, covering every clause and the boundary equalities.
const GOLDEN: [(usize, &str, &str, &str, bool, bool); 60] = [
    // α ≤ 0
    (1, "0", "1", "inf", true, true),
    (2, "-1/2", "inf", "1", true, true),
    (3, "-2", "1", "1", true, true),
    // d = 1, α = 1: t = 1/2
    (1, "1", "1", "1", true, true),
    (1, "1", "1", "2", false, false),
    (1, "1", "1", "3/2", true, true),
    (1, "1", "1", "3", false, false),
    (1, "1", "1", "inf", false, false),
    (1, "1", "2", "2", true, true),
    (1, "1", "2", "inf", false, false),
    (1, "1", "4", "inf", true, true),
    (1, "1", "inf", "inf", true, true),
    (1, "1", "4/3", "4", true, false),
    (1, "1", "4/3", "6", false, false),
    (1, "1", "4/3", "3", true, true),
    (1, "1", "3/2", "6", true, false),
    (1, "1", "3/2", "inf", false, false),
    // d = 2, α = 2: t = 2/3
    (2, "2", "1", "3/2", false, false),
    (2, "2", "1", "1", true, true),
    (2, "2", "1", "7/5", true, true),
    (2, "2", "3", "inf", false, false),
    (2, "2", "3", "100", true, true),
    (2, "2", "2", "6", true, false),
    (2, "2", "2", "7", false, false),
    (2, "2", "2", "2", true, true),
    (2, "2", "6", "inf", true, true),
    // d = 3, α = 1: t = 1/4
    (3, "1", "1", "4", false, false),
    (3, "1", "1", "3", true, true),
    (3, "1", "4/3", "inf", false, false),
    (3, "1", "2", "inf", true, true),
    (3, "1", "8/7", "8", true, false),
    (3, "1", "8/7", "9", false, false),
    // d = 1, α = 3/2: t = 3/4
    (1, "3/2", "2", "4", true, false),
    (1, "3/2", "4", "inf", false, false),
    (1, "3/2", "8", "inf", true, true),
    (1, "3/2", "1", "4/3", false, false),
    (1, "3/2", "1", "1", true, true),
    // α = d + 1
    (1, "2", "1", "1", false, false),
    (1, "2", "inf", "inf", false, false),
    (1, "2", "inf", "2", true, true),
    (1, "2", "2", "2", true, false),
    (1, "2", "2", "3/2", true, true),
    (1, "2", "2", "3", false, false),
    (1, "2", "inf", "1", true, true),
    (2, "3", "1", "inf", false, false),
    (2, "3", "4", "4", true, false),
    (2, "3", "4", "2", true, true),
    (2, "3", "4/3", "2", false, false),
    (3, "4", "inf", "inf", false, false),
    (3, "4", "3", "3", true, false),
    // d + 1 < α < d + 2
    (1, "5/2", "inf", "1", true, true),
    (1, "5/2", "inf", "2", false, false),
    (1, "5/2", "4", "1", true, true),
    (1, "5/2", "4", "4/3", false, false),
    (1, "5/2", "2", "1", false, false),
    (2, "13/4", "inf", "3", true, true),
    (2, "13/4", "2", "4/3", false, false),
    (2, "13/4", "8", "1", true, true),
    // α ≥ d + 2
    (1, "3", "inf", "1", false, false),
    (2, "5", "2", "2", false, false),
];

fn random_pair(rng: &mut impl Rng) -> ExponentPair {
    let den = rng.random_range(1..=24i64);
    ExponentPair::from_ratios(rng.random_range(0..=den), den, rng.random_range(0..=den), den).unwrap()
}

fn random_alpha(rng: &mut impl Rng) -> (usize, BigRational) {
    let d = rng.random_range(1..=4usize);
    let den = rng.random_range(1..=12i64);
    let num = rng.random_range(-den..=den * (d as i64 + 3));
    (d, BigRational::new(BigInt::from(num), BigInt::from(den)))
}

fn classifier_golden() -> Outcome {
    let start = Instant::now();
    let mut misses = Vec::new();
    for (i, &(d, a, p, q, bounded, compact)) in GOLDEN.iter().enumerate() {
        let v = classify_exact(d, &rational(a), &ExponentPair::parse(p, q).unwrap());
        if (v.bounded, v.compact) != (bounded, compact) {
            misses.push(i);
        }
    }
    let mut rng = seeded_stream(SEED, 5);
    let mut symmetric = 0;
    let mut convex = 0;
    let n = 10_000;
    for _ in 0..n {
        let (d, a) = random_alpha(&mut rng);
        let e = random_pair(&mut rng);
        let v = classify_exact(d, &a, &e);
        let w = classify_exact(d, &a, &e.conjugate());
        if (v.bounded, v.compact) == (w.bounded, w.compact) {
            symmetric += 1;
        }
        let f = random_pair(&mut rng);
        let theta = BigRational::new(BigInt::from(rng.random_range(0..=12)), BigInt::from(12));
        let mid = classify_exact(d, &a, &e.combine(&f, &theta).unwrap());
        let u = classify_exact(d, &a, &f);
        if (!(v.bounded && u.bounded) || mid.bounded) && (!(v.compact && u.compact) || mid.compact) {
            convex += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        misses.is_empty() && symmetric == n && convex == n && elapsed < Duration::from_secs(5),
        format!(
            "{}/60 golden verdicts (mismatched rows {misses:?}); symmetry {symmetric}/{n}; convexity {convex}/{n}; {elapsed:.2?} (limit 5 s)",
            60 - misses.len()
        ),
    )
}

/// Carleson vanishing probe against compactness at α = (d+1)/2, then the
/// empirical boundedness probe on the 9×9 grid `(i/8, j/8)`.
fn cross_validation() -> Outcome {
    let mut rng = seeded_stream(SEED, 6);
    let grid: Vec<f64> = (1..=12).map(|k| 1.0 - 10f64.powi(-k)).collect();
    let mut carleson_ok = 0;
    for case in 0..20 {
        let d = 1 + case % 2;
        let alpha = (d as f64 + 1.0) / 2.0;
        let den = rng.random_range(2..=24i64);
        let x = rng.random_range(1..den);
        let y = rng.random_range(1..=x);
        let e = ExponentPair::from_ratios(x, den, y, den).unwrap();
        let prm = params(d, alpha);
        let values = carleson_probe(&prm, e.p(), e.q(), 1.0, &grid).unwrap();
        let vanishes = carleson_decay_rate(&values, &grid).unwrap() > 1e-4 && values[11] < values[0];
        if vanishes == classify(&prm, &e).compact {
            carleson_ok += 1;
        }
    }
    let mut agree = 0;
    let mut disagree = 0;
    let mut indeterminate = 0;
    for d in [1usize, 2] {
        let big_d = d as f64 + 1.0;
        for alpha in [big_d / 2.0, big_d, big_d + 0.5] {
            let prm = params(d, alpha);
            for i in 0..=8 {
                for j in 0..=8 {
                    let probe = probe_boundedness(&prm, &ExponentPair::from_ratios(i, 8, j, 8).unwrap()).unwrap();
                    match probe.agrees() {
                        Some(true) => agree += 1,
                        Some(false) => disagree += 1,
                        None => indeterminate += 1,
                    }
                }
            }
        }
    }
    let total = agree + disagree + indeterminate;
    outcome(
        carleson_ok == 20 && disagree == 0 && indeterminate * 10 <= total,
        format!(
            "Carleson probe matches compactness {carleson_ok}/20; boundedness probe on six 9×9 grids: {agree} agree, {disagree} disagree, {indeterminate} indeterminate (cap 10%)"
        ),
    )
}

fn hls_suite() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (d, alpha, p) in [(1, 1.0, "2"), (1, 2.4, "4")] {
        let r = verify_hls(&params(d, alpha), &HlsExponents::parse(p, p).unwrap(), 200, SEED).unwrap();
        pass &= r.violations == 0;
        let bound = r.bound.map_or(f64::NAN, |b| b.value);
        parts.push(format!("d={d} α={alpha} p=s={p}: {} violations, max ratio {:.4} ≤ {bound:.4}", r.violations, r.max_ratio));
    }
    outcome(pass, format!("seed 42, 200 trials; {}", parts.join("; ")))
}

fn spectrum() -> Outcome {
    let (v, _) = cli_json(&["spectrum", "--d", "1", "--alpha", "1", "--n", "20"]);
    let worst = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["eigenvalue"].as_f64().unwrap() - 1.0 / (e["j"].as_f64().unwrap() + 1.0)).abs())
        .fold(0.0, f64::max);
    let alphas = [0.1, 0.5, 0.9, 1.0, 1.2, 1.5];
    let unit = alphas.iter().all(|&a| {
        let r = l2_spectral_report(&params(1, a), 10_000).unwrap();
        r.norm == 1.0 && r.monotone_ratio_check
    });
    outcome(
        worst < 1e-12 && unit,
        format!("max |λ_j − 1/(j+1)| = {worst:.1e} over 20 (tol 1e-12); L² norm 1 with monotone ratios for α ∈ {alphas:?}: {unit}"),
    )
}

/// Bumps on balls of radius `2^{−k−1}` at `(1 − 2^{−k}) e₁` in the 3-ball, α = 4.
fn weak_type() -> Outcome {
    let ks: Vec<u32> = (1..=8).collect();
    let r = concentrating_bumps(&params(3, 4.0), &ks, 1 << 18, SEED).unwrap();
    let bounded = r.weak.iter().all(|&w| w <= 1.05 * r.weak_limit);
    let steps: Vec<f64> = r.weak.windows(2).map(|w| w[1] - w[0]).collect();
    let decelerating = steps[steps.len() - 1] < steps[steps.len() - 2];
    outcome(
        bounded && decelerating && r.strong_growth >= 10.0,
        format!(
            "weak quasinorms {:.3}..{:.3} stay below the boundary limit {:.3} (+5%) with shrinking steps: {}; strong norm growth {:.1}× (need ≥ 10×)",
            r.weak[0],
            r.weak[r.weak.len() - 1],
            r.weak_limit,
            bounded && decelerating,
            r.strong_growth
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("trace formula", trace_formula),
        ("Euler-Jacobi identity", euler_jacobi),
        ("weighted kernel integral", rudin_integral_cases),
        ("exact norms", exact_norms),
        ("classifier golden table", classifier_golden),
        ("cross-validation", cross_validation),
        ("bilinear-form suite", hls_suite),
        ("disc spectrum", spectrum),
        ("weak type", weak_type),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {} {name}: {} ({:.1?})", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail, start.elapsed());
    }
    println!("acceptance: {}/9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
