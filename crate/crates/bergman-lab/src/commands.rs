use crate::args::{Command, Format, Order, VerifyMode};
use crate::report::{num, Report, Table};
use crate::svg;
use bergman_lab_core::classifier::{
    classify, classify_exact, diagram_region, diagram_region_exact, parse_rational, to_f64, DiagramRegion, ExponentPair, RegionPolygon,
    AMBIGUOUS_SUFFIX,
};
use bergman_lab_core::hls_verifier::{concentrating_bumps, probe_boundedness, verify_hls, verify_weak_type, VerificationReport};
use bergman_lab_core::kernel_integrals::{hs_trace, rudin_integral, rudin_integral_mc};
use bergman_lab_core::norm_bounds::{
    hls_constants, norm_l1_to_lq, norm_linf_to_l1_exact_d1, norm_lp_to_linf, upper_bound_general, BoundKind, HlsExponents, NormBound,
};
use bergman_lab_core::operator_engine::{euler_jacobi_check, l2_spectral_report, squared_series};
use bergman_lab_core::Params;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

/// Why a command failed: bad flags (exit 2) or a domain/runtime error (exit 1).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<bergman_lab_core::Error> for Failure {
    fn from(e: bergman_lab_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

pub enum Output {
    Report(Report),
    /// Pre-rendered document (SVG, text raster).
    Raw(String),
}

/// Command result plus whether the run found a failed check.
pub struct Outcome {
    pub output: Output,
    pub check_failed: bool,
}

impl From<Report> for Outcome {
    fn from(r: Report) -> Self {
        Outcome { output: Output::Report(r), check_failed: false }
    }
}

struct Alpha {
    value: f64,
    exact: Option<BigRational>,
}

fn parse_alpha(s: &str) -> Result<Alpha, Failure> {
    if s.contains('/') {
        let r = parse_rational(s).map_err(|e| Failure::Usage(format!("--alpha {s}: {e}")))?;
        return Ok(Alpha { value: to_f64(&r), exact: Some(r) });
    }
    let value: f64 = s.trim().parse().map_err(|_| Failure::Usage(format!("--alpha {s}: not a number or fraction")))?;
    if !value.is_finite() {
        return Err(Failure::Usage(format!("--alpha {s}: must be finite")));
    }
    Ok(Alpha { value, exact: None })
}

fn params(order: &Order) -> Result<(Params, Alpha), Failure> {
    let alpha = parse_alpha(&order.alpha)?;
    let params = Params::new(order.d, alpha.value).map_err(|e| Failure::Usage(format!("--d {}: {e}", order.d)))?;
    Ok((params, alpha))
}

fn pair(p: &str, q: &str) -> Result<ExponentPair, Failure> {
    ExponentPair::parse(p, q).map_err(|e| Failure::Usage(format!("--p {p} --q {q}: {e}")))
}

fn exponent_str(inv: &BigRational) -> String {
    if inv.is_zero() {
        "inf".into()
    } else {
        (BigRational::one() / inv).to_string()
    }
}

fn order_fields(r: &mut Report, params: &Params, alpha: &Alpha) {
    r.set("d", params.d).num("alpha", params.alpha);
    if let Some(a) = &alpha.exact {
        r.set("alpha_exact", a.to_string());
    }
}

fn pair_fields(r: &mut Report, e: &ExponentPair) {
    r.set("p", exponent_str(e.inv_p()))
        .set("q", exponent_str(e.inv_q()))
        .set("inv_p", e.inv_p().to_string())
        .set("inv_q", e.inv_q().to_string());
}

fn kind_label(k: BoundKind) -> &'static str {
    match k {
        BoundKind::Exact => "exact",
        BoundKind::Upper => "upper",
    }
}

fn bound_fields(r: &mut Report, b: &NormBound) {
    r.num("value", b.value)
        .set("kind", kind_label(b.kind_for(true)))
        .set("kind_positive_kernel", kind_label(b.kind_for(false)))
        .set("formula_source", b.source)
        .set("method", "closed-form");
}

pub fn run(command: &Command, format: Format, seed: u64) -> Result<Outcome, Failure> {
    if format == Format::Svg && !matches!(command, Command::Diagram { .. }) {
        return Err(Failure::Usage("--format svg is only available for `diagram`".into()));
    }
    match command {
        Command::Classify { order, p, q } => classify_cmd(order, p, q).map(Into::into),
        Command::Diagram { order, resolution } => diagram_cmd(order, *resolution, format),
        Command::Norm { order, p, q, s } => norm_cmd(order, p, q.as_deref(), s.as_deref()).map(Into::into),
        Command::Trace { order, truncation } => trace_cmd(order, *truncation).map(Into::into),
        Command::Spectrum { order, n, truncation } => spectrum_cmd(order, *n, *truncation).map(Into::into),
        Command::Identity { alpha, truncation } => identity_cmd(*alpha, *truncation).map(Into::into),
        Command::Integral { d, beta, gamma, r, samples } => integral_cmd(*d, *beta, *gamma, *r, *samples, seed).map(Into::into),
        Command::Verify { order, mode, p, s, q, trials, ks, samples } => {
            verify_cmd(order, *mode, p.as_deref(), s.as_deref(), q.as_deref(), *trials, ks, *samples, seed)
        }
    }
}

fn classify_cmd(order: &Order, p: &str, q: &str) -> Result<Report, Failure> {
    let (params, alpha) = params(order)?;
    let e = pair(p, q)?;
    let v = match &alpha.exact {
        Some(a) => classify_exact(params.d, a, &e),
        None => classify(&params, &e),
    };
    let mut r = Report::default();
    order_fields(&mut r, &params, &alpha);
    pair_fields(&mut r, &e);
    let ambiguous = v.clause.ends_with(AMBIGUOUS_SUFFIX);
    r.set("bounded", v.bounded)
        .set("compact", v.compact)
        .set("formula_source", v.clause.trim_end_matches(AMBIGUOUS_SUFFIX))
        .set("clause", v.clause.clone())
        .set("boundary_ambiguous", ambiguous)
        .set("method", if alpha.exact.is_some() { "exact-rational" } else { "decimal-rational" });
    Ok(r)
}

fn polygon_json(poly: &RegionPolygon) -> Value {
    let vertices: Vec<Value> =
        poly.vertices.iter().map(|v| json!({"inv_p": v.inv_p.to_string(), "inv_q": v.inv_q.to_string(), "included": v.included})).collect();
    json!({"vertices": vertices, "closed_edges": poly.closed_edges})
}

fn raster(region: &DiagramRegion) -> String {
    let n = region.resolution;
    let mut s = String::new();
    for row in region.cells.chunks(n) {
        s.extend(row.iter().map(|c| match (c.verdict.bounded, c.verdict.compact) {
            (true, true) => 'C',
            (true, false) => 'B',
            _ => '.',
        }));
        s.push('\n');
    }
    s
}

fn diagram_cmd(order: &Order, resolution: usize, format: Format) -> Result<Outcome, Failure> {
    let (params, alpha) = params(order)?;
    let region = match &alpha.exact {
        Some(a) => diagram_region_exact(params.d, a, resolution)?,
        None => diagram_region(&params, resolution)?,
    };
    let alpha_label = alpha.exact.as_ref().map_or_else(|| params.alpha.to_string(), |a| a.to_string());
    let output = match format {
        Format::Svg => Output::Raw(svg::render(&region, &format!("Type diagram of K_α: d = {}, α = {alpha_label}", params.d))),
        Format::Text => Output::Raw(format!(
            "type diagram d = {} alpha = {alpha_label}  (rows 1/q = 1 → 0, columns 1/p = 0 → 1; C compact, B bounded, . unbounded)\n{}",
            params.d,
            raster(&region)
        )),
        _ => {
            let mut r = Report::default();
            order_fields(&mut r, &params, &alpha);
            r.set("resolution", resolution)
                .set("bounded_region", polygon_json(&region.bounded))
                .set("compact_region", polygon_json(&region.compact))
                .set("formula_source", "decision-table")
                .set("method", "exact-rational");
            let rows = region
                .cells
                .iter()
                .map(|c| {
                    vec![
                        c.pair.inv_p().to_string().into(),
                        c.pair.inv_q().to_string().into(),
                        c.verdict.bounded.into(),
                        c.verdict.compact.into(),
                        c.verdict.clause.clone().into(),
                    ]
                })
                .collect();
            r.table = Some(Table { name: "cells", columns: vec!["inv_p", "inv_q", "bounded", "compact", "clause"], rows });
            Output::Report(r)
        }
    };
    Ok(Outcome { output, check_failed: false })
}

fn norm_cmd(order: &Order, p: &str, q: Option<&str>, s: Option<&str>) -> Result<Report, Failure> {
    let (params, alpha) = params(order)?;
    let mut r = Report::default();
    order_fields(&mut r, &params, &alpha);
    if let Some(s) = s {
        let e = HlsExponents::parse(p, s).map_err(|e| Failure::Usage(format!("--p {p} --s {s}: {e}")))?;
        let b = hls_constants(&params, &e)?;
        r.set("p", exponent_str(&e.inv_p)).set("s", exponent_str(&e.inv_s)).set("quantity", "bilinear-constant");
        bound_fields(&mut r, &b);
        return Ok(r);
    }
    let q = q.ok_or_else(|| Failure::Usage("--q or --s is required".into()))?;
    let e = pair(p, q)?;
    let (x, y) = (e.inv_p(), e.inv_q());
    let b = if x.is_one() {
        norm_l1_to_lq(&params, e.q())?
    } else if y.is_zero() {
        norm_lp_to_linf(&params, e.p())?
    } else if params.d == 1 && x.is_zero() && y.is_one() && params.alpha > 2.0 && params.alpha < 3.0 {
        norm_linf_to_l1_exact_d1(params.alpha)?
    } else {
        upper_bound_general(&params, &e)?
    };
    pair_fields(&mut r, &e);
    r.set("quantity", "operator-norm");
    bound_fields(&mut r, &b);
    Ok(r)
}

fn trace_cmd(order: &Order, truncation: usize) -> Result<Report, Failure> {
    let (params, alpha) = params(order)?;
    let value = hs_trace(&params)?;
    let mut r = Report::default();
    order_fields(&mut r, &params, &alpha);
    r.num("value", value);
    if params.d == 1 {
        let series = squared_series(&params, truncation)?;
        r.set("formula_source", "disc-gamma-closed-form")
            .set("method", "closed-form")
            .num("series_total", series.total)
            .num("series_tail", series.tail)
            .num("series_tail_bound", series.tail_bound)
            .set("series_truncation", truncation)
            .num("series_residual", (series.total - value).abs());
    } else {
        r.set("formula_source", "radial-integral-of-kernel-mass").set("method", "quadrature");
    }
    Ok(r)
}

fn spectrum_cmd(order: &Order, n: usize, truncation: usize) -> Result<Report, Failure> {
    let (params, alpha) = params(order)?;
    let rep = l2_spectral_report(&params, truncation.max(n))?;
    let mut r = Report::default();
    order_fields(&mut r, &params, &alpha);
    r.num("norm", rep.norm)
        .set("norm_attained_at", rep.norm_attained_at.map_or(Value::Null, Value::from))
        .set("monotone_ratio_check", rep.monotone_ratio_check)
        .set("truncation", rep.spectrum.truncation)
        .set("remark", rep.remark.clone())
        .set("formula_source", "gamma-ratio-eigenvalues")
        .set("method", "series");
    match &rep.hilbert_schmidt_sum {
        Some(hs) => r.num("squared_sum", hs.total).num("squared_sum_tail_bound", hs.tail_bound),
        None => r.num("squared_sum", f64::INFINITY),
    };
    let rows = rep.spectrum.coefficients.iter().take(n).enumerate().map(|(j, c)| vec![j.into(), num(*c)]).collect();
    r.table = Some(Table { name: "eigenvalues", columns: vec!["j", "eigenvalue"], rows });
    Ok(r)
}

fn identity_cmd(alpha: f64, truncation: usize) -> Result<Report, Failure> {
    let c = euler_jacobi_check(alpha, truncation)?;
    let mut r = Report::default();
    r.num("alpha", alpha)
        .set("truncation", truncation)
        .num("series_partial", c.series.partial)
        .num("series_tail", c.series.tail)
        .num("series_tail_bound", c.series.tail_bound)
        .num("series_total", c.series.total)
        .num("closed_form", c.closed_form)
        .num("residual", c.residual)
        .set("formula_source", "euler-jacobi-squared-sum")
        .set("method", "series");
    Ok(r)
}

fn integral_cmd(d: usize, beta: f64, gamma: f64, rr: f64, samples: Option<usize>, seed: u64) -> Result<Report, Failure> {
    let params = Params::new(d, 0.0).map_err(|e| Failure::Usage(format!("--d {d}: {e}")))?;
    let value = rudin_integral(&params, beta, gamma, rr)?;
    let mut r = Report::default();
    r.set("d", d)
        .num("beta", beta)
        .num("gamma", gamma)
        .num("r", rr)
        .num("value", value)
        .set("formula_source", "hypergeometric-closed-form")
        .set("method", "closed-form");
    if let Some(n) = samples {
        let mc = rudin_integral_mc(&params, beta, gamma, rr, n, seed)?;
        r.num("mc_value", mc.value)
            .num("mc_std_error", mc.std_error)
            .set("mc_samples", mc.n_samples)
            .num("mc_z_score", (mc.value - value) / mc.std_error)
            .set("method", "closed-form+monte-carlo");
    }
    Ok(r)
}

fn required<'a>(v: Option<&'a str>, flag: &str, mode: &str) -> Result<&'a str, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--mode {mode} requires {flag}")))
}

fn verification_fields(r: &mut Report, v: &VerificationReport) {
    r.set("n_trials", v.n_trials).num("max_ratio", v.max_ratio).set("violations", v.violations);
    match &v.bound {
        Some(b) => r.num("bound", b.value).set("formula_source", b.source),
        None => r.set("bound", Value::Null).set("formula_source", "empirical"),
    };
    let rows = v.curve.iter().map(|(t, x)| vec![num(*t), num(*x)]).collect();
    r.table = Some(Table { name: "curve", columns: vec!["trial", "ratio"], rows });
}

#[allow(clippy::too_many_arguments)]
fn verify_cmd(
    order: &Order,
    mode: VerifyMode,
    p: Option<&str>,
    s: Option<&str>,
    q: Option<&str>,
    trials: usize,
    ks: &[u32],
    samples: usize,
    seed: u64,
) -> Result<Outcome, Failure> {
    let (params, alpha) = params(order)?;
    let mut r = Report::default();
    order_fields(&mut r, &params, &alpha);
    r.set("seed", seed);
    let mut check_failed = false;
    match mode {
        VerifyMode::Hls => {
            let (p, s) = (required(p, "--p", "hls")?, required(s, "--s", "hls")?);
            let e = HlsExponents::parse(p, s).map_err(|e| Failure::Usage(format!("--p {p} --s {s}: {e}")))?;
            let v = verify_hls(&params, &e, trials, seed)?;
            r.set("mode", "hls").set("p", exponent_str(&e.inv_p)).set("s", exponent_str(&e.inv_s)).set("method", "semi-analytic");
            verification_fields(&mut r, &v);
            check_failed = v.violations > 0;
        }
        VerifyMode::Weak => {
            let v = verify_weak_type(&params, trials, seed)?;
            r.set("mode", "weak").set("method", "monte-carlo");
            verification_fields(&mut r, &v);
        }
        VerifyMode::Bumps => {
            let b = concentrating_bumps(&params, ks, samples, seed)?;
            r.set("mode", "bumps")
                .num("weak_growth", b.weak_growth)
                .num("strong_growth", b.strong_growth)
                .num("weak_bound", b.weak_bound)
                .num("weak_limit", b.weak_limit)
                .set("samples", samples)
                .set("formula_source", "mean-value-ball-bumps")
                .set("method", "monte-carlo+closed-form");
            let rows = b.ks.iter().zip(&b.weak).zip(&b.strong).map(|((k, w), st)| vec![(*k).into(), num(*w), num(*st)]).collect();
            r.table = Some(Table { name: "family", columns: vec!["k", "weak_quasinorm", "strong_norm"], rows });
        }
        VerifyMode::Probe => {
            let e = pair(required(p, "--p", "probe")?, required(q, "--q", "probe")?)?;
            let b = probe_boundedness(&params, &e)?;
            pair_fields(&mut r, &e);
            r.set("mode", "probe")
                .set("verdict", b.verdict.label())
                .set("classified_bounded", b.classified.bounded)
                .set("clause", b.classified.clause.clone())
                .set("agrees", b.agrees().map_or(Value::Null, Value::from))
                .set("formula_source", "test-function-families")
                .set("method", "closed-form+series");
            let mut rows = Vec::new();
            for c in &b.curves {
                for (t, x) in c.parameter.iter().zip(&c.ratios) {
                    rows.push(vec![c.family.clone().into(), num(*t), num(*x), c.outcome.label().into()]);
                }
            }
            r.table = Some(Table { name: "curves", columns: vec!["family", "parameter", "ratio", "outcome"], rows });
            check_failed = b.agrees() == Some(false);
        }
    }
    Ok(Outcome { output: Output::Report(r), check_failed })
}
