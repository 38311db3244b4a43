//! Scalar bounds and divergences. Logarithms are natural throughout.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::linalg::{jordan_parts, trace_of_product};
use crate::modular::{modular_spectrum, ModularSpectrum};
use crate::states::StatePair;

/// `⟨Ω_σ, 1_{(ε,∞)}(Δ_{ρ|σ})Ω_σ⟩`: the σ-weight of the pairs with `λ_x > εμ_y`.
pub fn keli_beta_bound(pair: &StatePair, eps: f64) -> Result<f64> {
    keli_beta_bound_from_spectrum(&modular_spectrum(pair), eps)
}

pub fn keli_beta_bound_from_spectrum(spec: &ModularSpectrum, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    Ok(spec
        .pairs()
        .filter(|p| !spec.in_lower_projection(p.x, p.y, eps))
        .map(|p| p.weight_sigma)
        .sum())
}

fn check_exponent(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidInput(format!("s must lie in [0,1], got {s}")));
    }
    Ok(())
}

/// `tr(ϱ^s ς^{1−s}) = ⟨Ω_σ, Δ^s Ω_σ⟩` by functional calculus.
pub fn quasi_entropy(pair: &StatePair, s: f64) -> Result<f64> {
    check_exponent(s)?;
    let rho_s = pair.rho.eig().apply(|v| v.powf(s))?;
    let sigma_s = pair.sigma.eig().apply(|v| v.powf(1.0 - s))?;
    Ok(trace_of_product(rho_s.as_matrix(), sigma_s.as_matrix()).re)
}

/// `Σ weight_σ · ratio^s` over the modular spectrum.
pub fn quasi_entropy_from_spectrum(spec: &ModularSpectrum, s: f64) -> Result<f64> {
    check_exponent(s)?;
    Ok(spec.pairs().map(|p| p.weight_sigma * p.ratio.powf(s)).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernoffBound {
    pub value: f64,
    pub s_star: f64,
}

fn check_prior(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidInput(format!("prior p must lie in (0,1), got {p}")));
    }
    Ok(1.0 - p)
}

/// `inf_{s∈[0,1]} p^s q^{1−s} tr(ϱ^s ς^{1−s})` by golden-section search.
///
/// `s ↦ log tr(ϱ^s ς^{1−s})` is convex, so the objective is unimodal.
pub fn chernoff_bound(pair: &StatePair, p: f64) -> Result<ChernoffBound> {
    let q = check_prior(p)?;
    let g = |s: f64| -> Result<f64> { Ok(p.powf(s) * q.powf(1.0 - s) * quasi_entropy(pair, s)?) };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    while b - a > 1e-10 {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let best = [(mid, g(mid)?), (0.0, q), (1.0, p)]
        .into_iter()
        .fold((mid, f64::INFINITY), |acc, cand| if cand.1 < acc.1 { cand } else { acc });
    Ok(ChernoffBound {
        value: best.1,
        s_star: best.0,
    })
}

/// Brute-force minimum over `points` equally spaced `s ∈ [0,1]`.
pub fn chernoff_grid_scan(pair: &StatePair, p: f64, points: usize) -> Result<ChernoffBound> {
    let q = check_prior(p)?;
    let mut best = ChernoffBound {
        value: f64::INFINITY,
        s_star: 0.0,
    };
    for k in 0..points.max(2) {
        let s = k as f64 / (points.max(2) - 1) as f64;
        let v = p.powf(s) * q.powf(1.0 - s) * quasi_entropy(pair, s)?;
        if v < best.value {
            best = ChernoffBound { value: v, s_star: s };
        }
    }
    Ok(best)
}

/// `min_T p·α(T) + q·β(T) = q − tr((pϱ − qς)₋)`.
pub fn min_bayes_risk_closed_form(pair: &StatePair, p: f64) -> Result<f64> {
    let q = check_prior(p)?;
    let a = pair.rho.matrix().combine(p, pair.sigma.matrix(), -q)?;
    let (_, negative) = jordan_parts(&a)?;
    Ok(q - negative.trace())
}

/// `L = log ϱ − log ς`.
fn log_ratio_operator(pair: &StatePair) -> Result<crate::linalg::CMatrix> {
    let log_rho = pair.rho.eig().apply(f64::ln)?;
    let log_sigma = pair.sigma.eig().apply(f64::ln)?;
    Ok(log_rho.as_matrix() - log_sigma.as_matrix())
}

/// `D = tr ϱ(log ϱ − log ς)`.
pub fn relative_entropy(pair: &StatePair) -> Result<f64> {
    let l = log_ratio_operator(pair)?;
    Ok(trace_of_product(pair.rho.matrix().as_matrix(), &l).re)
}

/// `V = tr ϱ(log ϱ − log ς)² − D²`.
pub fn relative_entropy_variance(pair: &StatePair) -> Result<f64> {
    Ok(divergence_report(pair)?.v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceReport {
    pub d: f64,
    pub v: f64,
}

pub fn divergence_report(pair: &StatePair) -> Result<DivergenceReport> {
    let l = log_ratio_operator(pair)?;
    let rho = pair.rho.matrix().as_matrix();
    let d = trace_of_product(rho, &l).re;
    let second = trace_of_product(&(rho * &l), &l).re;
    Ok(DivergenceReport {
        d,
        v: second - d * d,
    })
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `Φ⁻¹(u)`: rational approximation refined by one Halley step against
/// [`normal_cdf`].
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidInput(format!("quantile level must lie in (0,1), got {u}")));
    }
    if u > 0.5 {
        return Ok(-lower_quantile(1.0 - u));
    }
    Ok(lower_quantile(u))
}

fn lower_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if u < P_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    let e = normal_cdf(x) - u;
    let t = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - t / (1.0 + 0.5 * x * t)
}

/// `nD + √n·√V·Φ⁻¹(ε)`.
pub fn second_order_prediction(d: f64, v: f64, eps: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be ≥ 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0,1), got {eps}")));
    }
    let n = n as f64;
    Ok(n * d + n.sqrt() * v.max(0.0).sqrt() * normal_quantile(eps)?)
}
