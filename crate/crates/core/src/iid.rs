//! Tensor powers through the spectral distribution of `log Δ`.
//!
//! For `ρ^{⊗n}`, `σ^{⊗n}` the modular operator factorizes, so the distribution
//! of `log Δ` in `Ω_{σ^{⊗n}}` is the `n`-fold convolution of the one-copy
//! distribution. Convolution is exact up to merging of coincident positions
//! and optional pruning of light atoms; pruned mass is carried as a defect so
//! every tail query returns an enclosing interval.

use crate::bounds::{divergence_report, keli_beta_bound, second_order_prediction};
use crate::error::{Error, Result};
use crate::measure::{merge_sorted, Atom, AtomicMeasure, MERGE_TOL};
use crate::modular::{modular_spectrum, spectral_distribution_with, Reference};
use crate::states::{tensor_power, StatePair};

/// Default cap on the number of atoms a convolution may produce.
pub const ATOM_BUDGET: usize = 5_000_000;

/// Cap on intermediate pairwise sums, relative to `ATOM_BUDGET`.
const PAIR_FACTOR: usize = 16;

/// Enclosure `[lower, upper]` of a tail mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailInterval {
    pub lower: f64,
    pub upper: f64,
}

impl TailInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lower - slack && v <= self.upper + slack
    }
}

/// Distribution of `X + Y` for independent `X ~ a`, `Y ~ b`.
pub fn convolve(
    a: &AtomicMeasure,
    b: &AtomicMeasure,
    merge_tol: f64,
    prune_tol: f64,
) -> Result<AtomicMeasure> {
    convolve_with_budget(a, b, merge_tol, prune_tol, ATOM_BUDGET)
}

fn convolve_with_budget(
    a: &AtomicMeasure,
    b: &AtomicMeasure,
    merge_tol: f64,
    prune_tol: f64,
    budget: usize,
) -> Result<AtomicMeasure> {
    let pairs = a.len().saturating_mul(b.len());
    if pairs > budget.saturating_mul(PAIR_FACTOR) {
        return Err(budget_error(pairs, prune_tol));
    }
    let mut sums = Vec::with_capacity(pairs);
    for x in a.atoms() {
        for y in b.atoms() {
            sums.push(Atom {
                position: x.position + y.position,
                mass: x.mass * y.mass,
            });
        }
    }
    sums.sort_by(|p, q| p.position.total_cmp(&q.position));
    let merged = merge_sorted(sums, merge_tol);
    if merged.len() > budget {
        return Err(budget_error(merged.len(), prune_tol));
    }

    let (da, db) = (a.defect(), b.defect());
    let (ta, tb) = (a.total(), b.total());
    let lost = da * tb + db * ta - da * db;
    let out = AtomicMeasure::from_parts(merged, lost, ta * tb, merge_tol).prune(prune_tol);
    Ok(out)
}

fn budget_error(count: usize, prune_tol: f64) -> Error {
    let suggestion = if prune_tol > 0.0 { prune_tol * 100.0 } else { 1e-18 };
    Error::Resource(format!(
        "convolution needs {count} atoms; retry with --prune-tol {suggestion:e} or larger"
    ))
}

/// `m^{∗n}` by binary exponentiation.
pub fn convolve_power(
    m: &AtomicMeasure,
    n: usize,
    merge_tol: f64,
    prune_tol: f64,
) -> Result<AtomicMeasure> {
    convolve_power_with_budget(m, n, merge_tol, prune_tol, ATOM_BUDGET)
}

pub fn convolve_power_with_budget(
    m: &AtomicMeasure,
    n: usize,
    merge_tol: f64,
    prune_tol: f64,
    budget: usize,
) -> Result<AtomicMeasure> {
    if n == 0 {
        return Err(Error::InvalidInput("convolution power n must be ≥ 1".into()));
    }
    let mut result: Option<AtomicMeasure> = None;
    let mut base = m.clone();
    let mut k = n;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => convolve_with_budget(&r, &base, merge_tol, prune_tol, budget)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = convolve_with_budget(&base, &base, merge_tol, prune_tol, budget)?;
    }
    Ok(result.expect("n ≥ 1"))
}

/// Enclosure of `m((threshold, ∞))` (`strict`) or `m([threshold, ∞))`.
///
/// Atoms within the measure's merge tolerance of `threshold` are logically at
/// the threshold: a strict query excludes them from `lower`, a non-strict one
/// includes them. `upper` always adds them together with the defect.
pub fn tail_mass(m: &AtomicMeasure, threshold: f64, strict: bool) -> TailInterval {
    let tol = m.merge_tol();
    let mut above = 0.0;
    let mut boundary = 0.0;
    for a in m.atoms() {
        if a.position > threshold + tol {
            above += a.mass;
        } else if a.position >= threshold - tol {
            boundary += a.mass;
        }
    }
    let lower = if strict { above } else { above + boundary };
    let upper = (above + boundary + m.defect()).min(m.total());
    TailInterval {
        lower: lower.min(upper),
        upper,
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    Ok(())
}

/// `⟨Ω_{σ^{⊗n}}, 1_{(ε,∞)}(Δ_{ρ^{⊗n}|σ^{⊗n}})Ω_{σ^{⊗n}}⟩` by convolution.
pub fn iid_keli_beta_bound(
    pair: &StatePair,
    eps: f64,
    n: usize,
    prune_tol: f64,
) -> Result<TailInterval> {
    check_eps(eps)?;
    let base = spectral_distribution_with(&modular_spectrum(pair), Reference::Sigma, MERGE_TOL);
    let power = convolve_power(&base, n, MERGE_TOL, prune_tol)?;
    Ok(tail_mass(&power, eps.ln(), true))
}

/// The same bound from explicitly built tensor powers.
pub fn tensor_beta_bound_direct(pair: &StatePair, eps: f64, n: usize) -> Result<f64> {
    check_eps(eps)?;
    let big = StatePair::new(tensor_power(&pair.rho, n)?, tensor_power(&pair.sigma, n)?)?;
    keli_beta_bound(&big, eps)
}

/// One row of the second-order Stein experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteinRow {
    pub n: usize,
    pub log_eps_n: f64,
    pub alpha_tail: TailInterval,
    pub minus_log_beta: f64,
    pub predicted: f64,
}

/// Distribution of `log Δ_{σ|ρ}` in `Ω_ρ`: the reflection of the ρ-weighted
/// distribution of `log Δ_{ρ|σ}`.
fn swapped_reference_measure(pair: &StatePair) -> AtomicMeasure {
    spectral_distribution_with(&modular_spectrum(&pair.swapped()), Reference::Sigma, MERGE_TOL)
}

/// Apply the lemma to `(σ^{⊗n}, ρ^{⊗n})` with `ε_n = exp(−(nD + √n·√V·Φ⁻¹(ε)))`
/// and take the complementary test: its type-II error is at most `ε_n` and its
/// type-I error at most the recorded tail, which tends to `ε`.
pub fn stein_experiment(
    pair: &StatePair,
    eps: f64,
    n_list: &[usize],
    prune_tol: f64,
) -> Result<Vec<SteinRow>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0,1), got {eps}")));
    }
    let div = divergence_report(pair)?;
    let base = swapped_reference_measure(pair);
    n_list
        .iter()
        .map(|&n| {
            let predicted = second_order_prediction(div.d, div.v, eps, n)?;
            let log_eps_n = -predicted;
            let power = convolve_power(&base, n, MERGE_TOL, prune_tol)?;
            Ok(SteinRow {
                n,
                log_eps_n,
                alpha_tail: tail_mass(&power, log_eps_n, true),
                minus_log_beta: -log_eps_n,
                predicted,
            })
        })
        .collect()
}

/// `1.2 · E|X − EX|³ / V^{3/2} / √n` for the one-copy measure used by
/// [`stein_experiment`].
pub fn berry_esseen_budget(pair: &StatePair, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be ≥ 1".into()));
    }
    let base = swapped_reference_measure(pair);
    let v = base.variance();
    if !(v > 0.0) {
        return Err(Error::InvalidInput("zero variance: the budget is undefined".into()));
    }
    Ok(1.2 * base.central_abs_moment(3.0) / v.powf(1.5) / (n as f64).sqrt())
}
