//! Projective tests and their error probabilities.
//!
//! Outcome 1 of a test `T` means "conclude σ". The two error probabilities are
//! `α(T) = ρ(T)` and `β(T) = σ(Id − T)`.

use crate::error::{Error, Result};
use crate::linalg::{
    default_rank_tol, eig_hermitian, le_band, support_projector, trace_of_product, CMatrix,
    Projector,
};
use crate::modular::{modular_spectrum, project_omega_sigma, ModularSpectrum};
use crate::rng::{self, Generator};
use crate::states::StatePair;

const PROB_TOL: f64 = 1e-10;

/// A test: an orthogonal projector on `ℂ^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Test {
    projector: Projector,
}

impl Test {
    pub fn new(projector: Projector) -> Self {
        Self { projector }
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn matrix(&self) -> &CMatrix {
        self.projector.as_matrix()
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    pub fn rank(&self) -> usize {
        self.projector.rank()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorPair {
    pub alpha: f64,
    pub beta: f64,
}

/// Ke Li's test: the left support of `1_{(0,ε]}(Δ_{ρ|σ})Ω_σ`.
pub fn keli_test(pair: &StatePair, eps: f64) -> Result<Test> {
    keli_test_from_spectrum(&modular_spectrum(pair), eps)
}

pub fn keli_test_from_spectrum(spec: &ModularSpectrum, eps: f64) -> Result<Test> {
    let x = project_omega_sigma(spec, eps)?;
    Ok(Test::new(support_projector(&x, default_rank_tol(spec.dim()))?))
}

/// Ke Li's test as the projector onto `span{Q_y b_y}` with
/// `Q_y = 1_{[0, εμ_y]}(ϱ)`.
pub fn keli_test_spanning(pair: &StatePair, eps: f64) -> Result<Test> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    let n = pair.dim();
    let rho_eig = pair.rho.eig();
    let sigma_eig = pair.sigma.eig();
    let mut xi = CMatrix::zeros(n, n);
    for (y, &mu) in sigma_eig.values.iter().enumerate() {
        let q_y = rho_eig.projector(|lambda| le_band(lambda, eps * mu));
        xi.set_column(y, &(q_y.as_matrix() * sigma_eig.vectors.column(y)));
    }
    Ok(Test::new(support_projector(&xi, default_rank_tol(n))?))
}

/// Width of the band around 0 whose eigenvalues count as ties.
pub fn tie_tol(spectral_norm: f64) -> f64 {
    1e-12 * (1.0 + spectral_norm)
}

/// Bayes-risk minimizer for priors `(p, 1−p)`: the projector onto the strictly
/// negative part of `pϱ − (1−p)ς`, tie band excluded.
pub fn neyman_pearson_test(pair: &StatePair, p: f64) -> Result<Test> {
    check_prior(p)?;
    let q = 1.0 - p;
    let a = pair.rho.matrix().combine(p, pair.sigma.matrix(), -q)?;
    let eig = eig_hermitian(&a)?;
    let norm = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = tie_tol(norm);
    Ok(Test::new(eig.projector(|v| v < -tol)))
}

fn check_prior(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidInput(format!("prior p must lie in (0,1), got {p}")));
    }
    Ok(())
}

/// `(ρ(T), σ(Id − T))`.
pub fn error_pair(pair: &StatePair, test: &Test) -> Result<ErrorPair> {
    if test.dim() != pair.dim() {
        return Err(Error::DimensionMismatch(pair.dim(), test.dim()));
    }
    let alpha = trace_of_product(pair.rho.matrix().as_matrix(), test.matrix()).re;
    let beta = 1.0 - trace_of_product(pair.sigma.matrix().as_matrix(), test.matrix()).re;
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&v) {
            return Err(Error::InvalidInput(format!("{name} = {v} outside [0,1]")));
        }
    }
    Ok(ErrorPair {
        alpha: alpha.clamp(0.0, 1.0),
        beta: beta.clamp(0.0, 1.0),
    })
}

/// `p·α(T) + (1−p)·β(T)`.
pub fn bayes_risk(pair: &StatePair, p: f64, test: &Test) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("prior p must lie in [0,1], got {p}")));
    }
    let e = error_pair(pair, test)?;
    Ok(p * e.alpha + (1.0 - p) * e.beta)
}

/// Haar-random projector with rank uniform in `{0, …, dim}`.
pub fn random_test(gen: &mut Generator, dim: usize) -> Test {
    use rand::Rng;
    let rank = gen.random_range(0..=dim);
    let q = rng::orthonormal_columns(gen, dim, rank);
    Test::new(Projector::from_orthonormal_columns(&q, dim))
}
