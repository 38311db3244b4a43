//! The finite-dimensional standard form on the Hilbert–Schmidt space.
//!
//! With `ϱ = Σ λ_x |a_x⟩⟨a_x|` and `ς = Σ μ_y |b_y⟩⟨b_y|`, the relative modular
//! operator `Δ_{ρ|σ}: X ↦ ϱXς⁻¹` is diagonal in the basis `|a_x⟩⟨b_y|` with
//! eigenvalue `λ_x/μ_y`. The vector `Ω_σ = ς^{1/2}` has component
//! `μ_y^{1/2}⟨a_x|b_y⟩` on that basis element, so every quantity in this crate
//! reduces to the triple `(λ, μ, ⟨a_x|b_y⟩)`. `Δ` itself is never formed as a
//! `dim²×dim²` matrix.

use crate::error::{Error, Result};
use crate::linalg::{le_band, max_abs, CMatrix, EigenSystem, C64};
use crate::measure::{Atom, AtomicMeasure, MERGE_TOL};
use crate::states::StatePair;

/// Spectral weights below this are treated as rounding noise and moved to the
/// defect of the spectral distribution.
pub const NEGLIGIBLE_WEIGHT: f64 = 1e-20;

/// Eigenstructure of `Δ_{ρ|σ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularSpectrum {
    lambdas: Vec<f64>,
    mus: Vec<f64>,
    /// `overlaps[(x, y)] = ⟨a_x|b_y⟩`
    overlaps: CMatrix,
    rho_basis: CMatrix,
    sigma_basis: CMatrix,
}

/// One eigenvalue of `Δ` with its weights in the two vector states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularPair {
    pub x: usize,
    pub y: usize,
    pub ratio: f64,
    pub weight_sigma: f64,
    pub weight_rho: f64,
}

impl ModularSpectrum {
    /// Build from eigensystems of `ϱ` and `ς` (ascending, orthonormal).
    pub fn from_eigensystems(rho: &EigenSystem, sigma: &EigenSystem) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
        }
        if rho.values.iter().chain(&sigma.values).any(|&v| !(v > 0.0)) {
            return Err(Error::state("faithfulness", "non-positive eigenvalue"));
        }
        Ok(Self {
            lambdas: rho.values.clone(),
            mus: sigma.values.clone(),
            overlaps: rho.vectors.adjoint() * &sigma.vectors,
            rho_basis: rho.vectors.clone(),
            sigma_basis: sigma.vectors.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn overlaps(&self) -> &CMatrix {
        &self.overlaps
    }

    pub fn ratio(&self, x: usize, y: usize) -> f64 {
        self.lambdas[x] / self.mus[y]
    }

    pub fn weight_sigma(&self, x: usize, y: usize) -> f64 {
        self.mus[y] * self.overlaps[(x, y)].norm_sqr()
    }

    pub fn weight_rho(&self, x: usize, y: usize) -> f64 {
        self.lambdas[x] * self.overlaps[(x, y)].norm_sqr()
    }

    /// All `dim²` eigenpairs of `Δ`, row-major in `(x, y)`.
    pub fn pairs(&self) -> impl Iterator<Item = ModularPair> + '_ {
        let n = self.dim();
        (0..n).flat_map(move |x| {
            (0..n).map(move |y| ModularPair {
                x,
                y,
                ratio: self.ratio(x, y),
                weight_sigma: self.weight_sigma(x, y),
                weight_rho: self.weight_rho(x, y),
            })
        })
    }

    /// `λ_x ≤ ε μ_y`, with the boundary band.
    pub fn in_lower_projection(&self, x: usize, y: usize, eps: f64) -> bool {
        le_band(self.lambdas[x], eps * self.mus[y])
    }

    /// Whether `eps` lies within `band` of some eigenvalue `λ_x/μ_y` of `Δ`.
    pub fn near_ratio(&self, eps: f64, band: f64) -> bool {
        self.pairs().any(|p| (p.ratio - eps).abs() <= band)
    }
}

pub fn modular_spectrum(pair: &StatePair) -> ModularSpectrum {
    ModularSpectrum::from_eigensystems(pair.rho.eig(), pair.sigma.eig())
        .expect("validated state pair")
}

/// `1_{(0,ε]}(Δ_{ρ|σ})Ω_σ = Σ_{λ_x ≤ εμ_y} μ_y^{1/2}⟨a_x|b_y⟩ |a_x⟩⟨b_y|`.
pub fn project_omega_sigma(spec: &ModularSpectrum, eps: f64) -> Result<CMatrix> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    let n = spec.dim();
    let coeffs = CMatrix::from_fn(n, n, |x, y| {
        if spec.in_lower_projection(x, y, eps) {
            spec.overlaps[(x, y)] * spec.mus[y].sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(&spec.rho_basis * coeffs * spec.sigma_basis.adjoint())
}

/// Which vector state weights the spectral distribution of `log Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    /// Weights `μ_y|⟨a_x|b_y⟩|²`, i.e. the state `Ω_σ`.
    Sigma,
    /// Weights `λ_x|⟨a_x|b_y⟩|²`, i.e. the state `Ω_ρ`.
    Rho,
}

/// Distribution of `log Δ_{ρ|σ}` in the reference vector state.
pub fn spectral_distribution(spec: &ModularSpectrum, reference: Reference) -> AtomicMeasure {
    spectral_distribution_with(spec, reference, MERGE_TOL)
}

pub fn spectral_distribution_with(
    spec: &ModularSpectrum,
    reference: Reference,
    merge_tol: f64,
) -> AtomicMeasure {
    let atoms = spec.pairs().map(|p| Atom {
        position: p.ratio.ln(),
        mass: match reference {
            Reference::Sigma => p.weight_sigma,
            Reference::Rho => p.weight_rho,
        },
    });
    let m = AtomicMeasure::from_atoms(atoms, merge_tol).expect("finite positive weights");
    let total = m.total();
    let m = m.prune(NEGLIGIBLE_WEIGHT);
    let defect = m.defect();
    AtomicMeasure::from_parts(m.atoms().to_vec(), defect, total, merge_tol)
}

/// Residual of `J Δ^{1/2}(X Ω_σ) = X* Ω_ρ` in max-entry norm.
pub fn verify_modular_relation(pair: &StatePair, x: &CMatrix) -> Result<f64> {
    let n = pair.dim();
    if x.shape() != (n, n) {
        return Err(Error::DimensionMismatch(n, x.nrows()));
    }
    let rho_half = pair.rho.eig().apply(f64::sqrt)?;
    let sigma_half = pair.sigma.eig().apply(f64::sqrt)?;
    let sigma_neg_half = pair.sigma.eig().apply(|v| 1.0 / v.sqrt())?;

    let x_omega_sigma = x * sigma_half.as_matrix();
    let delta_half = rho_half.as_matrix() * x_omega_sigma * sigma_neg_half.as_matrix();
    let lhs = delta_half.adjoint();
    let rhs = x.adjoint() * rho_half.as_matrix();
    Ok(max_abs(&(lhs - rhs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{apply_fn, eig_hermitian, max_abs_diff, trace_of_product, HermitianMatrix};
    use crate::rng;
    use crate::states::{random_commuting_pair, DensityMatrix};

    fn e1() -> StatePair {
        StatePair::new(
            DensityMatrix::diagonal(&[0.7, 0.3]).unwrap(),
            DensityMatrix::diagonal(&[0.4, 0.6]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn e1_spectrum() {
        let spec = modular_spectrum(&e1());
        // λ = (0.3, 0.7), μ = (0.4, 0.6): a_0 = e₂, a_1 = e₁, b_0 = e₁, b_1 = e₂
        assert_close!(spec.overlaps()[(0, 1)].norm(), 1.0, 1e-15);
        assert_close!(spec.overlaps()[(1, 0)].norm(), 1.0, 1e-15);
        assert_close!(spec.overlaps()[(0, 0)].norm(), 0.0, 1e-15);
        assert_close!(spec.ratio(1, 0), 1.75, 1e-15);
        assert_close!(spec.weight_sigma(1, 0), 0.4, 1e-15);
        assert_close!(spec.ratio(0, 1), 0.5, 1e-15);
        assert_close!(spec.weight_sigma(0, 1), 0.6, 1e-15);
    }

    #[test]
    fn dim_one() {
        let d = DensityMatrix::diagonal(&[1.0]).unwrap();
        let spec = modular_spectrum(&StatePair::new(d.clone(), d).unwrap());
        let p: Vec<_> = spec.pairs().collect();
        assert_eq!(p.len(), 1);
        assert_close!(p[0].ratio, 1.0, 0.0);
        assert_close!(p[0].weight_sigma, 1.0, 0.0);
    }

    #[test]
    fn weights_normalized_and_related() {
        for seed in 0..20 {
            let pair = StatePair::random(2 + seed as usize % 5, seed).unwrap();
            let spec = modular_spectrum(&pair);
            let (ws, wr): (f64, f64) = spec
                .pairs()
                .fold((0.0, 0.0), |(a, b), p| (a + p.weight_sigma, b + p.weight_rho));
            assert_close!(ws, 1.0, 1e-10);
            assert_close!(wr, 1.0, 1e-10);
            for p in spec.pairs() {
                assert!((p.weight_rho - p.ratio * p.weight_sigma).abs() <= 1e-12 * p.weight_rho.max(1e-300));
            }
            let o = spec.overlaps();
            let n = spec.dim();
            assert!(max_abs_diff(&(o.adjoint() * o), &CMatrix::identity(n, n)) < 1e-9);
        }
    }

    #[test]
    fn e1_projections() {
        let spec = modular_spectrum(&e1());
        let p = project_omega_sigma(&spec, 0.6).unwrap();
        let want = HermitianMatrix::from_real_diagonal(&[0.0, 0.6f64.sqrt()]);
        assert!(max_abs_diff(&p, want.as_matrix()) < 1e-15);

        let p = project_omega_sigma(&spec, 0.4).unwrap();
        assert_eq!(max_abs(&p), 0.0);

        let p = project_omega_sigma(&spec, 1.75).unwrap();
        let want = HermitianMatrix::from_real_diagonal(&[0.4f64.sqrt(), 0.6f64.sqrt()]);
        assert!(max_abs_diff(&p, want.as_matrix()) < 1e-15);

        assert!(project_omega_sigma(&spec, 0.0).is_err());
    }

    #[test]
    fn full_projection_is_sqrt_sigma() {
        let pair = StatePair::random(4, 3).unwrap();
        let spec = modular_spectrum(&pair);
        let max_ratio = spec.pairs().map(|p| p.ratio).fold(0.0, f64::max);
        let p = project_omega_sigma(&spec, max_ratio * 1.01).unwrap();
        let half = apply_fn(pair.sigma.matrix(), f64::sqrt).unwrap();
        assert!(max_abs_diff(&p, half.as_matrix()) < 1e-12);
    }

    #[test]
    fn e1_distributions() {
        let spec = modular_spectrum(&e1());
        let s = spectral_distribution(&spec, Reference::Sigma);
        assert_eq!(s.len(), 2);
        assert_close!(s.atoms()[0].position, 0.5f64.ln(), 1e-15);
        assert_close!(s.atoms()[0].mass, 0.6, 1e-15);
        assert_close!(s.atoms()[1].position, 1.75f64.ln(), 1e-15);
        assert_close!(s.atoms()[1].mass, 0.4, 1e-15);

        let r = spectral_distribution(&spec, Reference::Rho);
        assert_close!(r.atoms()[0].mass, 0.3, 1e-15);
        assert_close!(r.atoms()[1].mass, 0.7, 1e-15);
    }

    #[test]
    fn identical_states_give_point_mass() {
        for seed in 0..10 {
            let d = crate::states::random_density(4, seed, 1e-10).unwrap();
            let spec = modular_spectrum(&StatePair::new(d.clone(), d).unwrap());
            for reference in [Reference::Sigma, Reference::Rho] {
                let m = spectral_distribution(&spec, reference);
                assert_eq!(m.len(), 1, "{:?}", m);
                assert_close!(m.atoms()[0].position, 0.0, 1e-12);
                assert_close!(m.atoms()[0].mass, 1.0, 1e-12);
            }
        }
    }

    #[test]
    fn relative_entropy_is_mean_of_rho_distribution() {
        for seed in 0..10 {
            let pair = StatePair::random(3, 100 + seed).unwrap();
            let log_rho = apply_fn(pair.rho.matrix(), f64::ln).unwrap();
            let log_sigma = apply_fn(pair.sigma.matrix(), f64::ln).unwrap();
            let diff = log_rho.as_matrix() - log_sigma.as_matrix();
            let d = trace_of_product(pair.rho.matrix().as_matrix(), &diff).re;
            let m = spectral_distribution(&modular_spectrum(&pair), Reference::Rho);
            assert_close!(m.mean(), d, 1e-9);
        }
    }

    #[test]
    fn quasi_entropy_identity() {
        let pair = StatePair::random(4, 77).unwrap();
        let spec = modular_spectrum(&pair);
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let via_spec: f64 = spec.pairs().map(|p| p.weight_sigma * p.ratio.powf(s)).sum();
            let rs = apply_fn(pair.rho.matrix(), |v| v.powf(s)).unwrap();
            let ss = apply_fn(pair.sigma.matrix(), |v| v.powf(1.0 - s)).unwrap();
            let direct = trace_of_product(rs.as_matrix(), ss.as_matrix()).re;
            assert_close!(via_spec, direct, 1e-9);
        }
    }

    #[test]
    fn tail_matches_projection_norm() {
        for seed in 0..20 {
            let pair = StatePair::random(2 + seed as usize % 4, 500 + seed).unwrap();
            let spec = modular_spectrum(&pair);
            let dist = spectral_distribution(&spec, Reference::Sigma);
            for eps in [0.1, 0.5, 1.0, 3.0] {
                let p = project_omega_sigma(&spec, eps).unwrap();
                let norm_sq: f64 = p.iter().map(|z| z.norm_sqr()).sum();
                let tail: f64 = dist
                    .atoms()
                    .iter()
                    .filter(|a| a.position > eps.ln())
                    .map(|a| a.mass)
                    .sum();
                assert_close!(1.0 - norm_sq, tail, 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_basis_independence() {
        let mut gen = rng::generator(2024);
        let u = rng::unitary(&mut gen, 3);
        let base = HermitianMatrix::from_real_diagonal(&[0.25, 0.25, 0.5]);
        let rho = HermitianMatrix::new(&u * base.as_matrix() * u.adjoint()).unwrap();
        let rho_eig = eig_hermitian(&rho).unwrap();
        let sigma = crate::states::random_density(3, 9, 1e-10).unwrap();

        // rotate the degenerate block (first two columns) by a random 2×2 unitary
        let w = rng::unitary(&mut gen, 2);
        let mut rotated = rho_eig.clone();
        let block = rho_eig.vectors.columns(0, 2) * w;
        rotated.vectors.columns_mut(0, 2).copy_from(&block);

        for reference in [Reference::Sigma, Reference::Rho] {
            let a = spectral_distribution(
                &ModularSpectrum::from_eigensystems(&rho_eig, sigma.eig()).unwrap(),
                reference,
            );
            let b = spectral_distribution(
                &ModularSpectrum::from_eigensystems(&rotated, sigma.eig()).unwrap(),
                reference,
            );
            assert_eq!(a.len(), b.len());
            for (x, y) in a.atoms().iter().zip(b.atoms()) {
                assert_close!(x.position, y.position, 1e-9);
                assert_close!(x.mass, y.mass, 1e-9);
            }
        }
    }

    #[test]
    fn modular_relation_holds() {
        let pair = e1();
        let n = 2;
        assert_close!(verify_modular_relation(&pair, &CMatrix::identity(n, n)).unwrap(), 0.0, 1e-15);
        assert_close!(verify_modular_relation(&pair, &CMatrix::zeros(n, n)).unwrap(), 0.0, 0.0);
        let mut gen = rng::generator(1);
        for _ in 0..5 {
            let x = rng::ginibre(&mut gen, 2, 2);
            assert!(verify_modular_relation(&pair, &x).unwrap() <= 1e-10);
        }
        let pair = StatePair::random(5, 8).unwrap();
        let x = rng::ginibre(&mut gen, 5, 5);
        assert!(verify_modular_relation(&pair, &x).unwrap() <= 1e-8 * (1.0 + max_abs(&x)));
    }

    #[test]
    fn commuting_pair_has_diagonal_overlaps() {
        let pair = random_commuting_pair(4, 5).unwrap();
        let spec = modular_spectrum(&pair);
        let dist = spectral_distribution(&spec, Reference::Sigma);
        assert!(dist.len() <= 4);
    }
}
