//! Density matrices, state pairs, seeded random instances and tensor powers.

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, max_abs, CMatrix, EigenSystem, HermitianMatrix};
use crate::rng;

/// Default lower bound on the eigenvalues of a constructed state.
pub const FAITHFUL_FLOOR: f64 = 1e-10;

/// Largest Hilbert-space dimension `tensor_power` will materialize.
pub const TENSOR_DIM_LIMIT: usize = 4096;

const TRACE_TOL: f64 = 1e-10;

/// Faithful density matrix with its cached eigensystem.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    eig: EigenSystem,
}

impl DensityMatrix {
    /// Diagonal state; the entries must already be a faithful probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let (state, regularized) =
            density_from_matrix(&HermitianMatrix::from_real_diagonal(probs), FAITHFUL_FLOOR)?;
        let total: f64 = probs.iter().sum();
        if regularized || (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::state(
                "faithful probability vector",
                format!("{probs:?}"),
            ));
        }
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn eig(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    /// Check the type invariants against `floor`.
    pub fn check(&self, floor: f64) -> Result<()> {
        let min = self.eig.values[0];
        if min < floor {
            return Err(Error::state("faithfulness", format!("min eigenvalue {min:e} < {floor:e}")));
        }
        let tr = self.matrix.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::state("unit trace", format!("trace {tr}")));
        }
        Ok(())
    }
}

/// Normalize `m` to unit trace and clip eigenvalues below `floor` up to it.
///
/// The unclipped eigenvalues are rescaled so the trace stays exactly one, which
/// keeps every clipped eigenvalue at `floor`. The flag reports whether any
/// clipping happened.
pub fn density_from_matrix(m: &HermitianMatrix, floor: f64) -> Result<(DensityMatrix, bool)> {
    let tr = m.trace();
    if !tr.is_finite() || tr <= 0.0 {
        return Err(Error::state("positive trace", format!("trace {tr}")));
    }
    if !(floor >= 0.0) || floor * m.dim() as f64 >= 1.0 {
        return Err(Error::InvalidInput(format!("floor {floor} infeasible in dimension {}", m.dim())));
    }
    let normalized = m.combine(1.0 / tr, &HermitianMatrix::zeros(m.dim()), 0.0)?;
    let eig = eig_hermitian(&normalized)?;

    if eig.values[0] >= floor {
        let total: f64 = eig.values.iter().sum();
        let values = eig.values.iter().map(|v| v / total).collect();
        let eig = EigenSystem {
            values,
            vectors: eig.vectors,
        };
        return Ok((
            DensityMatrix {
                matrix: normalized,
                eig,
            },
            false,
        ));
    }

    // Clip the k smallest; grow k until the rescaled remainder stays above floor.
    let n = eig.values.len();
    let mut k = eig.values.iter().filter(|&&v| v < floor).count();
    let values = loop {
        let rest: f64 = eig.values[k..].iter().sum();
        let scale = (1.0 - k as f64 * floor) / rest;
        let candidate: Vec<f64> = (0..n)
            .map(|i| if i < k { floor } else { eig.values[i] * scale })
            .collect();
        if k == n || candidate[k] >= floor {
            break candidate;
        }
        k += 1;
    };
    let eig = EigenSystem {
        values,
        vectors: eig.vectors,
    };
    let matrix = eig.reconstruct();
    Ok((DensityMatrix { matrix, eig }, true))
}

/// Ginibre-sampled state `GG*/tr(GG*)`, regularized at `floor`.
pub fn random_density(dim: usize, seed: u64, floor: f64) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::InvalidInput("dim must be ≥ 1".into()));
    }
    let mut gen = rng::generator(seed);
    let g = rng::ginibre(&mut gen, dim, dim);
    let w = HermitianMatrix::new(&g * g.adjoint())?;
    Ok(density_from_matrix(&w, floor)?.0)
}

/// The two hypotheses `ρ` and `σ` on a common space.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePair {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
}

impl StatePair {
    pub fn new(rho: DensityMatrix, sigma: DensityMatrix) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
        }
        Ok(Self { rho, sigma })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `(σ, ρ)`.
    pub fn swapped(&self) -> Self {
        Self {
            rho: self.sigma.clone(),
            sigma: self.rho.clone(),
        }
    }

    /// Two independent Ginibre states at the default floor.
    pub fn random(dim: usize, seed: u64) -> Result<Self> {
        let rho = random_density(dim, rng::derive_seed(seed, 0), FAITHFUL_FLOOR)?;
        let sigma = random_density(dim, rng::derive_seed(seed, 1), FAITHFUL_FLOOR)?;
        Self::new(rho, sigma)
    }
}

/// Commuting pair: two random spectra on one shared Haar-random eigenbasis.
pub fn random_commuting_pair(dim: usize, seed: u64) -> Result<StatePair> {
    if dim == 0 {
        return Err(Error::InvalidInput("dim must be ≥ 1".into()));
    }
    let mut gen = rng::generator(seed);
    let p = rng::simplex_point(&mut gen, dim);
    let q = rng::simplex_point(&mut gen, dim);
    let u = rng::unitary(&mut gen, dim);
    let build = |probs: &[f64]| -> Result<DensityMatrix> {
        let d = HermitianMatrix::from_real_diagonal(probs);
        let m = HermitianMatrix::new(&u * d.as_matrix() * u.adjoint())?;
        Ok(density_from_matrix(&m, FAITHFUL_FLOOR)?.0)
    };
    StatePair::new(build(&p)?, build(&q)?)
}

/// `max |ϱς − ςϱ|`.
pub fn commutator_norm(pair: &StatePair) -> f64 {
    let a = pair.rho.matrix().as_matrix();
    let b = pair.sigma.matrix().as_matrix();
    let c: CMatrix = a * b - b * a;
    max_abs(&c)
}

/// `n`-fold Kronecker power, limited to `TENSOR_DIM_LIMIT`.
pub fn tensor_power(state: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("tensor power n must be ≥ 1".into()));
    }
    if n == 1 {
        return Ok(state.clone());
    }
    let dim = state
        .dim()
        .checked_pow(n as u32)
        .filter(|&d| d <= TENSOR_DIM_LIMIT)
        .ok_or_else(|| {
            Error::Resource(format!(
                "dimension {}^{} exceeds {}; use the convolution path (iid_keli_beta_bound)",
                state.dim(),
                n,
                TENSOR_DIM_LIMIT
            ))
        })?;
    let mut acc = state.matrix().clone();
    for _ in 1..n {
        acc = acc.kron(state.matrix());
    }
    debug_assert_eq!(acc.dim(), dim);
    // products of floor-level eigenvalues can round to ≤ 0; keep them positive
    Ok(density_from_matrix(&acc, f64::MIN_POSITIVE)?.0)
}
