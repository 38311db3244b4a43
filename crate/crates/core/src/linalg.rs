//! Dense complex Hermitian linear algebra.
//!
//! Everything downstream factors through [`eig_hermitian`]: functional
//! calculus, spectral projectors, Jordan parts. Eigenpairs are returned in
//! ascending eigenvalue order with a fixed phase convention (the first
//! non-negligible component of every eigenvector is real and positive), so
//! identical input bits give identical outputs.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative width of the boundary band used by every spectral indicator.
pub const IND_TOL: f64 = 1e-12;

/// Components below this modulus are skipped when fixing eigenvector phases.
const PHASE_TOL: f64 = 1e-12;

/// Default relative cutoff for numerical rank, scaled by dimension.
pub fn default_rank_tol(dim: usize) -> f64 {
    1e-10 * dim.max(1) as f64
}

/// `v ≤ c` with the boundary band `IND_TOL·(1+|c|)`.
#[inline]
pub fn le_band(v: f64, c: f64) -> bool {
    v <= c + IND_TOL * (1.0 + c.abs())
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max_ij |a_ij - b_ij|`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `tr(AB)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Complex Hermitian matrix, symmetrized at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "matrix is not square: {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { m: sym })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let m = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { m }
    }

    /// Build from a row-major real array.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries, got {}",
                dim * dim,
                rows.len()
            )));
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| {
            C64::new(rows[i * dim + j], 0.0)
        }))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &HermitianMatrix, b: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        let m = &self.m * C64::new(a, 0.0) + &other.m * C64::new(b, 0.0);
        Ok(Self { m })
    }

    /// Kronecker product.
    pub fn kron(&self, other: &HermitianMatrix) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors in the columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Σ_k f(λ_k) v_k v_k*`; fails if `f` is non-finite at any eigenvalue.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> Result<HermitianMatrix> {
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            if !fk.is_finite() {
                return Err(Error::Domain(lambda));
            }
            scaled.column_mut(k).scale_mut(fk);
        }
        HermitianMatrix::new(scaled * self.vectors.adjoint())
    }

    /// Spectral projector onto the eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector<F: Fn(f64) -> bool>(&self, keep: F) -> Projector {
        let cols: Vec<usize> = (0..self.dim()).filter(|&k| keep(self.values[k])).collect();
        let q = self.vectors.select_columns(cols.iter());
        Projector::from_orthonormal_columns(&q, self.dim())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.apply(|x| x)
            .expect("identity map is finite on a finite spectrum")
    }
}

/// Hermitian eigendecomposition, ascending, with the fixed phase convention.
/// Relative reconstruction residual accepted from the eigensolver.
const EIG_RESIDUAL_TOL: f64 = 1e-12;

pub fn eig_hermitian(h: &HermitianMatrix) -> Result<EigenSystem> {
    let n = h.dim();
    let eig = SymmetricEigen::try_new(h.m.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::NoConvergence(n))?;
    let residual = max_abs_diff(&eig.recompose(), &h.m);
    if !(residual <= EIG_RESIDUAL_TOL * (1.0 + max_abs(&h.m)) * n as f64) {
        return Err(Error::NoConvergence(n));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = eig.eigenvectors.select_columns(order.iter());
    for k in 0..n {
        let mut col = vectors.column_mut(k);
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
        if let Some(lead) = col.iter().copied().find(|z| z.norm() > PHASE_TOL) {
            let phase = lead.conj() / lead.norm();
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// `f(H)` by functional calculus.
pub fn apply_fn<F: Fn(f64) -> f64>(h: &HermitianMatrix, f: F) -> Result<HermitianMatrix> {
    eig_hermitian(h)?.apply(f)
}

/// Orthogonal projector on `ℂ^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: HermitianMatrix,
}

impl Projector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: HermitianMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: HermitianMatrix::identity(dim),
        }
    }

    /// `QQ*` for a matrix `Q` with orthonormal columns (possibly none).
    pub fn from_orthonormal_columns(q: &CMatrix, dim: usize) -> Self {
        if q.ncols() == 0 {
            return Self::zeros(dim);
        }
        let m = q * q.adjoint();
        Self {
            matrix: HermitianMatrix::new(m).expect("QQ* is square and finite"),
        }
    }

    /// Wrap a matrix after checking `P² = P` and `P = P*` within `tol`.
    pub fn try_from_matrix(m: CMatrix, tol: f64) -> Result<Self> {
        if m.nrows() == m.ncols() && max_abs_diff(&m, &m.adjoint()) > tol {
            return Err(Error::InvalidInput("projector is not self-adjoint".into()));
        }
        let h = HermitianMatrix::new(m)?;
        let sq = h.as_matrix() * h.as_matrix();
        if max_abs_diff(&sq, h.as_matrix()) > tol {
            return Err(Error::InvalidInput("projector is not idempotent".into()));
        }
        Ok(Self { matrix: h })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.matrix.as_matrix()
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().round().max(0.0) as usize
    }

    pub fn complement(&self) -> Self {
        let m = CMatrix::identity(self.dim(), self.dim()) - self.as_matrix();
        Self {
            matrix: HermitianMatrix::new(m).expect("finite"),
        }
    }
}

/// Left support: the orthogonal projector onto the column space of `x`.
///
/// Singular values `≤ rank_tol·max(1, s_max)` count as zero; the zero matrix
/// maps to the zero projector.
pub fn support_projector(x: &CMatrix, rank_tol: f64) -> Result<Projector> {
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry".into()));
    }
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidInput(format!("rank_tol must be > 0, got {rank_tol}")));
    }
    let dim = x.nrows();
    if x.ncols() == 0 || x.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok(Projector::zeros(dim));
    }
    // singular pairs of X from the eigenpairs (±s, (u, ±v)/√2) of [[0, X], [X*, 0]]
    let (rows, cols) = x.shape();
    let mut dilation = CMatrix::zeros(rows + cols, rows + cols);
    dilation.view_mut((0, rows), (rows, cols)).copy_from(x);
    dilation.view_mut((rows, 0), (cols, rows)).copy_from(&x.adjoint());
    let eig = eig_hermitian(&HermitianMatrix::new(dilation)?)?;
    let s_max = eig.values.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = rank_tol * s_max.max(1.0);
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > cutoff).collect();
    let halves = eig.vectors.view((0, 0), (rows, rows + cols)).select_columns(keep.iter());
    Ok(Projector::from_orthonormal_columns(&(halves * C64::new(2f64.sqrt(), 0.0)), dim))
}

/// Jordan decomposition `H = H₊ − H₋` with `H₊H₋ = 0`.
pub fn jordan_parts(h: &HermitianMatrix) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let eig = eig_hermitian(h)?;
    let pos = eig.apply(|x| x.max(0.0))?;
    let neg = eig.apply(|x| (-x).max(0.0))?;
    Ok((pos, neg))
}

/// Smallest eigenvalue of `upper − lower`; non-negative iff `lower ≤ upper`.
pub fn loewner_gap(lower: &HermitianMatrix, upper: &HermitianMatrix) -> Result<f64> {
    let diff = upper.combine(1.0, lower, -1.0)?;
    Ok(eig_hermitian(&diff)?.values[0])
}
