//! Finite nonnegative atomic measures on the real line with a pruning defect.
//!
//! `defect` is an upper bound on mass that was dropped somewhere upstream, so
//! `Σ mass + defect = total` where `total` is fixed at creation.

use crate::error::{Error, Result};

/// Default absolute tolerance for merging coincident positions.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    defect: f64,
    total: f64,
    merge_tol: f64,
}

impl AtomicMeasure {
    /// Sort, merge within `merge_tol` and drop zero-mass atoms.
    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I, merge_tol: f64) -> Result<Self> {
        let mut atoms: Vec<Atom> = atoms.into_iter().collect();
        for a in &atoms {
            if !a.position.is_finite() || !a.mass.is_finite() || a.mass < 0.0 {
                return Err(Error::InvalidInput(format!("bad atom {a:?}")));
            }
        }
        if !(merge_tol >= 0.0) {
            return Err(Error::InvalidInput(format!("merge_tol {merge_tol}")));
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        let atoms = merge_sorted(atoms, merge_tol);
        let total = atoms.iter().map(|a| a.mass).sum();
        Ok(Self {
            atoms,
            defect: 0.0,
            total,
            merge_tol,
        })
    }

    /// Unit point mass at `x`.
    pub fn dirac(x: f64) -> Self {
        Self {
            atoms: vec![Atom {
                position: x,
                mass: 1.0,
            }],
            defect: 0.0,
            total: 1.0,
            merge_tol: MERGE_TOL,
        }
    }

    /// Assemble from atoms already sorted and merged.
    pub(crate) fn from_parts(atoms: Vec<Atom>, defect: f64, total: f64, merge_tol: f64) -> Self {
        debug_assert!(atoms.windows(2).all(|w| w[0].position < w[1].position));
        Self {
            atoms,
            defect,
            total,
            merge_tol,
        }
    }

    /// Move every atom lighter than `threshold` into the defect.
    pub fn prune(mut self, threshold: f64) -> Self {
        let mut dropped = 0.0;
        self.atoms.retain(|a| {
            if a.mass < threshold {
                dropped += a.mass;
                false
            } else {
                true
            }
        });
        self.defect += dropped;
        self
    }

    /// Reflect through the origin: `x ↦ −x`.
    pub fn reflect(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .rev()
            .map(|a| Atom {
                position: -a.position,
                mass: a.mass,
            })
            .collect();
        Self { atoms, ..*self }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    /// Mass carried by the atoms (excludes the defect).
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass * a.position).sum::<f64>() / self.mass()
    }

    pub fn variance(&self) -> f64 {
        self.central_abs_moment(2.0)
    }

    /// `∫ |x − mean|^k` over the normalized atomic part.
    pub fn central_abs_moment(&self, k: f64) -> f64 {
        let mean = self.mean();
        self.atoms
            .iter()
            .map(|a| a.mass * (a.position - mean).abs().powf(k))
            .sum::<f64>()
            / self.mass()
    }
}

/// Cluster consecutive atoms whose distance to the cluster head is within
/// `tol`; each cluster becomes one atom at its mass-weighted position.
pub(crate) fn merge_sorted(sorted: Vec<Atom>, tol: f64) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::with_capacity(sorted.len());
    let mut head = f64::NEG_INFINITY;
    let mut moment = 0.0;
    for a in sorted {
        if a.mass == 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if a.position - head <= tol => {
                moment += a.mass * a.position;
                last.mass += a.mass;
                last.position = moment / last.mass;
            }
            _ => {
                head = a.position;
                moment = a.mass * a.position;
                out.push(a);
            }
        }
    }
    out
}
