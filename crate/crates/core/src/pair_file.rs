//! JSON state-pair files.
//!
//! ```json
//! {"dim": 2,
//!  "rho":   [[[0.7, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.3, 0.0]]],
//!  "sigma": [[[0.4, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.6, 0.0]]]}
//! ```
//!
//! Each matrix is a `dim × dim` array of `[re, im]` pairs, row-major. Parsing
//! rejects the first violated invariant by name.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, CMatrix, HermitianMatrix, C64};
use crate::states::{density_from_matrix, DensityMatrix, StatePair, FAITHFUL_FLOOR};

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PairDocument {
    dim: usize,
    rho: Vec<Vec<[f64; 2]>>,
    sigma: Vec<Vec<[f64; 2]>>,
}

pub fn parse_state_pair(text: &str) -> Result<StatePair> {
    let doc: PairDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed JSON: {e}")))?;
    if doc.dim == 0 {
        return Err(Error::Parse("invariant `dim ≥ 1` violated".into()));
    }
    let rho = parse_density("rho", doc.dim, &doc.rho)?;
    let sigma = parse_density("sigma", doc.dim, &doc.sigma)?;
    StatePair::new(rho, sigma)
}

pub fn read_state_pair(path: &Path) -> Result<StatePair> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_state_pair(&text)
}

fn violation(name: &str, invariant: &str, detail: String) -> Error {
    Error::Parse(format!("{name}: invariant `{invariant}` violated ({detail})"))
}

fn parse_density(name: &str, dim: usize, rows: &[Vec<[f64; 2]>]) -> Result<DensityMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(violation(name, "shape", format!("expected {dim}x{dim}")));
    }
    if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(violation(name, "finite entries", "NaN or infinity".into()));
    }
    let m = CMatrix::from_fn(dim, dim, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
    let asym = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - m[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    if asym > HERMITIAN_TOL {
        return Err(violation(name, "hermitian", format!("max asymmetry {asym:e}")));
    }
    let h = HermitianMatrix::new(m)?;
    let tr = h.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(violation(name, "unit trace", format!("trace {tr}")));
    }
    let min = eig_hermitian(&h)?.values[0];
    if min < FAITHFUL_FLOOR {
        return Err(violation(
            name,
            "positive definite",
            format!("min eigenvalue {min:e} below {FAITHFUL_FLOOR:e}"),
        ));
    }
    Ok(density_from_matrix(&h, FAITHFUL_FLOOR)?.0)
}

fn rows_of(d: &DensityMatrix) -> Vec<Vec<[f64; 2]>> {
    let m = d.matrix().as_matrix();
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn state_pair_to_json(pair: &StatePair) -> String {
    let doc = PairDocument {
        dim: pair.dim(),
        rho: rows_of(&pair.rho),
        sigma: rows_of(&pair.sigma),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}
