//! Finite-dimensional quantum hypothesis testing built on the relative
//! modular operator `Δ_{ρ|σ}: X ↦ ϱXς⁻¹` on the Hilbert–Schmidt space.
//!
//! The crate constructs Ke Li's test as the left support of
//! `1_{(0,ε]}(Δ_{ρ|σ})Ω_σ`, evaluates its type-I/type-II errors against the
//! bound `⟨Ω_σ, 1_{(ε,∞)}(Δ_{ρ|σ})Ω_σ⟩`, compares it with the
//! Neyman–Pearson test and the Chernoff bound, and evaluates the bound for
//! i.i.d. tensor powers exactly by convolving the spectral distribution of
//! `log Δ`.
//!
//! Modules, bottom-up:
//!
//! - [`linalg`]: Hermitian eigendecomposition, functional calculus, supports.
//! - [`states`]: density matrices, random instances, tensor powers.
//! - [`pair_file`]: the JSON state-pair format.
//! - [`modular`]: the spectrum of `Δ_{ρ|σ}` and its spectral distributions.
//! - [`measure`]: finite atomic measures on the line.
//! - [`hypothesis`]: Ke Li and Neyman–Pearson tests, error pairs.
//! - [`bounds`]: scalar bounds, divergences, normal quantile.
//! - [`iid`]: convolution powers and the second-order Stein experiment.
//! - [`cli`]: the `qht` command-line driver.

#![forbid(unsafe_code)]

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b, tol): (f64, f64, f64) = ($a, $b, $tol);
        assert!((a - b).abs() <= tol, "{} vs {} (tol {})", a, b, tol);
    }};
}

pub mod bounds;
pub mod cli;
pub mod error;
pub mod hypothesis;
pub mod iid;
pub mod linalg;
pub mod measure;
pub mod modular;
pub mod pair_file;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
