//! Eigen-decomposition of the Hamiltonian and near-degenerate pair handling.

mod dense;
mod krylov;
mod pairs;

pub use dense::{solve_dense, DEFAULT_DENSE_CAP};
pub use krylov::{solve_lowest, KrylovOptions};
pub use pairs::{classify_pairs, PairClassification, Parity, StatePair, DEFAULT_GAP_TOL};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hamiltonian::SparseHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Dense,
    Krylov,
}

/// Ascending eigenvalues with orthonormal eigenvectors.
///
/// Each eigenvector is normalized and its largest-magnitude coefficient is
/// real positive (the first such index when several tie).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub solver: SolverKind,
    /// Norm bound of the matrix the spectrum came from.
    pub scale: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Spectrum CSV: `k,eigenvalue,residual`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,eigenvalue,residual")?;
        for (k, (e, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            writeln!(out, "{k},{},{}", crate::fmt_f64(*e), crate::fmt_f64(*r))?;
        }
        Ok(())
    }

    /// Amplitude CSV `k,n,amplitude_abs` over `k < k_max` and `n_range`.
    pub fn write_amplitudes<W: std::io::Write>(
        &self,
        mut out: W,
        k_max: usize,
        n_range: std::ops::Range<usize>,
    ) -> std::io::Result<()> {
        writeln!(out, "k,n,amplitude_abs")?;
        for (k, v) in self.eigenvectors.iter().enumerate().take(k_max) {
            for n in n_range.clone() {
                if let Some(c) = v.get(n) {
                    writeln!(out, "{k},{n},{}", crate::fmt_f64(c.abs()))?;
                }
            }
        }
        Ok(())
    }
}

/// Applies the phase convention in place.
pub(crate) fn fix_phase(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-10))
        .unwrap_or(0);
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn residual(h: &SparseHamiltonian, value: f64, vector: &[f64]) -> f64 {
    let hv = h.apply(vector);
    hv.iter()
        .zip(vector)
        .map(|(a, b)| (a - value * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Dense when the dimension allows it, otherwise the lowest `k` by Krylov iteration.
pub fn solve_auto(
    h: &SparseHamiltonian,
    k: usize,
    dense_cap: usize,
    opts: &KrylovOptions,
) -> Result<Spectrum> {
    if h.dim() <= dense_cap {
        let mut s = solve_dense(h, dense_cap)?;
        s.eigenvalues.truncate(k);
        s.eigenvectors.truncate(k);
        s.residuals.truncate(k);
        Ok(s)
    } else {
        solve_lowest(h, k, opts)
    }
}
