//! Lowest eigenpairs of a large sparse symmetric matrix.
//!
//! Block Krylov subspace with full reorthogonalization and thick restart:
//! the subspace is grown block by block from a seeded random start, reduced
//! by Rayleigh-Ritz, and restarted from the lowest Ritz vectors plus the
//! continuation block (the new directions in `H` times the last block). Using a block (rather than a single vector) keeps
//! near-degenerate pairs from collapsing onto one Ritz value.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;

use super::{dot, fix_phase, norm, residual, SolverKind, Spectrum};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovOptions {
    /// Residual tolerance relative to the matrix norm bound.
    pub tol: f64,
    pub block: usize,
    /// Maximum subspace dimension; `None` picks `max(3k + 4b, k + 60)`.
    pub subspace: Option<usize>,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            block: 4,
            subspace: None,
            max_restarts: 500,
            seed: 0x00d0_0b1e_3e11,
        }
    }
}

/// Orthogonalizes `w` against `basis` twice; returns the remaining norm before normalization.
fn orthonormalize(basis: &[Vec<f64>], w: &mut [f64]) -> f64 {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            if c != 0.0 {
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
    }
    let nrm = norm(w);
    if nrm > 0.0 {
        w.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

fn combine(vectors: &[Vec<f64>], coeffs: impl Iterator<Item = f64>, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (v, c) in vectors.iter().zip(coeffs) {
        if c != 0.0 {
            out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
        }
    }
    out
}

/// Lowest `k` eigenpairs of `h`.
pub fn solve_lowest(h: &SparseHamiltonian, k: usize, opts: &KrylovOptions) -> Result<Spectrum> {
    let n = h.dim();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!(
            "requested {k} eigenpairs from a matrix of dimension {n}; need 0 < k < dim"
        )));
    }
    let b = opts.block.clamp(1, n);
    let m = opts
        .subspace
        .unwrap_or((3 * k + 4 * b).max(k + 60))
        .max(k + b)
        .min(n);
    let scale = h.norm_bound();
    let threshold = opts.tol * scale.max(f64::MIN_POSITIVE);

    let mut rng = Pcg64::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut block_start = 0;
    for _ in 0..b {
        let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if orthonormalize(&basis, &mut w) > 1e-10 {
            basis.push(w);
        }
    }

    let mut best = f64::INFINITY;
    for _restart in 0..opts.max_restarts {
        // Grow the subspace.
        let mut exhausted = false;
        loop {
            while images.len() < basis.len() {
                let v = &basis[images.len()];
                images.push(h.apply(v));
            }
            if basis.len() >= m {
                break;
            }
            let block_end = basis.len();
            let mut added = 0;
            let mut next = block_end;
            for idx in block_start..block_end {
                if basis.len() >= m {
                    next = idx;
                    break;
                }
                let mut w = images[idx].clone();
                let before = norm(&w);
                let after = orthonormalize(&basis, &mut w);
                if after > 1e-10 * before.max(threshold) {
                    basis.push(w);
                    added += 1;
                }
            }
            if added == 0 {
                exhausted = true;
                break;
            }
            block_start = next;
        }

        // Continuation block: the part of H * (last block) outside the subspace.
        let mut continuation = Vec::new();
        if !exhausted {
            for idx in block_start..basis.len() {
                let mut w = images[idx].clone();
                let before = norm(&w);
                if orthonormalize(&basis, &mut w) > 1e-10 * before.max(threshold)
                    && orthonormalize(&continuation, &mut w) > 1e-6
                {
                    continuation.push(w);
                }
            }
        }

        // Rayleigh-Ritz on the current subspace.
        let p = basis.len();
        let mut t = DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let x = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                t[(i, j)] = x;
                t[(j, i)] = x;
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));

        // keep extra Ritz vectors beyond k to retain spectral information across restarts
        let keep = ((k + m) / 2).min(m.saturating_sub(b).max(k)).min(p);
        let mut ritz = Vec::with_capacity(keep);
        let mut ritz_images = Vec::with_capacity(keep);
        let mut thetas = Vec::with_capacity(keep);
        let mut res = Vec::with_capacity(keep);
        for &col in order.iter().take(keep) {
            let s = eig.eigenvectors.column(col);
            let y = combine(&basis, s.iter().copied(), n);
            let hy = combine(&images, s.iter().copied(), n);
            let theta = eig.eigenvalues[col];
            let r: Vec<f64> = hy.iter().zip(&y).map(|(a, c)| a - theta * c).collect();
            thetas.push(theta);
            res.push(r);
            ritz.push(y);
            ritz_images.push(hy);
        }
        let worst = res.iter().take(k).map(|r| norm(r)).fold(0.0, f64::max);
        best = best.min(worst);

        if worst <= threshold || (exhausted && p >= k) {
            let mut eigenvalues = Vec::with_capacity(k);
            let mut eigenvectors = Vec::with_capacity(k);
            let mut residuals = Vec::with_capacity(k);
            for (theta, mut y) in thetas.into_iter().zip(ritz).take(k) {
                let nrm = norm(&y);
                y.iter_mut().for_each(|x| *x /= nrm);
                fix_phase(&mut y);
                residuals.push(residual(h, theta, &y));
                eigenvalues.push(theta);
                eigenvectors.push(y);
            }
            return Ok(Spectrum {
                eigenvalues,
                eigenvectors,
                residuals,
                solver: SolverKind::Krylov,
                scale,
            });
        }

        // Thick restart: Ritz vectors plus the continuation block.
        basis = ritz;
        images = ritz_images;
        block_start = basis.len();
        for mut w in continuation {
            if orthonormalize(&basis, &mut w) > 1e-6 {
                basis.push(w);
            }
        }
        if basis.len() == block_start {
            // no usable direction left; inject a random one
            let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            if orthonormalize(&basis, &mut w) > 1e-10 {
                basis.push(w);
            }
        }
    }
    Err(Error::NoConvergence {
        restarts: opts.max_restarts,
        residual: best,
    })
}
