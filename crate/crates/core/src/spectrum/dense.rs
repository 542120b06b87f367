use nalgebra::SymmetricEigen;

use super::{fix_phase, residual, SolverKind, Spectrum};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;

pub const DEFAULT_DENSE_CAP: usize = 4000;

/// Full spectrum via dense symmetric eigendecomposition.
pub fn solve_dense(h: &SparseHamiltonian, cap: usize) -> Result<Spectrum> {
    let dim = h.dim();
    if dim > cap {
        return Err(Error::DenseCapExceeded { dim, cap });
    }
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut eigenvectors = Vec::with_capacity(dim);
    let mut residuals = Vec::with_capacity(dim);
    for &i in &order {
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        fix_phase(&mut v);
        let e = eig.eigenvalues[i];
        residuals.push(residual(h, e, &v));
        eigenvalues.push(e);
        eigenvectors.push(v);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        residuals,
        solver: SolverKind::Dense,
        scale: h.norm_bound(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Basis;
    use crate::hamiltonian::{build, EnergyUnit, ModelParams};
    use crate::spectrum::dot;

    #[test]
    fn single_particle_two_level() {
        let (j0, j1) = (0.01, 0.03);
        let p = ModelParams::two_level(j0, j1, 0.0, 0.0);
        let s = solve_dense(&build(&p, &Basis::enumerate(1)).unwrap(), 100).unwrap();
        let expect = [-j0, j0, 1.0 - j1, 1.0 + j1];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn two_atom_one_level_analytic() {
        let j = 0.1;
        let p = ModelParams::one_level(j, 0.0);
        let s = solve_dense(&build(&p, &Basis::one_level(2)).unwrap(), 100).unwrap();
        let r = (1.0f64 + 4.0 * j * j).sqrt();
        let expect = [1.0 - r, 2.0, 1.0 + r];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_pcg::Pcg64::seed_from_u64(11);
        let n = 40;
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                entries.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        let h = SparseHamiltonian::from_upper(n, EnergyUnit::Recoil, entries);
        let s = solve_dense(&h, 100).unwrap();
        let dense = h.to_dense();
        let mut rebuilt = nalgebra::DMatrix::<f64>::zeros(n, n);
        for (e, v) in s.eigenvalues.iter().zip(&s.eigenvectors) {
            let col = nalgebra::DVector::from_column_slice(v);
            rebuilt += *e * &col * col.transpose();
        }
        assert!((rebuilt - dense).amax() < 1e-9);
        for a in 0..n {
            assert!((dot(&s.eigenvectors[a], &s.eigenvectors[a]) - 1.0).abs() < 1e-12);
            for b in 0..a {
                assert!(dot(&s.eigenvectors[a], &s.eigenvectors[b]).abs() < 1e-10);
            }
        }
        assert!(s.residuals.iter().all(|r| *r <= 1e-10 * s.scale));
    }

    #[test]
    fn cap_enforced() {
        let h = build(
            &ModelParams::two_level(0.1, 0.1, 0.01, 0.0),
            &Basis::enumerate(10),
        )
        .unwrap();
        assert!(matches!(
            solve_dense(&h, 100),
            Err(Error::DenseCapExceeded { dim: 286, cap: 100 })
        ));
    }
}
