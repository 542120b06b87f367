use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Basis, FockState};
use crate::spectrum::Parity;

pub const DEFAULT_FIDELITY_FLOOR: f64 = 0.75;

/// Best cat-state match for one eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatReport {
    pub k: usize,
    pub nu: u32,
    pub p: u32,
    pub sign: Parity,
    pub fidelity: f64,
    pub excited_occ: f64,
    /// `fidelity >= floor`; otherwise the state is localized or otherwise non-cat.
    pub is_cat: bool,
}

/// Ground-level Fock indices of the two branches `|nu, N-nu>` and `|N-nu-p, nu+p>`.
fn branch_indices(basis: &Basis, nu: u32, p: u32) -> Result<(usize, usize)> {
    let n = basis.n();
    if nu + p > n || 2 * nu + p > n {
        return Err(Error::Domain(format!(
            "no cat state with nu = {nu}, p = {p} for N = {n}"
        )));
    }
    let a = basis.index_of(&FockState::new(nu, n - nu, 0, 0))?;
    let b = basis.index_of(&FockState::new(n - nu - p, nu + p, 0, 0))?;
    Ok((a, b))
}

/// Squared overlap of `vec` with `(|nu, N-nu> +- |N-nu-p, nu+p>)/sqrt(2)` in the
/// ground level. When both branches coincide (`2 nu + p = N`) the ideal state is
/// that single Fock state.
pub fn cat_fidelity(vec: &[f64], basis: &Basis, nu: u32, p: u32, sign: Parity) -> Result<f64> {
    let (a, b) = branch_indices(basis, nu, p)?;
    let f = if a == b {
        vec[a] * vec[a]
    } else {
        let s = vec[a] + sign.sign() * vec[b];
        0.5 * s * s
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `sum_n |c_n|^2 M(n)`.
pub fn excited_occupation(vec: &[f64], basis: &Basis) -> f64 {
    vec.iter()
        .zip(basis.states())
        .map(|(c, s)| c * c * s.excited() as f64)
        .sum()
}

/// Maximizes the cat fidelity over `nu`, `p` and sign with `2 nu + p < N`, plus
/// the balanced singleton `|N/2, N/2>` (reported as `nu = N/2, p = 0, +`) for even `N`.
pub fn best_cat(vec: &[f64], basis: &Basis, k: usize, floor: f64) -> CatReport {
    let n = basis.n();
    let mut best = CatReport {
        k,
        nu: 0,
        p: 0,
        sign: Parity::Symmetric,
        fidelity: 0.0,
        excited_occ: excited_occupation(vec, basis),
        is_cat: false,
    };
    let ground: Vec<f64> = (0..=n)
        .map(|nl| vec[basis.index_of(&FockState::new(nl, n - nl, 0, 0)).unwrap()])
        .collect();
    for p in 0..n {
        for nu in 0..n {
            if 2 * nu + p >= n {
                break;
            }
            let ca = ground[nu as usize];
            let cb = ground[(n - nu - p) as usize];
            for sign in [Parity::Symmetric, Parity::Antisymmetric] {
                let s = ca + sign.sign() * cb;
                let f = (0.5 * s * s).clamp(0.0, 1.0);
                if f > best.fidelity {
                    best.nu = nu;
                    best.p = p;
                    best.sign = sign;
                    best.fidelity = f;
                }
            }
        }
    }
    if n.is_multiple_of(2) {
        let c = ground[(n / 2) as usize];
        if c * c > best.fidelity {
            best.nu = n / 2;
            best.p = 0;
            best.sign = Parity::Symmetric;
            best.fidelity = (c * c).min(1.0);
        }
    }
    best.is_cat = best.fidelity >= floor;
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal(basis: &Basis, nu: u32, p: u32, sign: f64) -> Vec<f64> {
        let (a, b) = branch_indices(basis, nu, p).unwrap();
        let mut v = vec![0.0; basis.dim()];
        let r = std::f64::consts::FRAC_1_SQRT_2;
        v[a] += r;
        v[b] += sign * r;
        v
    }

    #[test]
    fn ideal_cat_has_unit_fidelity() {
        let b = Basis::enumerate(10);
        let v = ideal(&b, 2, 3, 1.0);
        assert!((cat_fidelity(&v, &b, 2, 3, Parity::Symmetric).unwrap() - 1.0).abs() < 1e-15);
        assert!(cat_fidelity(&v, &b, 2, 3, Parity::Antisymmetric).unwrap() < 1e-15);
        let r = best_cat(&v, &b, 0, DEFAULT_FIDELITY_FLOOR);
        assert_eq!((r.nu, r.p, r.sign), (2, 3, Parity::Symmetric));
        assert!((r.fidelity - 1.0).abs() < 1e-15 && r.is_cat);
    }

    #[test]
    fn localized_state_is_half() {
        let b = Basis::one_level(8);
        let mut v = vec![0.0; b.dim()];
        v[b.index_of(&FockState::new(1, 7, 0, 0)).unwrap()] = 1.0;
        for sign in [Parity::Symmetric, Parity::Antisymmetric] {
            assert!((cat_fidelity(&v, &b, 1, 0, sign).unwrap() - 0.5).abs() < 1e-15);
        }
        assert!(!best_cat(&v, &b, 0, DEFAULT_FIDELITY_FLOOR).is_cat);
    }

    #[test]
    fn balanced_singleton_reported() {
        let b = Basis::one_level(6);
        let mut v = vec![0.0; b.dim()];
        v[b.index_of(&FockState::new(3, 3, 0, 0)).unwrap()] = 1.0;
        let r = best_cat(&v, &b, 0, DEFAULT_FIDELITY_FLOOR);
        assert_eq!((r.nu, r.p), (3, 0));
        assert_eq!(r.fidelity, 1.0);
        // odd N has no singleton
        let b = Basis::one_level(5);
        let mut v = vec![0.0; b.dim()];
        v[b.index_of(&FockState::new(2, 3, 0, 0)).unwrap()] = 1.0;
        assert!((best_cat(&v, &b, 0, DEFAULT_FIDELITY_FLOOR).fidelity - 0.5).abs() < 1e-15);
    }

    #[test]
    fn excited_occupation_examples() {
        let b = Basis::enumerate(4);
        let mut v = vec![0.0; b.dim()];
        v[0] = 0.6;
        v[3] = 0.8;
        assert_eq!(excited_occupation(&v, &b), 0.0);
        let mut w = vec![0.0; b.dim()];
        w[b.index_of(&FockState::new(1, 1, 1, 1)).unwrap()] = 1.0;
        assert_eq!(excited_occupation(&w, &b), 2.0);
    }

    #[test]
    fn invalid_labels_rejected() {
        let b = Basis::one_level(4);
        let v = vec![0.0; 5];
        assert!(cat_fidelity(&v, &b, 3, 0, Parity::Symmetric).is_err());
        assert!(cat_fidelity(&v, &b, 0, 5, Parity::Symmetric).is_err());
    }
}
