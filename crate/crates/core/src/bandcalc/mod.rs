//! Single-particle band calculation for the superlattice double well.
//!
//! Lengths are measured in `1/k` (`xi = k x`, `k = 2 pi / lambda`) and energies in
//! the recoil energy `E_r = hbar^2 k^2 / 2m`, so the single-particle Hamiltonian is
//! `-d^2/dxi^2 + V(xi)` on `xi in [-pi/4, 3pi/4]` with hard walls.

mod tridiag;

pub use tridiag::lowest_eigenpairs;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{EnergyUnit, ModelParams};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const AMU: f64 = 1.660_539_066_60e-27;
pub const RB87_MASS_AMU: f64 = 86.909_180_527;
/// Rb-87 triplet s-wave scattering length.
pub const RB87_SCATTERING_LENGTH_NM: f64 = 5.31;
pub const SCATTERING_LENGTH_NOTE: &str =
    "a_s = 5.31 nm is the literature value for Rb-87; it is an external constant, not derived here";

pub const DEFAULT_GRID_POINTS: usize = 4096;
pub const MIN_GRID_POINTS: usize = 512;
/// Relative change of the lowest energies allowed when the grid is doubled.
pub const GRID_TOL: f64 = 1e-6;
/// Minimum probability mass of a localized orbital on its own side of the barrier.
pub const LOCALIZATION_FLOOR: f64 = 0.9;

pub const DOMAIN: (f64, f64) = (-FRAC_PI_4, 3.0 * FRAC_PI_4);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    /// Short-lattice depth in `E_r`.
    pub v1: f64,
    /// Long-lattice depth in `E_r`.
    pub v2: f64,
    pub theta: f64,
    pub wavelength_nm: f64,
    pub mass_amu: f64,
    /// Radial trap frequency in Hz (cyclic).
    pub radial_trap_hz: f64,
    pub scattering_length_nm: f64,
    /// Reflect the potential about the barrier, `xi -> pi/2 - xi`.
    #[serde(default)]
    pub mirrored: bool,
}

impl PotentialSpec {
    /// Rb-87 in an 810 nm superlattice with `v1 = 106 E_r`, `v2 = 0.15 v1`.
    pub fn rb87_lattice() -> Self {
        Self {
            v1: 106.0,
            v2: 0.15 * 106.0,
            theta: 0.0,
            wavelength_nm: 810.0,
            mass_amu: RB87_MASS_AMU,
            radial_trap_hz: 3200.0,
            scattering_length_nm: RB87_SCATTERING_LENGTH_NM,
            mirrored: false,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn mirror(mut self) -> Self {
        self.mirrored = !self.mirrored;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.v1,
            self.v2,
            self.theta,
            self.wavelength_nm,
            self.mass_amu,
            self.radial_trap_hz,
            self.scattering_length_nm,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("potential parameters must be finite".into()));
        }
        if !(self.v1 > 0.0) || self.v2 < 0.0 {
            return Err(Error::Config(format!(
                "lattice depths must satisfy v1 > 0, v2 >= 0 (got v1 = {}, v2 = {})",
                self.v1, self.v2
            )));
        }
        if !(self.v2 / self.v1 < 2.0) {
            return Err(Error::Config(format!(
                "v2/v1 = {} must be < 2",
                self.v2 / self.v1
            )));
        }
        if !(0.0..=FRAC_PI_4).contains(&self.theta) {
            return Err(Error::Config(format!(
                "theta = {} outside [0, pi/4]",
                self.theta
            )));
        }
        if !(self.wavelength_nm > 0.0 && self.mass_amu > 0.0 && self.radial_trap_hz > 0.0) {
            return Err(Error::Config(
                "wavelength, mass and radial trap frequency must be positive".into(),
            ));
        }
        if !(self.scattering_length_nm > 0.0) {
            return Err(Error::Config("scattering length must be positive".into()));
        }
        Ok(())
    }

    /// `V(xi)` in `E_r`.
    pub fn potential(&self, xi: f64) -> f64 {
        let x = if self.mirrored { FRAC_PI_2 - xi } else { xi };
        let c2 = (2.0 * x).cos();
        let c1 = (x - FRAC_PI_4 - self.theta).cos();
        -self.v1 * c2 * c2 - self.v2 * c1.powi(4)
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / (self.wavelength_nm * 1e-9)
    }

    /// `E_r / hbar` in 1/s.
    pub fn recoil_angular_frequency(&self) -> f64 {
        let k = self.wavenumber();
        HBAR * k * k / (2.0 * self.mass_amu * AMU)
    }

    /// `hbar omega_perp a_s k / E_r`: multiplies a dimensionless `int u^4 dxi` to give
    /// an interaction energy `(g_1D / 2) int |u|^4 dx` in `E_r`.
    pub fn interaction_prefactor(&self) -> f64 {
        let omega_perp = 2.0 * PI * self.radial_trap_hz;
        omega_perp / self.recoil_angular_frequency()
            * self.scattering_length_nm
            * 1e-9
            * self.wavenumber()
    }
}

/// Lowest eigenpairs on a uniform grid, wavefunctions normalized to `sum psi^2 h = 1`.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub x: Vec<f64>,
    pub h: f64,
    pub potential: Vec<f64>,
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Finite-difference eigenpairs of `-d^2/dxi^2 + V` on `(a, b)` with hard walls and
/// `n` interior points.
pub fn fd_eigenpairs<F: Fn(f64) -> f64>(
    v: F,
    a: f64,
    b: f64,
    n: usize,
    count: usize,
) -> Eigenpairs {
    let h = (b - a) / (n + 1) as f64;
    let x: Vec<f64> = (1..=n).map(|i| a + i as f64 * h).collect();
    let potential: Vec<f64> = x.iter().map(|&xi| v(xi)).collect();
    let kin = 1.0 / (h * h);
    let diag: Vec<f64> = potential.iter().map(|p| p + 2.0 * kin).collect();
    let off = vec![-kin; n - 1];
    let (energies, mut states) = lowest_eigenpairs(&diag, &off, count);
    let s = 1.0 / h.sqrt();
    for v in &mut states {
        v.iter_mut().for_each(|c| *c *= s);
    }
    Eigenpairs {
        x,
        h,
        potential,
        energies,
        states,
    }
}

/// Lowest four eigenpairs of the lattice potential, checked against a doubled grid.
pub fn solve_single_particle(spec: &PotentialSpec, grid_points: usize) -> Result<Eigenpairs> {
    spec.validate()?;
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::Config(format!(
            "grid_points = {grid_points} below minimum {MIN_GRID_POINTS}"
        )));
    }
    let (a, b) = DOMAIN;
    let coarse = fd_eigenpairs(|x| spec.potential(x), a, b, grid_points, 4);
    let fine = fd_eigenpairs(|x| spec.potential(x), a, b, 2 * grid_points, 4);
    for (i, (c, f)) in coarse.energies.iter().zip(&fine.energies).enumerate() {
        let rel = (c - f).abs() / f.abs().max(1.0);
        if rel > GRID_TOL {
            return Err(Error::Band(format!(
                "energy {i} not converged: {c} at {grid_points} points vs {f} at {} points",
                2 * grid_points
            )));
        }
    }
    Ok(coarse)
}

/// Left/right-localized orbitals for the two lowest level pairs.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitalSet {
    #[serde(skip)]
    pub x: Vec<f64>,
    #[serde(skip)]
    pub potential: Vec<f64>,
    pub h: f64,
    /// Barrier maximum between the wells.
    pub barrier: f64,
    #[serde(skip)]
    pub barrier_index: usize,
    /// `orbitals[level][well]`, well 0 = left.
    #[serde(skip)]
    pub orbitals: [[Vec<f64>; 2]; 2],
    /// Eigenvalues the orbitals were built from.
    pub eigen_energies: [f64; 4],
    /// `<u_j|h|u_j'>` within each level.
    pub level_hamiltonian: [[[f64; 2]; 2]; 2],
    /// Probability mass left of the barrier, `[level][well]`.
    pub left_mass: [[f64; 2]; 2],
    pub provenance: Vec<String>,
}

impl OrbitalSet {
    pub fn orbital(&self, level: usize, left: bool) -> &[f64] {
        &self.orbitals[level][if left { 0 } else { 1 }]
    }

    /// Orbital energy `<u|h|u>`.
    pub fn onsite(&self, level: usize, left: bool) -> f64 {
        let j = if left { 0 } else { 1 };
        self.level_hamiltonian[level][j][j]
    }

    /// `-<u_L|h|u_R>`, non-negative by the orbital sign choice.
    pub fn hopping(&self, level: usize) -> f64 {
        -self.level_hamiltonian[level][0][1]
    }

    pub fn overlap(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        integrate(self.h, &self.orbitals[a.0][a.1], &self.orbitals[b.0][b.1])
    }

    /// Dump CSV: `x,V,uL0,uR0,uL1,uR1`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        use crate::fmt_f64;
        writeln!(out, "x,V,uL0,uR0,uL1,uR1")?;
        for i in 0..self.x.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(self.x[i]),
                fmt_f64(self.potential[i]),
                fmt_f64(self.orbitals[0][0][i]),
                fmt_f64(self.orbitals[0][1][i]),
                fmt_f64(self.orbitals[1][0][i]),
                fmt_f64(self.orbitals[1][1][i])
            )?;
        }
        Ok(())
    }
}

fn integrate(h: f64, a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * h
}

/// Weight of grid point `i` in the left-of-barrier projector; the barrier sits at
/// fractional index `t`, so the projector is mirror-consistent on a symmetric grid.
fn left_weight(i: usize, t: f64) -> f64 {
    (t + 0.5 - i as f64).clamp(0.0, 1.0)
}

fn left_overlap(h: f64, a: &[f64], b: &[f64], t: f64) -> f64 {
    let end = ((t + 1.5).ceil() as usize).min(a.len());
    (0..end)
        .map(|i| left_weight(i, t) * a[i] * b[i])
        .sum::<f64>()
        * h
}

fn left_mass(h: f64, psi: &[f64], t: f64) -> f64 {
    left_overlap(h, psi, psi, t)
}

/// Fractional index of the barrier maximum from a parabola through the top point.
fn barrier_position(v: &[f64], top: usize) -> f64 {
    if top == 0 || top + 1 >= v.len() {
        return top as f64;
    }
    let (a, b, c) = (v[top - 1], v[top], v[top + 1]);
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return top as f64;
    }
    top as f64 + (0.5 * (a - c) / den).clamp(-0.5, 0.5)
}

/// Index of the potential maximum between the two deepest local minima.
fn barrier_index(v: &[f64]) -> Result<usize> {
    let mut minima: Vec<usize> = (1..v.len() - 1)
        .filter(|&i| v[i] < v[i - 1] && v[i] <= v[i + 1])
        .collect();
    if minima.len() < 2 {
        return Err(Error::Band("potential has fewer than two wells".into()));
    }
    minima.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let (lo, hi) = (minima[0].min(minima[1]), minima[0].max(minima[1]));
    let top = (lo..=hi).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    Ok(top)
}

/// Rotates each eigenpair `(psi_2l, psi_2l+1)` into the left/right-localized pair
/// that diagonalizes the left-of-barrier projector. In a symmetric potential this is
/// exactly `(psi_2l +- psi_2l+1)/sqrt 2`.
pub fn localize(eig: &Eigenpairs) -> Result<OrbitalSet> {
    if eig.states.len() < 4 {
        return Err(Error::Band(format!(
            "need 4 eigenpairs, got {}",
            eig.states.len()
        )));
    }
    let h = eig.h;
    let bi = barrier_index(&eig.potential)?;
    let t = barrier_position(&eig.potential, bi);
    let masses: Vec<f64> = eig.states.iter().map(|s| left_mass(h, s, t)).collect();

    let mut orbitals: [[Vec<f64>; 2]; 2] = Default::default();
    let mut level_hamiltonian = [[[0.0; 2]; 2]; 2];
    let mut lm = [[0.0; 2]; 2];
    let mut provenance = Vec::new();
    for level in 0..2 {
        let (ia, ib) = (2 * level, 2 * level + 1);
        let (a, b) = (&eig.states[ia], &eig.states[ib]);
        let paa = masses[ia];
        let pbb = masses[ib];
        let pab = left_overlap(h, a, b, t);
        // eigenvector of [[paa, pab], [pab, pbb]] with the larger eigenvalue
        let phi = 0.5 * (2.0 * pab).atan2(paa - pbb);
        let (c, s) = (phi.cos(), phi.sin());
        let mut ul: Vec<f64> = a.iter().zip(b).map(|(x, y)| c * x + s * y).collect();
        let mut ur: Vec<f64> = a.iter().zip(b).map(|(x, y)| -s * x + c * y).collect();

        let peak = |u: &[f64]| {
            u.iter()
                .copied()
                .max_by(|p, q| p.abs().total_cmp(&q.abs()))
                .unwrap()
        };
        if peak(&ul) < 0.0 {
            ul.iter_mut().for_each(|v| *v = -*v);
        }
        let (ea, eb) = (eig.energies[ia], eig.energies[ib]);
        // h restricted to the pair is diag(ea, eb); rotate into the (L, R) basis
        let cl = integrate(h, &ul, a);
        let sl = integrate(h, &ul, b);
        let mut cr = integrate(h, &ur, a);
        let mut sr = integrate(h, &ur, b);
        let mut hlr = cl * cr * ea + sl * sr * eb;
        if hlr > 0.0 {
            ur.iter_mut().for_each(|v| *v = -*v);
            cr = -cr;
            sr = -sr;
            hlr = -hlr;
        }
        let hll = cl * cl * ea + sl * sl * eb;
        let hrr = cr * cr * ea + sr * sr * eb;
        level_hamiltonian[level] = [[hll, hlr], [hlr, hrr]];

        let ml = left_mass(h, &ul, t);
        let mr = left_mass(h, &ur, t);
        if ml < LOCALIZATION_FLOOR || 1.0 - mr < LOCALIZATION_FLOOR {
            let candidates: Vec<String> = (0..4)
                .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                .map(|(i, j)| format!("({i},{j})"))
                .collect();
            return Err(Error::Band(format!(
                "ambiguous pairing for level {level}: localized left masses {ml:.4}/{mr:.4}; \
                 eigenfunction left masses {:?}; candidate pairings {}",
                masses,
                candidates.join(" ")
            )));
        }
        lm[level] = [ml, mr];
        provenance.push(format!(
            "level {level}: eigenfunctions ({ia},{ib}) rotated by {phi:.6} rad"
        ));
        orbitals[level] = [ul, ur];
    }
    Ok(OrbitalSet {
        x: eig.x.clone(),
        potential: eig.potential.clone(),
        h,
        barrier: eig.x[0] + t * h,
        barrier_index: bi,
        orbitals,
        eigen_energies: [
            eig.energies[0],
            eig.energies[1],
            eig.energies[2],
            eig.energies[3],
        ],
        level_hamiltonian,
        left_mass: lm,
        provenance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub u1_over_u0: f64,
    pub u01_over_u0: f64,
    pub j0_over_j1: f64,
    pub j1_over_hw: f64,
    pub j0_over_u0: f64,
    pub hw_over_er: f64,
    /// Left and right values before averaging: `[U0, U1, U01]`.
    pub u_left: [f64; 3],
    pub u_right: [f64; 3],
    pub interaction_prefactor: f64,
    pub recoil_hz: f64,
}

/// Model parameters in units of `E_r` plus diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedParams {
    pub params: ModelParams,
    pub diagnostics: Diagnostics,
    pub potential: PotentialSpec,
    pub orbitals: OrbitalSet,
    pub scattering_length_note: &'static str,
}

impl DerivedParams {
    /// `N U0 / (2 hbar omega)`.
    pub fn interaction_to_spacing(&self, n: u32) -> f64 {
        n as f64 * self.params.u0 / (2.0 * self.params.hw.unwrap_or(f64::NAN))
    }
}

/// Overlap integrals of the localized orbitals. Interaction energies are averaged
/// over the two wells.
pub fn derive_params(orbitals: &OrbitalSet, spec: &PotentialSpec) -> Result<DerivedParams> {
    spec.validate()?;
    let h = orbitals.h;
    let pref = spec.interaction_prefactor();
    let quartic =
        |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * x * y * y).sum::<f64>() * h * pref;
    let per_well = |w: usize| {
        let u0 = &orbitals.orbitals[0][w];
        let u1 = &orbitals.orbitals[1][w];
        [quartic(u0, u0), quartic(u1, u1), quartic(u0, u1)]
    };
    let ul = per_well(0);
    let ur = per_well(1);
    let avg = |i: usize| 0.5 * (ul[i] + ur[i]);
    let e = &orbitals.eigen_energies;
    let hw = 0.5 * (e[2] + e[3]) - 0.5 * (e[0] + e[1]);
    let j0 = orbitals.hopping(0);
    let j1 = orbitals.hopping(1);
    let dv = orbitals.onsite(0, true) - orbitals.onsite(0, false);
    let params = ModelParams {
        j0,
        j1,
        u0: avg(0),
        u1: avg(1),
        u01: avg(2),
        dv,
        hw: Some(hw),
        unit: EnergyUnit::Recoil,
    };
    if ![j0, j1, params.u0, params.u1, params.u01, dv, hw]
        .iter()
        .all(|x| x.is_finite())
    {
        return Err(Error::Band("derived parameters are not finite".into()));
    }
    let diagnostics = Diagnostics {
        u1_over_u0: params.u1 / params.u0,
        u01_over_u0: params.u01 / params.u0,
        j0_over_j1: j0 / j1,
        j1_over_hw: j1 / hw,
        j0_over_u0: j0 / params.u0,
        hw_over_er: hw,
        u_left: ul,
        u_right: ur,
        interaction_prefactor: pref,
        recoil_hz: spec.recoil_angular_frequency() / (2.0 * PI),
    };
    Ok(DerivedParams {
        params,
        diagnostics,
        potential: *spec,
        orbitals: orbitals.clone(),
        scattering_length_note: SCATTERING_LENGTH_NOTE,
    })
}

/// Solve, localize and derive in one step.
pub fn derive_from_spec(spec: &PotentialSpec, grid_points: usize) -> Result<DerivedParams> {
    let eig = solve_single_particle(spec, grid_points)?;
    let orb = localize(&eig)?;
    derive_params(&orb, spec)
}

/// Tilt `dV` in `E_r` produced by the phase `theta`.
pub fn tilt_of_theta(spec: &PotentialSpec, theta: f64, grid_points: usize) -> Result<f64> {
    Ok(derive_from_spec(&spec.with_theta(theta), grid_points)?
        .params
        .dv)
}
