//! Two-level tilted double-well Hamiltonian as a sparse real symmetric matrix.
//!
//! Per level `l` the one-level part is
//! `-J^l sum_{j!=j'} b_j^+ b_j' + U^l sum_j n_j(n_j-1) + (dV/2)(n_L - n_R) + E^l (n_L + n_R)`
//! with `E^0 = 0`, `E^1 = hw`. The levels couple through
//! `U01 sum_{j, l!=l'} (2 n_j^l n_j^l' + b_j^l+ b_j^l+ b_j^l' b_j^l')`; the sum
//! runs over ordered level pairs, so the density cross term carries `4 U01`
//! and the pair hop appears once per direction per well.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Basis, FockState, Level, Levels, Well};

/// Interaction ratios for harmonic-like wells.
pub const U1_OVER_U0: f64 = 0.75;
pub const U01_OVER_U0: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyUnit {
    /// Level spacing; `hw` must equal 1.
    HbarOmega,
    /// Ground-level interaction; `U0` must equal 1.
    InteractionU0,
    /// Lattice recoil energy.
    Recoil,
}

impl EnergyUnit {
    pub fn symbol(&self) -> &'static str {
        match self {
            EnergyUnit::HbarOmega => "hw",
            EnergyUnit::InteractionU0 => "U0",
            EnergyUnit::Recoil => "E_r",
        }
    }
}

/// Hamiltonian energies in a single declared unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "J0")]
    pub j0: f64,
    #[serde(rename = "J1", default)]
    pub j1: f64,
    #[serde(rename = "U0")]
    pub u0: f64,
    #[serde(rename = "U1", default)]
    pub u1: f64,
    #[serde(rename = "U01", default)]
    pub u01: f64,
    #[serde(rename = "dV", default)]
    pub dv: f64,
    /// Level spacing; absent in one-level mode.
    #[serde(default)]
    pub hw: Option<f64>,
    pub unit: EnergyUnit,
}

impl ModelParams {
    /// One-level model in units of `U0`.
    pub fn one_level(j0_over_u0: f64, dv_over_u0: f64) -> Self {
        Self {
            j0: j0_over_u0,
            j1: 0.0,
            u0: 1.0,
            u1: 0.0,
            u01: 0.0,
            dv: dv_over_u0,
            hw: None,
            unit: EnergyUnit::InteractionU0,
        }
    }

    /// Two-level model in units of `hw`, with `U1 = 3/4 U0` and `U01 = 1/2 U0`.
    pub fn two_level(j0: f64, j1: f64, u0: f64, dv: f64) -> Self {
        Self {
            j0,
            j1,
            u0,
            u1: U1_OVER_U0 * u0,
            u01: U01_OVER_U0 * u0,
            dv,
            hw: Some(1.0),
            unit: EnergyUnit::HbarOmega,
        }
    }

    pub fn with_tilt(mut self, dv: f64) -> Self {
        self.dv = dv;
        self
    }

    /// Sets `U0` and rescales `U1`, `U01` with the given ratios.
    pub fn with_interaction(mut self, u0: f64, u1_ratio: f64, u01_ratio: f64) -> Self {
        self.u0 = u0;
        self.u1 = u1_ratio * u0;
        self.u01 = u01_ratio * u0;
        self
    }

    /// Validity of the few-level truncation, `|N U0| <= 2 hw`.
    pub fn in_valid_regime(&self, n: u32) -> bool {
        match self.hw {
            Some(hw) => (n as f64 * self.u0).abs() <= 2.0 * hw,
            None => true,
        }
    }

    pub fn validate_for(&self, basis: &Basis) -> Result<()> {
        let values = [self.j0, self.j1, self.u0, self.u1, self.u01, self.dv];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("model parameters must be finite".into()));
        }
        if let Some(hw) = self.hw {
            if !(hw.is_finite() && hw > 0.0) {
                return Err(Error::Config(format!("hw must be positive, got {hw}")));
            }
        }
        if basis.levels() == Levels::Two && self.hw.is_none() {
            return Err(Error::Config(
                "two-level basis requires the level spacing hw".into(),
            ));
        }
        match self.unit {
            EnergyUnit::HbarOmega if self.hw != Some(1.0) => Err(Error::Config(format!(
                "energies declared in units of hw but hw = {:?}",
                self.hw
            ))),
            EnergyUnit::InteractionU0 if self.u0 != 1.0 => Err(Error::Config(format!(
                "energies declared in units of U0 but U0 = {}",
                self.u0
            ))),
            _ => Ok(()),
        }
    }

    /// Diagonal matrix element for a Fock state.
    pub fn diagonal(&self, s: &FockState) -> f64 {
        let pair = |n: u32| (n as f64) * (n as f64 - 1.0);
        let (nl0, nr0, nl1, nr1) = (s.nl0 as f64, s.nr0 as f64, s.nl1 as f64, s.nr1 as f64);
        let mut e =
            self.u0 * (pair(s.nl0) + pair(s.nr0)) + 0.5 * self.dv * ((nl0 - nr0) + (nl1 - nr1));
        if s.excited() > 0 {
            e += self.u1 * (pair(s.nl1) + pair(s.nr1))
                + self.hw.unwrap_or(0.0) * (nl1 + nr1)
                + 4.0 * self.u01 * (nl0 * nl1 + nr0 * nr1);
        }
        e
    }

    fn tunneling(&self, level: Level) -> f64 {
        match level {
            Level::Ground => self.j0,
            Level::Excited => self.j1,
        }
    }
}

/// Real symmetric sparse matrix; the upper triangle is the stored form.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    dim: usize,
    unit: EnergyUnit,
    /// `(row, col, value)` with `row <= col`, sorted by `(row, col)`.
    upper: Vec<(usize, usize, f64)>,
    // full symmetric CSR for products
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseHamiltonian {
    /// Assembles a matrix from upper-triangle entries. Duplicates are summed.
    pub fn from_upper(dim: usize, unit: EnergyUnit, mut entries: Vec<(usize, usize, f64)>) -> Self {
        for e in entries.iter_mut() {
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
        }
        entries.sort_by_key(|a| (a.0, a.1));
        let mut upper: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match upper.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => upper.push((r, c, v)),
            }
        }

        let mut counts = vec![0usize; dim];
        for &(r, c, _) in &upper {
            counts[r] += 1;
            if r != c {
                counts[c] += 1;
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        for i in 0..dim {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        let nnz = row_ptr[dim];
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut fill = row_ptr.clone();
        // lower-triangle contributions first keep each row sorted by column
        for &(r, c, v) in &upper {
            if r != c {
                col_idx[fill[c]] = r;
                values[fill[c]] = v;
                fill[c] += 1;
            }
        }
        for &(r, c, v) in &upper {
            col_idx[fill[r]] = c;
            values[fill[r]] = v;
            fill[r] += 1;
        }

        Self {
            dim,
            unit,
            upper,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> EnergyUnit {
        self.unit
    }

    /// Stored (upper-triangle) entries.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.upper
    }

    pub fn nnz_stored(&self) -> usize {
        self.upper.len()
    }

    /// `y = H x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let kernel = |(i, yi): (usize, &mut f64)| {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        };
        if self.dim >= 20_000 {
            y.par_iter_mut().enumerate().for_each(kernel);
        } else {
            y.iter_mut().enumerate().for_each(kernel);
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(r, c, v) in &self.upper {
            if r == c {
                d[r] = v;
            }
        }
        d
    }

    /// Full row `i` as `(col, value)` pairs, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    /// Upper bound on the spectral norm: the maximum absolute row sum.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Lower end of the Gershgorin enclosure of the spectrum.
    pub fn gershgorin_lower(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let mut diag = 0.0;
                let mut off = 0.0;
                for (c, v) in self.row(i) {
                    if c == i {
                        diag = v;
                    } else {
                        off += v.abs();
                    }
                }
                diag - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.upper {
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
        m
    }

    /// Coordinate-list dump: `row col value` per stored entry, 17 significant digits.
    pub fn write_coo<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for &(r, c, v) in &self.upper {
            writeln!(out, "{r} {c} {}", crate::fmt_f64(v))?;
        }
        Ok(())
    }
}

/// Off-diagonal connections of `s`: `(target, amplitude)`.
fn connections(params: &ModelParams, s: &FockState, levels: Levels) -> Vec<(FockState, f64)> {
    let mut out = Vec::with_capacity(8);
    let level_list: &[Level] = match levels {
        Levels::One => &[Level::Ground],
        Levels::Two => &[Level::Ground, Level::Excited],
    };
    for &level in level_list {
        let j = params.tunneling(level);
        if j == 0.0 {
            continue;
        }
        for (from, to) in [(Well::L, Well::R), (Well::R, Well::L)] {
            let nf = s.get(from, level);
            if nf == 0 {
                continue;
            }
            let nt = s.get(to, level);
            let mut t = *s;
            t.set(from, level, nf - 1);
            t.set(to, level, nt + 1);
            out.push((t, -j * ((nf as f64) * (nt as f64 + 1.0)).sqrt()));
        }
    }
    if levels == Levels::Two && params.u01 != 0.0 {
        for well in [Well::L, Well::R] {
            for (from, to) in [
                (Level::Excited, Level::Ground),
                (Level::Ground, Level::Excited),
            ] {
                let nf = s.get(well, from) as f64;
                if nf < 2.0 {
                    continue;
                }
                let nt = s.get(well, to) as f64;
                let mut t = *s;
                t.set(well, from, s.get(well, from) - 2);
                t.set(well, to, s.get(well, to) + 2);
                let amp = params.u01 * (nf * (nf - 1.0)).sqrt() * ((nt + 1.0) * (nt + 2.0)).sqrt();
                out.push((t, amp));
            }
        }
    }
    out
}

/// Assembles the Hamiltonian over `basis`.
pub fn build(params: &ModelParams, basis: &Basis) -> Result<SparseHamiltonian> {
    if basis.dim() == 0 {
        return Err(Error::Domain("empty basis".into()));
    }
    params.validate_for(basis)?;
    let levels = basis.levels();
    let rows: Vec<Vec<(usize, usize, f64)>> = basis
        .states()
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = vec![(i, i, params.diagonal(s))];
            for (t, amp) in connections(params, s, levels) {
                let j = basis
                    .index_of(&t)
                    .expect("Hamiltonian maps the basis into itself");
                if j > i && amp != 0.0 {
                    row.push((i, j, amp));
                }
            }
            row
        })
        .collect();
    let entries = rows.into_iter().flatten().collect();
    Ok(SparseHamiltonian::from_upper(
        basis.dim(),
        params.unit,
        entries,
    ))
}

// ---------------------------------------------------------------------------
// Literal second-quantized form, used as an element-wise oracle for `build`.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ladder {
    Create,
    Annihilate,
}

#[derive(Debug, Clone)]
struct Term {
    coeff: f64,
    /// Applied right to left, as written.
    ops: Vec<(Well, Level, Ladder)>,
}

fn hamiltonian_terms(params: &ModelParams, levels: Levels) -> Vec<Term> {
    use Ladder::*;
    let level_list: &[Level] = match levels {
        Levels::One => &[Level::Ground],
        Levels::Two => &[Level::Ground, Level::Excited],
    };
    let mut terms = Vec::new();
    for &l in level_list {
        let (j, u, e) = match l {
            Level::Ground => (params.j0, params.u0, 0.0),
            Level::Excited => (params.j1, params.u1, params.hw.unwrap_or(0.0)),
        };
        for (a, b) in [(Well::L, Well::R), (Well::R, Well::L)] {
            terms.push(Term {
                coeff: -j,
                ops: vec![(a, l, Create), (b, l, Annihilate)],
            });
        }
        for w in [Well::L, Well::R] {
            // n(n-1) = b+ b+ b b
            terms.push(Term {
                coeff: u,
                ops: vec![
                    (w, l, Create),
                    (w, l, Create),
                    (w, l, Annihilate),
                    (w, l, Annihilate),
                ],
            });
            let sign = if w == Well::L { 0.5 } else { -0.5 };
            terms.push(Term {
                coeff: sign * params.dv + e,
                ops: vec![(w, l, Create), (w, l, Annihilate)],
            });
        }
    }
    if levels == Levels::Two {
        for w in [Well::L, Well::R] {
            for (l, lp) in [
                (Level::Ground, Level::Excited),
                (Level::Excited, Level::Ground),
            ] {
                terms.push(Term {
                    coeff: 2.0 * params.u01,
                    ops: vec![
                        (w, l, Create),
                        (w, l, Annihilate),
                        (w, lp, Create),
                        (w, lp, Annihilate),
                    ],
                });
                terms.push(Term {
                    coeff: params.u01,
                    ops: vec![
                        (w, l, Create),
                        (w, l, Create),
                        (w, lp, Annihilate),
                        (w, lp, Annihilate),
                    ],
                });
            }
        }
    }
    terms
}

fn apply_term(term: &Term, ket: &FockState) -> Option<(FockState, f64)> {
    let mut s = *ket;
    let mut amp = term.coeff;
    for &(w, l, op) in term.ops.iter().rev() {
        let n = s.get(w, l);
        match op {
            Ladder::Annihilate => {
                if n == 0 {
                    return None;
                }
                amp *= (n as f64).sqrt();
                s.set(w, l, n - 1);
            }
            Ladder::Create => {
                amp *= (n as f64 + 1.0).sqrt();
                s.set(w, l, n + 1);
            }
        }
    }
    Some((s, amp))
}

/// `<bra|H|ket>` evaluated from the literal operator expression.
pub fn matrix_element(params: &ModelParams, bra: &FockState, ket: &FockState) -> f64 {
    hamiltonian_terms(params, Levels::Two)
        .iter()
        .filter_map(|t| apply_term(t, ket))
        .filter(|(s, _)| s == bra)
        .map(|(_, a)| a)
        .sum()
}

/// Occupation-number selectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberSelector {
    Total,
    Level(Level),
    Well(Well),
    Mode(Well, Level),
}

/// Diagonal of the selected number operator over `basis`.
pub fn number_operator(basis: &Basis, selector: NumberSelector) -> Vec<f64> {
    basis
        .states()
        .iter()
        .map(|s| {
            let n = match selector {
                NumberSelector::Total => s.total(),
                NumberSelector::Level(l) => s.get(Well::L, l) + s.get(Well::R, l),
                NumberSelector::Well(w) => s.get(w, Level::Ground) + s.get(w, Level::Excited),
                NumberSelector::Mode(w, l) => s.get(w, l),
            };
            n as f64
        })
        .collect()
}

/// Permutation implementing the well exchange: `perm[i]` is the index of the mirror of state `i`.
pub fn well_swap(basis: &Basis) -> Vec<usize> {
    basis
        .states()
        .iter()
        .map(|s| {
            basis
                .index_of(&s.mirrored())
                .expect("mirror stays in basis")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_params(seed: u64) -> ModelParams {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_pcg::Pcg64::seed_from_u64(seed);
        ModelParams {
            j0: rng.random_range(0.0..1.0),
            j1: rng.random_range(0.0..1.0),
            u0: rng.random_range(-1.0..1.0),
            u1: rng.random_range(-1.0..1.0),
            u01: rng.random_range(-1.0..1.0),
            dv: rng.random_range(-1.0..1.0),
            hw: Some(rng.random_range(0.5..5.0)),
            unit: EnergyUnit::Recoil,
        }
    }

    #[test]
    fn single_particle_ground_block() {
        let p = ModelParams::two_level(0.3, 0.5, 0.0, 0.0);
        let h = build(&p, &Basis::enumerate(1)).unwrap().to_dense();
        assert_eq!(h[(0, 0)], 0.0);
        assert_eq!(h[(1, 1)], 0.0);
        assert_eq!(h[(0, 1)], -0.3);
    }

    #[test]
    fn two_atoms_one_level() {
        let p = ModelParams::one_level(0.1, 0.0);
        let h = build(&p, &Basis::one_level(2)).unwrap().to_dense();
        assert_eq!(h[(0, 0)], 2.0);
        assert_eq!(h[(1, 1)], 0.0);
        assert_eq!(h[(2, 2)], 2.0);
        assert!((h[(0, 1)] + 0.1 * 2f64.sqrt()).abs() < 1e-15);
        assert!((h[(1, 2)] + 0.1 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(h[(0, 2)], 0.0);
    }

    #[test]
    fn pair_hop_element() {
        let p = ModelParams::two_level(0.0, 0.0, 0.2, 0.0);
        let b = Basis::enumerate(2);
        let h = build(&p, &b).unwrap().to_dense();
        let i = b.index_of(&FockState::new(0, 0, 2, 0)).unwrap();
        let j = b.index_of(&FockState::new(2, 0, 0, 0)).unwrap();
        assert!((h[(i, j)] - 2.0 * p.u01).abs() < 1e-15);
        assert!(
            (matrix_element(&p, &FockState::new(2, 0, 0, 0), &FockState::new(0, 0, 2, 0))
                - 2.0 * p.u01)
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn element_examples() {
        let p = random_params(3);
        let s = FockState::new(3, 1, 1, 0);
        assert!((matrix_element(&p, &s, &s) - p.diagonal(&s)).abs() < 1e-12);
        // single atom between levels is forbidden
        assert_eq!(matrix_element(&p, &FockState::new(2, 1, 2, 0), &s), 0.0);
        let t = FockState::new(2, 2, 1, 0);
        assert!((matrix_element(&p, &t, &s) + p.j0 * 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn build_matches_operator_oracle() {
        for (seed, n) in [(1u64, 1u32), (2, 2), (3, 3), (4, 4), (5, 5)] {
            let p = random_params(seed);
            let b = Basis::enumerate(n);
            let h = build(&p, &b).unwrap().to_dense();
            for (i, bra) in b.states().iter().enumerate() {
                for (j, ket) in b.states().iter().enumerate() {
                    let e = matrix_element(&p, bra, ket);
                    assert!(
                        (h[(i, j)] - e).abs() < 1e-12,
                        "n={n} ({i},{j}): {} vs {e}",
                        h[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn one_level_build_matches_oracle() {
        let p = ModelParams::one_level(0.37, 0.21);
        let b = Basis::one_level(6);
        let h = build(&p, &b).unwrap().to_dense();
        for (i, bra) in b.states().iter().enumerate() {
            for (j, ket) in b.states().iter().enumerate() {
                assert!((h[(i, j)] - matrix_element(&p, bra, ket)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sparsity_bound_and_symmetry() {
        for n in [1, 4, 9] {
            let p = random_params(n as u64);
            let b = Basis::enumerate(n);
            let h = build(&p, &b).unwrap();
            assert!(h.nnz_stored() <= 7 * b.dim());
            let d = h.to_dense();
            assert_eq!(d, d.transpose());
        }
    }

    #[test]
    fn number_operators() {
        let b = Basis::enumerate(20);
        assert!(number_operator(&b, NumberSelector::Total)
            .iter()
            .all(|&x| x == 20.0));
        let exc = number_operator(&b, NumberSelector::Level(Level::Excited));
        assert!(exc[..21].iter().all(|&x| x == 0.0));
        assert!(exc[21..61].iter().all(|&x| x == 1.0));
        let nl0 = number_operator(&b, NumberSelector::Mode(Well::L, Level::Ground));
        for (i, v) in nl0.iter().enumerate() {
            assert_eq!(*v, b.state_at(i).unwrap().nl0 as f64);
        }
    }

    #[test]
    fn unit_and_level_mismatch_rejected() {
        let mut p = ModelParams::two_level(0.1, 0.1, 0.1, 0.0);
        p.hw = None;
        assert!(matches!(
            build(&p, &Basis::enumerate(2)),
            Err(Error::Config(_))
        ));
        let mut q = ModelParams::two_level(0.1, 0.1, 0.1, 0.0);
        q.hw = Some(2.0);
        assert!(matches!(
            build(&q, &Basis::enumerate(2)),
            Err(Error::Config(_))
        ));
        let mut r = ModelParams::one_level(0.1, 0.0);
        r.u0 = 0.5;
        assert!(matches!(
            build(&r, &Basis::one_level(2)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn validity_flag() {
        let p = ModelParams::two_level(0.0, 0.0, 0.02, 0.0);
        assert!(p.in_valid_regime(100));
        assert!(!p.in_valid_regime(101));
    }
}
