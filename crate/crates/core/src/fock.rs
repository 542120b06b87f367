//! Four-mode bosonic Fock basis at fixed particle number.
//!
//! Modes are (well L/R) x (level 0/1). States are ordered by excited-level
//! occupancy `M = nL1 + nR1`, then `nL1`, then `nL0`, all ascending. The
//! block of fixed `M` holds `(M+1)(N-M+1)` states, so for `N = 20` the
//! `M = 0` block spans indices 0..=20 and `M = 1` spans 21..=60.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupation numbers of the four single-particle modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockState {
    pub nl0: u32,
    pub nr0: u32,
    pub nl1: u32,
    pub nr1: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Well {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Ground,
    Excited,
}

impl FockState {
    pub const fn new(nl0: u32, nr0: u32, nl1: u32, nr1: u32) -> Self {
        Self { nl0, nr0, nl1, nr1 }
    }

    pub fn total(&self) -> u32 {
        self.nl0 + self.nr0 + self.nl1 + self.nr1
    }

    /// Excited-level occupancy `M`.
    pub fn excited(&self) -> u32 {
        self.nl1 + self.nr1
    }

    pub fn get(&self, well: Well, level: Level) -> u32 {
        match (well, level) {
            (Well::L, Level::Ground) => self.nl0,
            (Well::R, Level::Ground) => self.nr0,
            (Well::L, Level::Excited) => self.nl1,
            (Well::R, Level::Excited) => self.nr1,
        }
    }

    pub fn set(&mut self, well: Well, level: Level, value: u32) {
        match (well, level) {
            (Well::L, Level::Ground) => self.nl0 = value,
            (Well::R, Level::Ground) => self.nr0 = value,
            (Well::L, Level::Excited) => self.nl1 = value,
            (Well::R, Level::Excited) => self.nr1 = value,
        }
    }

    /// Image under the left/right well exchange.
    pub fn mirrored(&self) -> Self {
        Self::new(self.nr0, self.nl0, self.nr1, self.nl1)
    }
}

/// Which levels the basis keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Levels {
    /// Ground level only (`M = 0`), dimension `N + 1`.
    One,
    /// Both levels, dimension `(N+3)(N+2)(N+1)/6`.
    Two,
}

/// Hilbert-space dimension of the two-level basis.
pub fn dimension(n: u64) -> u64 {
    (n + 3) * (n + 2) * (n + 1) / 6
}

/// Number of states with exactly `m` atoms in the excited level.
pub fn block_size(n: u32, m: u32) -> usize {
    if m > n {
        return 0;
    }
    (m as usize + 1) * (n - m + 1) as usize
}

/// Index of the first state with excited occupancy `m`, i.e.
/// `sum_{j<m} (j+1)(N-j+1)` in closed form.
pub fn block_offset(n: u32, m: u32) -> usize {
    let a = n as i128 + 1;
    let m = m as i128;
    let s1 = m * (m - 1) / 2;
    let s2 = (m - 1) * m * (2 * m - 1) / 6;
    (a * s1 + a * m - s2 - s1) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    n: u32,
    levels: Levels,
    states: Vec<FockState>,
}

impl Basis {
    pub fn new(n: u32, levels: Levels) -> Self {
        let max_m = match levels {
            Levels::One => 0,
            Levels::Two => n,
        };
        let mut states = Vec::with_capacity(block_offset(n, max_m + 1));
        for m in 0..=max_m {
            for nl1 in 0..=m {
                for nl0 in 0..=(n - m) {
                    states.push(FockState::new(nl0, n - m - nl0, nl1, m - nl1));
                }
            }
        }
        Self { n, levels, states }
    }

    /// The full two-level basis.
    pub fn enumerate(n: u32) -> Self {
        Self::new(n, Levels::Two)
    }

    pub fn one_level(n: u32) -> Self {
        Self::new(n, Levels::One)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn max_excited(&self) -> u32 {
        match self.levels {
            Levels::One => 0,
            Levels::Two => self.n,
        }
    }

    pub fn state_at(&self, index: usize) -> Result<FockState> {
        self.states.get(index).copied().ok_or_else(|| {
            Error::Domain(format!(
                "index {index} out of range for basis of dimension {}",
                self.dim()
            ))
        })
    }

    /// Position of `s` in the canonical ordering, computed arithmetically.
    pub fn index_of(&self, s: &FockState) -> Result<usize> {
        if s.total() != self.n {
            return Err(Error::Domain(format!(
                "state {s:?} has {} atoms, basis has N = {}",
                s.total(),
                self.n
            )));
        }
        let m = s.excited();
        if m > self.max_excited() {
            return Err(Error::Domain(format!(
                "state {s:?} occupies the excited level in a one-level basis"
            )));
        }
        Ok(block_offset(self.n, m) + s.nl1 as usize * (self.n - m + 1) as usize + s.nl0 as usize)
    }

    /// Range of indices occupied by the block with excited occupancy `m`.
    pub fn block_range(&self, m: u32) -> std::ops::Range<usize> {
        if m > self.max_excited() {
            return self.dim()..self.dim();
        }
        block_offset(self.n, m)..block_offset(self.n, m + 1)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,nL0,nR0,nL1,nR1,M")?;
        for (i, s) in self.states.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                i,
                s.nl0,
                s.nr0,
                s.nl1,
                s.nr1,
                s.excited()
            )?;
        }
        Ok(())
    }
}
