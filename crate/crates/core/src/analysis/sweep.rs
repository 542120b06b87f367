use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cats::{best_cat, CatReport, DEFAULT_FIDELITY_FLOOR};
use crate::error::{Error, Result};
use crate::fock::{Basis, Levels};
use crate::hamiltonian::{build, well_swap, EnergyUnit, ModelParams, U01_OVER_U0, U1_OVER_U0};
use crate::spectrum::{
    classify_pairs, solve_dense, solve_lowest, KrylovOptions, PairClassification,
    DEFAULT_DENSE_CAP, DEFAULT_GAP_TOL,
};

/// Solver and classification settings shared by single-point and sweep analyses.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub dense_cap: usize,
    pub krylov: KrylovOptions,
    pub gap_tol: f64,
    pub fidelity_floor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            dense_cap: DEFAULT_DENSE_CAP,
            krylov: KrylovOptions::default(),
            gap_tol: DEFAULT_GAP_TOL,
            fidelity_floor: DEFAULT_FIDELITY_FLOOR,
        }
    }
}

/// Spectrum, pair structure and cat reports at one parameter point.
#[derive(Debug, Clone)]
pub struct PointAnalysis {
    pub classification: PairClassification,
    pub cats: Vec<CatReport>,
}

impl PointAnalysis {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.classification.spectrum.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.classification.spectrum.eigenvectors
    }
}

/// Lowest `k` eigenpairs; dense below the cap, Krylov above it.
pub fn lowest_spectrum(
    params: &ModelParams,
    basis: &Basis,
    k: usize,
    opts: &SolveOptions,
) -> Result<crate::spectrum::Spectrum> {
    let h = build(params, basis)?;
    let k = k.min(h.dim());
    if h.dim() <= opts.dense_cap {
        let mut s = solve_dense(&h, opts.dense_cap)?;
        s.eigenvalues.truncate(k);
        s.eigenvectors.truncate(k);
        s.residuals.truncate(k);
        Ok(s)
    } else {
        solve_lowest(&h, k, &opts.krylov)
    }
}

/// Diagonalizes, pairs (with parity adaptation at zero tilt) and classifies cats.
pub fn analyze(
    params: &ModelParams,
    basis: &Basis,
    k: usize,
    opts: &SolveOptions,
) -> Result<PointAnalysis> {
    let spectrum = lowest_spectrum(params, basis, k, opts)?;
    let swap = (params.dv == 0.0).then(|| well_swap(basis));
    let classification = classify_pairs(&spectrum, opts.gap_tol, swap.as_deref());
    let cats = classification
        .spectrum
        .eigenvectors
        .iter()
        .enumerate()
        .map(|(i, v)| best_cat(v, basis, i, opts.fidelity_floor))
        .collect();
    Ok(PointAnalysis {
        classification,
        cats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    Tilt,
    Interaction,
}

impl SweptParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweptParameter::Tilt => "dV",
            SweptParameter::Interaction => "U0",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub parameter: SweptParameter,
    pub base: ModelParams,
    /// `(U1/U0, U01/U0)` held fixed in interaction sweeps.
    pub ratios: (f64, f64),
    pub n: u32,
    pub levels: Levels,
    pub k: usize,
    pub options: SolveOptions,
    pub grid: Vec<f64>,
    pub eigenvalues: Vec<Vec<f64>>,
    pub cats: Vec<Vec<CatReport>>,
}

impl SweepResult {
    pub fn params_at(&self, value: f64) -> ModelParams {
        match self.parameter {
            SweptParameter::Tilt => self.base.with_tilt(value),
            SweptParameter::Interaction => {
                self.base
                    .with_interaction(value, self.ratios.0, self.ratios.1)
            }
        }
    }

    pub fn basis(&self) -> Basis {
        Basis::new(self.n, self.levels)
    }

    /// Sweep CSV: `param_value,k,eigenvalue,nu,p,sign,fidelity,excited_occ`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        use crate::fmt_f64;
        writeln!(
            out,
            "param_value,k,eigenvalue,nu,p,sign,fidelity,excited_occ"
        )?;
        for ((x, evs), cats) in self.grid.iter().zip(&self.eigenvalues).zip(&self.cats) {
            for (k, (e, c)) in evs.iter().zip(cats).enumerate() {
                let sign = match c.sign {
                    crate::spectrum::Parity::Symmetric => "+",
                    crate::spectrum::Parity::Antisymmetric => "-",
                };
                writeln!(
                    out,
                    "{},{k},{},{},{},{sign},{},{}",
                    fmt_f64(*x),
                    fmt_f64(*e),
                    c.nu,
                    c.p,
                    fmt_f64(c.fidelity),
                    fmt_f64(c.excited_occ)
                )?;
            }
        }
        Ok(())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "sweep grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Evenly spaced grid from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(Error::Config(format!(
            "invalid grid start={start} stop={stop} step={step}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn run_sweep(
    parameter: SweptParameter,
    base: &ModelParams,
    ratios: (f64, f64),
    basis: &Basis,
    grid: &[f64],
    k: usize,
    opts: &SolveOptions,
) -> Result<SweepResult> {
    check_grid(grid)?;
    let mut result = SweepResult {
        parameter,
        base: *base,
        ratios,
        n: basis.n(),
        levels: basis.levels(),
        k,
        options: opts.clone(),
        grid: grid.to_vec(),
        eigenvalues: Vec::new(),
        cats: Vec::new(),
    };
    let points: Vec<PointAnalysis> = grid
        .par_iter()
        .map(|&x| analyze(&result.params_at(x), basis, k, opts))
        .collect::<Result<_>>()?;
    for p in points {
        result.eigenvalues.push(p.eigenvalues().to_vec());
        result.cats.push(p.cats);
    }
    Ok(result)
}

/// Lowest `k` eigenvalues and cat reports over a grid of tilts.
pub fn sweep_tilt(
    params: &ModelParams,
    basis: &Basis,
    grid: &[f64],
    k: usize,
    opts: &SolveOptions,
) -> Result<SweepResult> {
    run_sweep(
        SweptParameter::Tilt,
        params,
        (0.0, 0.0),
        basis,
        grid,
        k,
        opts,
    )
}

/// Lowest `k` eigenvalues over a grid of `U0`, holding `U1/U0` and `U01/U0` fixed.
pub fn sweep_interaction(
    params: &ModelParams,
    basis: &Basis,
    grid: &[f64],
    k: usize,
    opts: &SolveOptions,
) -> Result<SweepResult> {
    if params.unit == EnergyUnit::InteractionU0 {
        return Err(Error::Config(
            "cannot sweep U0 with energies in units of U0".into(),
        ));
    }
    let ratios = if params.u0 != 0.0 {
        (params.u1 / params.u0, params.u01 / params.u0)
    } else {
        (U1_OVER_U0, U01_OVER_U0)
    };
    run_sweep(
        SweptParameter::Interaction,
        params,
        ratios,
        basis,
        grid,
        k,
        opts,
    )
}
