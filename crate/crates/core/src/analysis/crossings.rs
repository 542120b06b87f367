//! Avoided-crossing detection in tilt sweeps, first excited-level crossing, and
//! direct measurement of resonant gaps.

use serde::{Deserialize, Serialize};

use super::formulas::{resonance_width_formula, LogEnergy};
use super::sweep::{analyze, lowest_spectrum, SolveOptions, SweepResult, SweptParameter};
use crate::error::{Error, Result};
use crate::fock::{Basis, FockState};
use crate::hamiltonian::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvoidedCrossing {
    /// Lower index of the adjacent eigenvalue pair whose gap has the minimum.
    pub index: usize,
    pub location: f64,
    pub min_gap: f64,
    pub p_estimate: Option<u32>,
    /// `location - 2 p U0`.
    pub residual: Option<f64>,
    /// False when the grid step exceeds the estimated crossing width; the
    /// location is then the grid point and `min_gap` an upper bound.
    pub resolved: bool,
}

/// Vertex of the parabola through three points, when it opens upward.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if !(a > 0.0) {
        return None;
    }
    let b = d1 - a * (x[0] + x[1]);
    let xv = -b / (2.0 * a);
    let yv = y[0] + (xv - x[0]) * (d1 + a * (xv - x[1]));
    Some((xv, yv))
}

/// Local minima of adjacent-eigenvalue gaps along a tilt sweep, each matched to
/// the nearest resonance `2 p U0`.
pub fn detect_avoided_crossings(sweep: &SweepResult) -> Result<Vec<AvoidedCrossing>> {
    if sweep.parameter != SweptParameter::Tilt {
        return Err(Error::Domain(
            "avoided-crossing detection needs a tilt sweep".into(),
        ));
    }
    let x = &sweep.grid;
    let width = sweep.eigenvalues.iter().map(Vec::len).min().unwrap_or(0);
    let u0 = sweep.base.u0;
    let n = sweep.n;
    let mut found = Vec::new();
    for i in 0..width.saturating_sub(1) {
        let g: Vec<f64> = sweep.eigenvalues.iter().map(|e| e[i + 1] - e[i]).collect();
        for j in 1..g.len().saturating_sub(1) {
            if !(g[j] < g[j - 1] && g[j] <= g[j + 1]) {
                continue;
            }
            let step = 0.5 * (x[j + 1] - x[j - 1]);
            let slope = ((g[j + 1] - g[j]) / (x[j + 1] - x[j]))
                .abs()
                .max(((g[j] - g[j - 1]) / (x[j] - x[j - 1])).abs());
            let resolved = slope == 0.0 || g[j] / slope >= step;
            let (location, min_gap) = if resolved {
                match parabola_vertex([x[j - 1], x[j], x[j + 1]], [g[j - 1], g[j], g[j + 1]]) {
                    Some((xv, yv)) => (xv.clamp(x[j - 1], x[j + 1]), yv.clamp(0.0, g[j])),
                    None => (x[j], g[j]),
                }
            } else {
                (x[j], g[j])
            };
            let (p_estimate, residual) = if u0 != 0.0 {
                let p = (location / (2.0 * u0)).round();
                if p >= 1.0 && p <= (n as f64 - 1.0) {
                    (Some(p as u32), Some(location - 2.0 * p * u0))
                } else {
                    (None, None)
                }
            } else {
                (None, None)
            };
            found.push(AvoidedCrossing {
                index: i,
                location,
                min_gap,
                p_estimate,
                residual,
                resolved,
            });
        }
    }
    found.sort_by(|a, b| {
        a.location
            .total_cmp(&b.location)
            .then(a.index.cmp(&b.index))
    });
    Ok(found)
}

/// Gap between the lowest excited-level state and the highest ground-level state
/// among the lowest `N+1` ground-level states. Negative once they have crossed.
fn crossing_indicator(energies: &[f64], excited: &[f64], n: u32) -> f64 {
    let mut ground_max = f64::NEG_INFINITY;
    let mut ground_seen = 0;
    let mut excited_min = f64::INFINITY;
    for (e, occ) in energies.iter().zip(excited) {
        if *occ >= 0.5 {
            excited_min = excited_min.min(*e);
        } else if ground_seen <= n {
            ground_max = ground_max.max(*e);
            ground_seen += 1;
        }
    }
    if !excited_min.is_finite() {
        f64::INFINITY
    } else if ground_seen <= n {
        // the missing ground-level states lie above the whole window
        let top = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (excited_min - top).min(0.0)
    } else {
        excited_min - ground_max
    }
}

/// Smallest swept value at which a state with excited-level occupation enters
/// the lowest `N+1` eigenstates, refined by bisection to `rel_tol`.
pub fn first_crossing(sweep: &SweepResult, rel_tol: f64) -> Result<Option<f64>> {
    let n = sweep.n;
    if sweep.k < n as usize + 2 {
        return Err(Error::Domain(format!(
            "first-crossing search needs k >= N + 2 = {}, got {}",
            n + 2,
            sweep.k
        )));
    }
    let basis = sweep.basis();
    let indicator_at = |value: f64| -> Result<f64> {
        let pa = analyze(&sweep.params_at(value), &basis, sweep.k, &sweep.options)?;
        let occ: Vec<f64> = pa.cats.iter().map(|c| c.excited_occ).collect();
        Ok(crossing_indicator(pa.eigenvalues(), &occ, n))
    };
    let stored: Vec<f64> = sweep
        .eigenvalues
        .iter()
        .zip(&sweep.cats)
        .map(|(e, c)| {
            let occ: Vec<f64> = c.iter().map(|r| r.excited_occ).collect();
            crossing_indicator(e, &occ, n)
        })
        .collect();
    if stored[0] <= 0.0 {
        return Ok(Some(sweep.grid[0]));
    }
    let Some(j) = stored.iter().position(|g| *g <= 0.0) else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (sweep.grid[j - 1], sweep.grid[j]);
    while hi - lo > rel_tol * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if indicator_at(mid)? <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceGap {
    pub location: f64,
    pub gap: f64,
}

/// Gap of the `(nu, p)` pair at tilt `dv`: the distance from the eigenvalue
/// nearest the unperturbed energy of `|nu, N-nu>` to its closest neighbour.
fn pair_gap(
    params: &ModelParams,
    basis: &Basis,
    nu: u32,
    dv: f64,
    opts: &SolveOptions,
) -> Result<f64> {
    let n = basis.n();
    let p = params.with_tilt(dv);
    let target = p.diagonal(&FockState::new(nu, n - nu, 0, 0));
    let spec = lowest_spectrum(&p, basis, basis.dim(), opts)?;
    let e = &spec.eigenvalues;
    let i = (0..e.len())
        .min_by(|&a, &b| (e[a] - target).abs().total_cmp(&(e[b] - target).abs()))
        .unwrap();
    let below = if i > 0 {
        e[i] - e[i - 1]
    } else {
        f64::INFINITY
    };
    let above = if i + 1 < e.len() {
        e[i + 1] - e[i]
    } else {
        f64::INFINITY
    };
    Ok(below.min(above))
}

/// Minimum gap of the `(nu, p)` pair near the tilt `2 p U0`, by a coarse scan
/// followed by golden-section refinement within `±U0/2`.
pub fn measure_resonance_gap(
    params: &ModelParams,
    basis: &Basis,
    nu: u32,
    p: u32,
    opts: &SolveOptions,
) -> Result<ResonanceGap> {
    let n = basis.n();
    if p == 0 || p >= n || 2 * nu + p >= n {
        return Err(Error::Domain(format!(
            "no resonant pair with nu = {nu}, p = {p} for N = {n}"
        )));
    }
    if basis.dim() > opts.dense_cap {
        return Err(Error::DenseCapExceeded {
            dim: basis.dim(),
            cap: opts.dense_cap,
        });
    }
    let u0 = params.u0.abs();
    let center = 2.0 * p as f64 * params.u0;
    let half = 0.5 * u0;
    let f = |dv: f64| pair_gap(params, basis, nu, dv, opts);

    let samples = 40;
    let xs: Vec<f64> = (0..=samples)
        .map(|i| center - half + 2.0 * half * i as f64 / samples as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let jmin = (0..ys.len())
        .min_by(|&a, &b| ys[a].total_cmp(&ys[b]))
        .unwrap();
    let mut a = xs[jmin.saturating_sub(1)];
    let mut b = xs[(jmin + 1).min(samples)];

    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let tol = 1e-12 * u0.max(f64::MIN_POSITIVE);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d)?;
        }
    }
    let (location, gap) = if fc < fd { (c, fc) } else { (d, fd) };
    let (location, gap) = if ys[jmin] < gap {
        (xs[jmin], ys[jmin])
    } else {
        (location, gap)
    };
    Ok(ResonanceGap { location, gap })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthSource {
    /// Closed form for the extreme pair.
    Formula,
    /// Measured from the avoided-crossing gap.
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceWidth {
    pub width: LogEnergy,
    pub source: WidthSource,
}

/// Tilt detuning `|dV - dV_p|` beyond which the `(nu, p)` pair localizes,
/// `2 dE / (N - 2nu - p)`. Uses the closed form for `nu = 0` and a measured
/// gap otherwise.
pub fn resonance_width(
    params: &ModelParams,
    basis: &Basis,
    nu: u32,
    p: u32,
    opts: &SolveOptions,
) -> Result<ResonanceWidth> {
    let n = basis.n();
    if nu == 0 {
        return Ok(ResonanceWidth {
            width: resonance_width_formula(n, p, params.j0, params.u0)?,
            source: WidthSource::Formula,
        });
    }
    let gap = measure_resonance_gap(params, basis, nu, p, opts)?;
    Ok(ResonanceWidth {
        width: LogEnergy::from_linear(2.0 * gap.gap / (n - 2 * nu - p) as f64),
        source: WidthSource::Measured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::formulas::{splitting_resonant, u_crit};
    use crate::analysis::sweep::{sweep_interaction, sweep_tilt};
    use crate::fock::Levels;

    #[test]
    fn indicator_handles_truncated_window() {
        // N = 2: three ground-level states, window of four
        assert!(crossing_indicator(&[0.0, 1.0, 2.0, 3.0], &[0.0, 0.0, 0.0, 1.0], 2) > 0.0);
        assert!(crossing_indicator(&[0.0, 1.0, 2.0, 3.0], &[0.0, 0.0, 1.0, 0.0], 2) < 0.0);
        // two ground-level states pushed out of the window
        assert!(crossing_indicator(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 1.0, 1.0], 2) < 0.0);
        assert_eq!(
            crossing_indicator(&[0.0, 1.0, 2.0], &[0.0, 0.0, 0.0], 2),
            f64::INFINITY
        );
    }

    #[test]
    fn parabola_vertex_exact() {
        let (xv, yv) = parabola_vertex([0.0, 1.0, 3.0], [4.0, 1.0, 1.0]).unwrap();
        // y = (x-2)^2
        assert!((xv - 2.0).abs() < 1e-12 && yv.abs() < 1e-12);
        assert!(parabola_vertex([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]).is_none());
    }

    #[test]
    fn constant_gap_gives_nothing() {
        let p = ModelParams::two_level(0.01, 0.02, 0.0, 0.0);
        let s = sweep_tilt(
            &p,
            &Basis::enumerate(1),
            &[0.0, 0.1, 0.2, 0.3],
            2,
            &SolveOptions::default(),
        )
        .unwrap();
        // single-particle gap 2 sqrt((dV/2)^2 + J0^2) grows monotonically
        assert!(detect_avoided_crossings(&s).unwrap().is_empty());
        let flat = SweepResult {
            eigenvalues: vec![vec![0.0, 1.0]; 5],
            grid: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            ..s
        };
        assert!(detect_avoided_crossings(&flat).unwrap().is_empty());
    }

    #[test]
    fn coarse_grid_flags_unresolved() {
        let p = ModelParams::one_level(0.02, 0.0);
        let b = Basis::one_level(6);
        // p = 4 resonance has a width ~1e-3 U0; step 0.1 cannot resolve it
        let grid: Vec<f64> = (0..=20).map(|i| 7.0 + 0.1 * i as f64).collect();
        let s = sweep_tilt(&p, &b, &grid, 7, &SolveOptions::default()).unwrap();
        let hits = detect_avoided_crossings(&s).unwrap();
        let at8: Vec<_> = hits.iter().filter(|c| c.p_estimate == Some(4)).collect();
        assert!(!at8.is_empty());
        for c in at8 {
            assert!(!c.resolved);
            assert!(c.residual.unwrap().abs() <= 0.1 + 1e-12);
        }
    }

    #[test]
    fn resolved_crossing_interpolates() {
        let p = ModelParams::one_level(0.1, 0.0);
        let b = Basis::one_level(4);
        let grid: Vec<f64> = (0..=80).map(|i| 5.5 + 0.0125 * i as f64).collect();
        let s = sweep_tilt(&p, &b, &grid, 5, &SolveOptions::default()).unwrap();
        let hits: Vec<_> = detect_avoided_crossings(&s)
            .unwrap()
            .into_iter()
            .filter(|c| c.p_estimate == Some(3) && c.index == 0)
            .collect();
        assert_eq!(hits.len(), 1);
        let c = hits[0];
        assert!(c.resolved);
        let formula = splitting_resonant(4, 3, 0.1, 1.0).unwrap().to_linear();
        assert!(
            (c.min_gap / formula - 1.0).abs() < 0.1,
            "{} vs {formula}",
            c.min_gap
        );
    }

    #[test]
    fn interaction_sweep_first_crossing_small() {
        let n = 4;
        let base = ModelParams::two_level(4e-7, 3e-5, 0.0, 0.0);
        let b = Basis::enumerate(n);
        let uc = u_crit(n, 1.0);
        let grid: Vec<f64> = (1..=20).map(|i| uc * 0.1 * i as f64).collect();
        let s =
            sweep_interaction(&base, &b, &grid, n as usize + 4, &SolveOptions::default()).unwrap();
        let x = first_crossing(&s, 1e-4).unwrap().unwrap();
        assert!((x / uc - 1.0).abs() < 0.15, "{x} vs {uc}");
        let tiny = sweep_interaction(
            &base,
            &b,
            &[1e-9, 2e-9],
            n as usize + 4,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(first_crossing(&tiny, 1e-4).unwrap(), None);
        let short = SweepResult { k: 3, ..tiny };
        assert!(first_crossing(&short, 1e-4).is_err());
    }

    #[test]
    fn measured_gap_matches_closed_form() {
        let p = ModelParams::one_level(0.1, 0.0);
        let b = Basis::new(8, Levels::One);
        let g = measure_resonance_gap(&p, &b, 0, 6, &SolveOptions::default()).unwrap();
        let formula = splitting_resonant(8, 6, 0.1, 1.0).unwrap().to_linear();
        assert!((g.gap / formula - 1.0).abs() < 0.1);
        assert!((g.location - 12.0).abs() < 0.01);
        assert!(measure_resonance_gap(&p, &b, 1, 6, &SolveOptions::default()).is_err());
    }

    #[test]
    fn width_sources() {
        let p = ModelParams::one_level(0.1, 0.0);
        let b = Basis::one_level(8);
        let w0 = resonance_width(&p, &b, 0, 5, &SolveOptions::default()).unwrap();
        assert_eq!(w0.source, WidthSource::Formula);
        let w1 = resonance_width(&p, &b, 1, 3, &SolveOptions::default()).unwrap();
        assert_eq!(w1.source, WidthSource::Measured);
        assert!(w1.width.to_linear() > 0.0);
    }
}
