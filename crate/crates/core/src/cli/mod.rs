//! Config-driven batch front end. One JSON config describes one run; every output
//! file starts with a header carrying the code version and the full config.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    analyze, decoherence_threshold, detect_avoided_crossings, dv_crit, first_crossing, linear_grid,
    one_level_max_n, resonance_width_formula, splitting_resonant, splitting_symmetric,
    sweep_interaction, sweep_tilt, u_crit, u_max, LogEnergy, SolveOptions,
};
use crate::bandcalc::{derive_from_spec, PotentialSpec, DEFAULT_GRID_POINTS};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::fock::{Basis, Levels};
use crate::hamiltonian::ModelParams;
use crate::spectrum::{KrylovOptions, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Basis,
    Spectrum,
    SweepTilt,
    SweepInteraction,
    Resonances,
    Thresholds,
    DeriveParams,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Basis => "basis",
            Command::Spectrum => "spectrum",
            Command::SweepTilt => "sweep-tilt",
            Command::SweepInteraction => "sweep-interaction",
            Command::Resonances => "resonances",
            Command::Thresholds => "thresholds",
            Command::DeriveParams => "derive-params",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OneLevel,
    TwoLevel,
}

impl From<Mode> for Levels {
    fn from(m: Mode) -> Levels {
        match m {
            Mode::OneLevel => Levels::One,
            Mode::TwoLevel => Levels::Two,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range { start: f64, stop: f64, step: f64 },
    Values(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Range { start, stop, step } => linear_grid(*start, *stop, *step),
            GridSpec::Values(v) if v.is_empty() => Err(Error::Config("`grid` is empty".into())),
            GridSpec::Values(v) => Ok(v.clone()),
        }
    }
}

/// Rows `k < k_max` and basis indices `n_min..n_max` of the amplitude dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeWindow {
    pub k_max: Option<usize>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dense_cap: Option<usize>,
    pub tol: Option<f64>,
    pub block: Option<usize>,
    pub max_restarts: Option<usize>,
    pub seed: Option<u64>,
    pub gap_tol: Option<f64>,
    pub fidelity_floor: Option<f64>,
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        let d = SolveOptions::default();
        let kd = KrylovOptions::default();
        SolveOptions {
            dense_cap: self.dense_cap.unwrap_or(d.dense_cap),
            krylov: KrylovOptions {
                tol: self.tol.unwrap_or(kd.tol),
                block: self.block.unwrap_or(kd.block),
                subspace: None,
                max_restarts: self.max_restarts.unwrap_or(kd.max_restarts),
                seed: self.seed.unwrap_or(kd.seed),
            },
            gap_tol: self.gap_tol.unwrap_or(d.gap_tol),
            fidelity_floor: self.fidelity_floor.unwrap_or(d.fidelity_floor),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Defaults to two-level when `params.hw` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    /// Number of eigenpairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<AmplitudeWindow>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Phases for a tilt-versus-theta scan in `derive-params`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn n(&self) -> Result<u32> {
        self.n
            .ok_or_else(|| Error::Config("missing required field `N`".into()))
    }

    pub fn params(&self) -> Result<ModelParams> {
        self.params
            .ok_or_else(|| Error::Config("missing required field `params`".into()))
    }

    pub fn levels(&self) -> Levels {
        match (self.mode, self.params.and_then(|p| p.hw)) {
            (Some(m), _) => m.into(),
            (None, Some(_)) => Levels::Two,
            (None, None) => Levels::One,
        }
    }

    pub fn basis(&self) -> Result<Basis> {
        Ok(Basis::new(self.n()?, self.levels()))
    }

    fn grid(&self) -> Result<Vec<f64>> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Config("missing required field `grid`".into()))?
            .values()
    }

    /// Checks the fields the command needs.
    pub fn validate(&self, command: Command) -> Result<()> {
        if self.params.is_some() && self.potential.is_some() {
            return Err(Error::Config(
                "exactly one of `params` and `potential` may be given".into(),
            ));
        }
        match command {
            Command::DeriveParams => {
                if self.potential.is_none() {
                    return Err(Error::Config("missing required field `potential`".into()));
                }
                self.potential.unwrap().validate()?;
                if let Some(t) = &self.thetas {
                    if t.is_empty() {
                        return Err(Error::Config("`thetas` is empty".into()));
                    }
                }
            }
            Command::Basis => {
                self.n()?;
            }
            _ => {
                self.n()?;
                let p = self.params()?;
                if command != Command::Thresholds {
                    p.validate_for(&self.basis()?)?;
                }
                if matches!(
                    command,
                    Command::SweepTilt | Command::SweepInteraction | Command::Resonances
                ) {
                    self.grid()?;
                }
                if self.k == Some(0) {
                    return Err(Error::Config("`k` must be positive".into()));
                }
            }
        }
        Ok(())
    }

    fn header(&self, command: Command) -> Result<String> {
        let mut c = self.clone();
        c.command = Some(command);
        Ok(format!(
            "# doublewell {} {}",
            crate::VERSION,
            serde_json::to_string(&c)?
        ))
    }
}

/// Exit status for a failed run: 2 for bad input, 3 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Json(_) => 2,
        e if e.is_numeric() => 3,
        _ => 1,
    }
}

struct Outputs<'a> {
    dir: &'a Path,
    header: String,
    written: Vec<PathBuf>,
}

impl Outputs<'_> {
    fn csv(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "{}", self.header)?;
        self.written.push(path);
        Ok(w)
    }

    fn json(&mut self, name: &str, config: &RunConfig, body: serde_json::Value) -> Result<()> {
        let path = self.dir.join(name);
        let doc = serde_json::json!({
            "doublewell": crate::VERSION,
            "config": config,
            "result": body,
        });
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        w.flush()?;
        self.written.push(path);
        Ok(())
    }
}

/// Runs `command` (or the config's own `command`) and writes its files into `out`.
pub fn run(
    config: &RunConfig,
    command: Option<Command>,
    out: &Path,
    verbose: bool,
) -> Result<Vec<PathBuf>> {
    let command = command
        .or(config.command)
        .ok_or_else(|| Error::Config("missing required field `command`".into()))?;
    config.validate(command)?;
    std::fs::create_dir_all(out)?;
    let mut config = config.clone();
    config.command = Some(command);
    let mut o = Outputs {
        dir: out,
        header: config.header(command)?,
        written: Vec::new(),
    };
    let opts = config.solver.options();
    if verbose {
        eprintln!("doublewell {}: {}", crate::VERSION, command.name());
    }
    match command {
        Command::Basis => {
            let b = config.basis()?;
            let mut w = o.csv("basis.csv")?;
            b.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Spectrum => run_spectrum(&config, &opts, &mut o, verbose)?,
        Command::SweepTilt | Command::SweepInteraction => {
            run_sweep(&config, command, &opts, &mut o, verbose)?
        }
        Command::Resonances => run_resonances(&config, &opts, &mut o, verbose)?,
        Command::Thresholds => run_thresholds(&config, &mut o)?,
        Command::DeriveParams => run_derive(&config, &mut o, verbose)?,
    }
    if verbose {
        for p in &o.written {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(o.written)
}

fn default_k(basis: &Basis) -> usize {
    (2 * basis.n() as usize + 2).min(basis.dim())
}

fn sign_str(p: Parity) -> &'static str {
    match p {
        Parity::Symmetric => "+",
        Parity::Antisymmetric => "-",
    }
}

fn run_spectrum(
    config: &RunConfig,
    opts: &SolveOptions,
    o: &mut Outputs,
    verbose: bool,
) -> Result<()> {
    let basis = config.basis()?;
    let params = config.params()?;
    let k = config
        .k
        .unwrap_or_else(|| default_k(&basis))
        .min(basis.dim());
    if verbose {
        eprintln!("dimension {}, computing {k} eigenpairs", basis.dim());
    }
    let a = analyze(&params, &basis, k, opts)?;
    let spec = &a.classification.spectrum;

    let mut w = o.csv("eigenvalues.csv")?;
    spec.write_csv(&mut w)?;
    w.flush()?;

    let win = config.amplitudes.unwrap_or(AmplitudeWindow {
        k_max: None,
        n_min: None,
        n_max: None,
    });
    let k_max = win.k_max.unwrap_or(k);
    let n_range = win.n_min.unwrap_or(0)..win.n_max.unwrap_or(basis.dim()).min(basis.dim());
    let mut w = o.csv("amplitudes.csv")?;
    spec.write_amplitudes(&mut w, k_max, n_range)?;
    w.flush()?;

    let mut partner = vec![None; spec.len()];
    for p in &a.classification.pairs {
        partner[p.lower] = Some(p.upper);
        partner[p.upper] = Some(p.lower);
    }
    let mut w = o.csv("cats.csv")?;
    writeln!(
        w,
        "k,eigenvalue,nu,p,sign,fidelity,excited_occ,is_cat,parity,partner"
    )?;
    for (i, c) in a.cats.iter().enumerate() {
        let parity = a.classification.parity[i].map(fmt_f64).unwrap_or_default();
        let partner = partner[i].map(|j| j.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{i},{},{},{},{},{},{},{},{parity},{partner}",
            fmt_f64(spec.eigenvalues[i]),
            c.nu,
            c.p,
            sign_str(c.sign),
            fmt_f64(c.fidelity),
            fmt_f64(c.excited_occ),
            c.is_cat
        )?;
    }
    w.flush()?;
    Ok(())
}

fn run_sweep(
    config: &RunConfig,
    command: Command,
    opts: &SolveOptions,
    o: &mut Outputs,
    verbose: bool,
) -> Result<()> {
    let basis = config.basis()?;
    let params = config.params()?;
    let grid = config.grid()?;
    let k = config
        .k
        .unwrap_or_else(|| default_k(&basis))
        .min(basis.dim());
    if verbose {
        eprintln!(
            "dimension {}, {} grid points, {k} eigenpairs each",
            basis.dim(),
            grid.len()
        );
    }
    let s = if command == Command::SweepTilt {
        sweep_tilt(&params, &basis, &grid, k, opts)?
    } else {
        sweep_interaction(&params, &basis, &grid, k, opts)?
    };
    let mut w = o.csv("sweep.csv")?;
    s.write_csv(&mut w)?;
    w.flush()?;

    if command == Command::SweepInteraction && basis.levels() == Levels::Two {
        let hw = params.hw.unwrap_or(1.0);
        let crossing = if k >= basis.n() as usize + 2 {
            first_crossing(&s, 1e-6)?
        } else {
            None
        };
        o.json(
            "summary.json",
            config,
            serde_json::json!({
                "first_crossing": crossing,
                "u_crit": u_crit(basis.n(), hw),
                "u_max": u_max(basis.n(), hw),
            }),
        )?;
    }
    Ok(())
}

fn run_resonances(
    config: &RunConfig,
    opts: &SolveOptions,
    o: &mut Outputs,
    verbose: bool,
) -> Result<()> {
    let basis = config.basis()?;
    let params = config.params()?;
    let grid = config.grid()?;
    let k = config
        .k
        .unwrap_or_else(|| default_k(&basis))
        .min(basis.dim());
    if verbose {
        eprintln!("tilt sweep over {} points", grid.len());
    }
    let s = sweep_tilt(&params, &basis, &grid, k, opts)?;
    let hits = detect_avoided_crossings(&s)?;
    let mut w = o.csv("resonances.csv")?;
    writeln!(
        w,
        "index,location,min_gap,p_estimate,residual,resolved,formula_position"
    )?;
    for c in &hits {
        let p = c.p_estimate.map(|p| p.to_string()).unwrap_or_default();
        let r = c.residual.map(fmt_f64).unwrap_or_default();
        let f = c
            .p_estimate
            .map(|p| fmt_f64(2.0 * p as f64 * params.u0))
            .unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{p},{r},{},{f}",
            c.index,
            fmt_f64(c.location),
            fmt_f64(c.min_gap),
            c.resolved
        )?;
    }
    w.flush()?;
    Ok(())
}

fn log_row(
    w: &mut impl Write,
    name: &str,
    nu: Option<u32>,
    p: Option<u32>,
    v: LogEnergy,
) -> Result<()> {
    let value = v.try_linear().map(fmt_f64).unwrap_or_default();
    let nu = nu.map(|x| x.to_string()).unwrap_or_default();
    let p = p.map(|x| x.to_string()).unwrap_or_default();
    let note = if v.try_linear().is_none() {
        "below double range"
    } else {
        ""
    };
    writeln!(w, "{name},{nu},{p},{value},{},{note}", fmt_f64(v.log10))?;
    Ok(())
}

fn plain_row(w: &mut impl Write, name: &str, v: f64, note: &str) -> Result<()> {
    let l = if v > 0.0 {
        fmt_f64(v.log10())
    } else {
        String::new()
    };
    writeln!(w, "{name},,,{},{l},{note}", fmt_f64(v))?;
    Ok(())
}

fn run_thresholds(config: &RunConfig, o: &mut Outputs) -> Result<()> {
    let n = config.n()?;
    let params = config.params()?;
    if n < 2 {
        return Err(Error::Domain(format!("thresholds need N >= 2, got {n}")));
    }
    let (j0, u0) = (params.j0, params.u0);
    let mut w = o.csv("thresholds.csv")?;
    writeln!(w, "quantity,nu,p,value,log10,note")?;
    if let Some(hw) = params.hw {
        plain_row(&mut w, "u_crit", u_crit(n, hw), "")?;
        plain_row(&mut w, "u_max", u_max(n, hw), "")?;
        let d = dv_crit(n, u0, hw);
        let branch = match d.branch {
            crate::analysis::CritBranch::Spacing => "spacing branch",
            crate::analysis::CritBranch::Interaction => "interaction branch",
        };
        let note = if d.nonpositive {
            format!("{branch}; nonpositive")
        } else {
            branch.to_string()
        };
        plain_row(&mut w, "dv_crit", d.value, &note)?;
        if j0 > 0.0 {
            let m = one_level_max_n(j0, params.j1, hw)?;
            plain_row(&mut w, "one_level_max_n", m as f64, "noninteracting limit")?;
        }
    }
    if u0 > 0.0 && j0 > 0.0 {
        for nu in (0..n).take_while(|nu| 2 * nu < n) {
            log_row(
                &mut w,
                "splitting",
                Some(nu),
                Some(0),
                splitting_symmetric(n, nu, j0, u0)?,
            )?;
            log_row(
                &mut w,
                "decoherence_threshold",
                Some(nu),
                Some(0),
                decoherence_threshold(n, nu, j0, u0)?,
            )?;
        }
        for p in 1..n {
            writeln!(
                w,
                "resonance_position,0,{p},{},,",
                fmt_f64(2.0 * p as f64 * u0)
            )?;
            log_row(
                &mut w,
                "resonant_splitting",
                Some(0),
                Some(p),
                splitting_resonant(n, p, j0, u0)?,
            )?;
            log_row(
                &mut w,
                "resonance_width",
                Some(0),
                Some(p),
                resonance_width_formula(n, p, j0, u0)?,
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn run_derive(config: &RunConfig, o: &mut Outputs, verbose: bool) -> Result<()> {
    use rayon::prelude::*;

    let spec = config.potential.unwrap();
    let points = config.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
    if verbose {
        eprintln!("band calculation on {points} grid points");
    }
    let d = derive_from_spec(&spec, points)?;
    let mut w = o.csv("orbitals.csv")?;
    d.orbitals.write_csv(&mut w)?;
    w.flush()?;

    let mut body = serde_json::to_value(&d)?;
    if let Some(n) = config.n {
        body["interaction_to_spacing"] =
            serde_json::json!({ "N": n, "value": d.interaction_to_spacing(n) });
    }
    o.json("params.json", config, body)?;

    if let Some(thetas) = &config.thetas {
        let tilts: Vec<f64> = thetas
            .par_iter()
            .map(|&t| Ok(derive_from_spec(&spec.with_theta(t), points)?.params.dv))
            .collect::<Result<_>>()?;
        let mut w = o.csv("theta_scan.csv")?;
        writeln!(w, "theta,dV")?;
        for (t, v) in thetas.iter().zip(&tilts) {
            writeln!(w, "{},{}", fmt_f64(*t), fmt_f64(*v))?;
        }
        w.flush()?;
    }
    Ok(())
}
