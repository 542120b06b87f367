//! Physics post-processing: closed-form splittings and thresholds, cat-state
//! identification, parameter sweeps and resonance detection.

pub mod cats;
pub mod crossings;
pub mod formulas;
pub mod sweep;

pub use cats::{best_cat, cat_fidelity, excited_occupation, CatReport, DEFAULT_FIDELITY_FLOOR};
pub use crossings::{
    detect_avoided_crossings, first_crossing, measure_resonance_gap, resonance_width,
    AvoidedCrossing, ResonanceGap, ResonanceWidth, WidthSource,
};
pub use formulas::{
    decoherence_threshold, dv_crit, one_level_max_n, resonance_positions, resonance_width_formula,
    splitting_resonant, splitting_symmetric, u_crit, u_max, CritBranch, DvCrit, LogEnergy,
};
pub use sweep::{
    analyze, linear_grid, lowest_spectrum, sweep_interaction, sweep_tilt, PointAnalysis,
    SolveOptions, SweepResult, SweptParameter,
};
