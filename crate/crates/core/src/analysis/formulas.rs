//! Closed-form perturbative splittings and critical thresholds.
//!
//! Splittings underflow double precision for realistic atom numbers (a
//! hundred atoms gives values near 1e-287), so they are carried as
//! [`LogEnergy`] and every factorial goes through `ln Γ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An energy stored as sign and base-10 logarithm of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEnergy {
    pub sign: i8,
    pub log10: f64,
}

impl LogEnergy {
    pub const ZERO: LogEnergy = LogEnergy {
        sign: 0,
        log10: f64::NEG_INFINITY,
    };

    pub fn from_linear(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        Self {
            sign: if x > 0.0 { 1 } else { -1 },
            log10: x.abs().log10(),
        }
    }

    pub fn from_ln(sign: i8, ln_magnitude: f64) -> Self {
        if sign == 0 {
            return Self::ZERO;
        }
        Self {
            sign: sign.signum(),
            log10: ln_magnitude / std::f64::consts::LN_10,
        }
    }

    /// Linear value; under- or overflows to 0 or infinity outside the f64 range.
    pub fn to_linear(&self) -> f64 {
        self.sign as f64 * 10f64.powf(self.log10)
    }

    /// Linear value when it is representable without underflow.
    pub fn try_linear(&self) -> Option<f64> {
        if self.sign == 0 {
            Some(0.0)
        } else if self.log10.abs() < 300.0 {
            Some(self.to_linear())
        } else {
            None
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        if factor == 0.0 || self.sign == 0 {
            return Self::ZERO;
        }
        Self {
            sign: self.sign * if factor > 0.0 { 1 } else { -1 },
            log10: self.log10 + factor.abs().log10(),
        }
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Splitting of the `nu`-th symmetric/antisymmetric pair at zero tilt,
/// `4 U0 (J0/2U0)^(N-2nu) (N-nu)! / (nu! [(N-2nu-1)!]^2)`, as a magnitude in the
/// units of `j0` and `u0`.
pub fn splitting_symmetric(n: u32, nu: u32, j0: f64, u0: f64) -> Result<LogEnergy> {
    if 2 * nu >= n {
        return Err(Error::Domain(format!(
            "need nu < N/2, got nu = {nu}, N = {n}"
        )));
    }
    if u0 == 0.0 {
        return Err(Error::Domain("U0 must be nonzero".into()));
    }
    if j0 == 0.0 {
        return Ok(LogEnergy::ZERO);
    }
    let (n, nu) = (n as u64, nu as u64);
    let order = (n - 2 * nu) as f64;
    let ln = (4.0 * u0.abs()).ln() + order * (j0 / (2.0 * u0)).abs().ln() + ln_factorial(n - nu)
        - ln_factorial(nu)
        - 2.0 * ln_factorial(n - 2 * nu - 1);
    Ok(LogEnergy::from_ln(1, ln))
}

/// Splitting of the extreme (`nu = 0`) pair at the `p`-th resonance,
/// `4 U0 (J0/2U0)^(N-p) (N-p)/(N-p-1)! sqrt(C(N,p))`.
pub fn splitting_resonant(n: u32, p: u32, j0: f64, u0: f64) -> Result<LogEnergy> {
    if p == 0 || p >= n {
        return Err(Error::Domain(format!(
            "need 1 <= p <= N-1, got p = {p}, N = {n}"
        )));
    }
    if u0 == 0.0 {
        return Err(Error::Domain("U0 must be nonzero".into()));
    }
    if j0 == 0.0 {
        return Ok(LogEnergy::ZERO);
    }
    let (n, p) = (n as u64, p as u64);
    let order = (n - p) as f64;
    let ln = (4.0 * u0.abs()).ln() + order * (j0 / (2.0 * u0)).abs().ln() + order.ln()
        - ln_factorial(n - p - 1)
        + 0.5 * ln_binomial(n, p);
    Ok(LogEnergy::from_ln(1, ln))
}

/// Interaction above which excited-level states enter the lowest `N+1`, `2 hw / (N^2 - 1)`.
pub fn u_crit(n: u32, hw: f64) -> f64 {
    let n = n as f64;
    2.0 * hw / (n * n - 1.0)
}

/// Branch point of the critical tilt, `u_crit (N+1) / (4N)`.
pub fn u_max(n: u32, hw: f64) -> f64 {
    u_crit(n, hw) * (n as f64 + 1.0) / (4.0 * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CritBranch {
    /// `hw / N`, for `U0 <= u_max`.
    Spacing,
    /// `2 U0 [sqrt(1 + 2 hw/U0) - N]`, for `U0 > u_max`.
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvCrit {
    pub value: f64,
    pub branch: CritBranch,
    /// Set when the value is not positive: crossings already occur at zero tilt.
    pub nonpositive: bool,
}

/// Critical tilt for the first excited-level crossing. Not clamped.
pub fn dv_crit(n: u32, u0: f64, hw: f64) -> DvCrit {
    let (value, branch) = if u0 <= u_max(n, hw) {
        (hw / n as f64, CritBranch::Spacing)
    } else {
        (
            2.0 * u0 * ((1.0 + 2.0 * hw / u0).sqrt() - n as f64),
            CritBranch::Interaction,
        )
    };
    DvCrit {
        value,
        branch,
        nonpositive: value <= 0.0,
    }
}

/// Largest `N` with `N < 1/2 + (hw - J1)/(2 J0)` in the noninteracting limit.
pub fn one_level_max_n(j0: f64, j1: f64, hw: f64) -> Result<u64> {
    if !(j0 > 0.0) {
        return Err(Error::Domain(format!("J0 must be positive, got {j0}")));
    }
    let bound = 0.5 + (hw - j1) / (2.0 * j0);
    if bound <= 0.0 {
        return Ok(0);
    }
    Ok((bound.ceil() - 1.0) as u64)
}

/// Tilt beyond which the `nu`-th cat pair localizes, `2 dE_nu / (N - 2nu)`.
pub fn decoherence_threshold(n: u32, nu: u32, j0: f64, u0: f64) -> Result<LogEnergy> {
    let split = splitting_symmetric(n, nu, j0, u0)?;
    Ok(split.scale(2.0 / (n - 2 * nu) as f64))
}

/// Resonant tilts `2 p U0` for `p = 1..N-1`.
pub fn resonance_positions(n: u32, u0: f64) -> Vec<f64> {
    (1..n).map(|p| 2.0 * p as f64 * u0).collect()
}

/// Half-width of the `p`-th resonance for the extreme pair, `2 dE_0^p / (N - p)`.
pub fn resonance_width_formula(n: u32, p: u32, j0: f64, u0: f64) -> Result<LogEnergy> {
    let split = splitting_resonant(n, p, j0, u0)?;
    Ok(split.scale(2.0 / (n - p) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn log_energy_round_trip() {
        for x in [1.0, -3.5e-200, 7.25e120, 0.3, -1e-12] {
            let y = LogEnergy::from_linear(x).try_linear().unwrap();
            assert!(rel(y, x) < 1e-12, "{x} -> {y}");
        }
        assert_eq!(LogEnergy::from_linear(0.0).to_linear(), 0.0);
        assert!(LogEnergy::from_ln(1, -700.0).try_linear().is_none());
    }

    #[test]
    fn ln_factorial_matches_products() {
        let mut acc = 0.0f64;
        for n in 1..=60u64 {
            acc += (n as f64).ln();
            assert!((ln_factorial(n) - acc).abs() < 1e-10 * acc.max(1.0));
        }
        assert_eq!(ln_factorial(0), 0.0);
    }

    #[test]
    fn symmetric_splitting_examples() {
        // 4 (0.05)^2 6!/4!
        let v = splitting_symmetric(10, 4, 0.1, 1.0).unwrap().to_linear();
        assert!(rel(v, 0.3) < 1e-12);
        let v = splitting_symmetric(2, 0, 0.1, 1.0).unwrap().to_linear();
        assert!(rel(v, 0.02) < 1e-12);
        // the 3x3 exact gap |2 - (1 + sqrt(1.04))| is within the leading-order error
        let exact = (2.0 - (1.0 + 1.04f64.sqrt())).abs();
        assert!(rel(v, exact) < 0.02);
        // reference value from arbitrary-precision evaluation
        let l = splitting_symmetric(100, 0, 0.1, 1.0).unwrap();
        assert!((l.log10 - (-283.470943229786)).abs() < 1e-9, "{}", l.log10);
        assert!(splitting_symmetric(10, 5, 0.1, 1.0).is_err());
    }

    #[test]
    fn resonant_splitting_examples() {
        let v = splitting_resonant(100, 98, 0.1, 1.0).unwrap().to_linear();
        assert!(rel(v, 0.02 * 4950f64.sqrt()) < 1e-10);
        assert!(rel(v, 1.40712472794703) < 1e-10);
        for n in [2u32, 7, 40] {
            let j0 = 0.013;
            let v = splitting_resonant(n, n - 1, j0, 0.7).unwrap().to_linear();
            assert!(rel(v, 2.0 * j0 * (n as f64).sqrt()) < 1e-12);
        }
        let v = splitting_resonant(10, 8, 0.1, 1.0).unwrap().to_linear();
        assert!(rel(v, 0.02 * 45f64.sqrt()) < 1e-12);
        assert!(splitting_resonant(10, 0, 0.1, 1.0).is_err());
        assert!(splitting_resonant(10, 10, 0.1, 1.0).is_err());
    }

    #[test]
    fn critical_interactions() {
        assert!(rel(u_crit(10, 1.0), 2.0 / 99.0) < 1e-15);
        assert!((u_crit(10, 1.0) - 0.02020).abs() < 1e-5);
        assert!(rel(u_crit(100, 36.0), 72.0 / 9999.0) < 1e-15);
        assert!((u_crit(100, 36.0) / 0.072 - 0.10).abs() < 1e-3);
        assert!(rel(u_max(10, 1.0), 2.0 / 99.0 * 11.0 / 40.0) < 1e-15);
        assert!((u_max(10, 1.0) - 0.005556).abs() < 1e-6);
    }

    #[test]
    fn critical_tilt_branches() {
        let a = dv_crit(10, 0.001, 1.0);
        assert_eq!(a.branch, CritBranch::Spacing);
        assert!(rel(a.value, 0.1) < 1e-15);
        let b = dv_crit(10, 0.01, 1.0);
        assert_eq!(b.branch, CritBranch::Interaction);
        assert!(rel(b.value, 0.02 * (201f64.sqrt() - 10.0)) < 1e-12);
        assert!((b.value - 0.0835).abs() < 1e-4);
        let c = dv_crit(10, u_crit(10, 1.0), 1.0);
        assert!(c.value.abs() < 1e-12);
        let d = dv_crit(10, 0.05, 1.0);
        assert!(d.nonpositive && d.value < 0.0);
    }

    #[test]
    fn one_level_bound() {
        let n = one_level_max_n(4e-7, 3e-5, 1.0).unwrap();
        assert_eq!(n, 1_249_962);
        assert_eq!(one_level_max_n(0.5, 0.0, 1.0).unwrap(), 1);
        assert_eq!(one_level_max_n(0.1, 1.0, 1.0).unwrap(), 0);
        assert!(one_level_max_n(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn decoherence_examples() {
        let t = decoherence_threshold(10, 4, 0.1, 1.0).unwrap().to_linear();
        assert!(rel(t, 0.3) < 1e-12);
        for n in [5u32, 9, 31] {
            let nu = (n - 1) / 2;
            let t = decoherence_threshold(n, nu, 0.1, 1.0).unwrap().to_linear();
            let s = splitting_symmetric(n, nu, 0.1, 1.0).unwrap().to_linear();
            assert!(rel(t, 2.0 * s) < 1e-12);
        }
        let t = decoherence_threshold(100, 0, 0.1, 1.0)
            .unwrap()
            .scale(0.072);
        assert!((t.log10 + 288.0).abs() <= 2.0, "{}", t.log10);
    }

    #[test]
    fn resonance_examples() {
        let r = resonance_positions(10, 1.0);
        assert_eq!(r, vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0]);
        let r = resonance_positions(100, 0.072);
        assert_eq!(r.len(), 99);
        assert!((r[97] - 14.112).abs() < 1e-12);
        let w = resonance_width_formula(100, 98, 0.1, 1.0)
            .unwrap()
            .scale(0.072)
            .to_linear();
        assert!((w - 0.1013).abs() < 1e-3);
        let w = resonance_width_formula(9, 8, 0.02, 1.0)
            .unwrap()
            .to_linear();
        assert!(rel(w, 4.0 * 0.02 * 3.0) < 1e-12);
    }
}
