//! Numerical tolerances shared by every module.
//!
//! All thresholds live in one [`Tolerances`] record. Library code reads the
//! process-wide record through [`Tolerances::current`], which starts from the
//! defaults below and applies any overrides found in the `SQB_TOLERANCES`
//! environment variable (a comma-separated list of `key=value` pairs, e.g.
//! `SQB_TOLERANCES="hermitian=1e-9,power=1e-4"`).

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Name of the environment variable holding tolerance overrides.
pub const TOLERANCE_ENV: &str = "SQB_TOLERANCES";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-entry deviation `|m - m†|` accepted as Hermitian.
    pub hermitian: f64,
    /// Jacobi stops once the off-diagonal Frobenius norm falls below this
    /// (relative to the Frobenius norm of the input, floored at 1).
    pub jacobi_off_diagonal: f64,
    /// Jacobi sweep budget.
    pub jacobi_max_sweeps: usize,
    /// `‖U U† − I‖_max` accepted by `evolve`.
    pub unitary: f64,
    /// Trace / Hermiticity / positivity slack for density matrices.
    pub density: f64,
    /// Closed-form vs numeric Gibbs state.
    pub gibbs: f64,
    /// Closed-form vs numeric evolved state.
    pub evolved: f64,
    /// Pairwise agreement of the three ergotropy routes.
    pub ergotropy: f64,
    /// Closed-form power vs finite-difference derivative.
    pub power: f64,
    /// Capacity reconciliation.
    pub capacity: f64,
    /// Step of the central finite difference used for power.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            jacobi_off_diagonal: 1e-13,
            jacobi_max_sweeps: 100,
            unitary: 1e-8,
            density: 1e-10,
            gibbs: 1e-10,
            evolved: 1e-9,
            ergotropy: 1e-9,
            power: 1e-5,
            capacity: 1e-10,
            fd_step: 1e-4,
        }
    }
}

impl Tolerances {
    /// The process-wide tolerance set (defaults plus environment overrides).
    pub fn current() -> &'static Tolerances {
        static CURRENT: OnceLock<Tolerances> = OnceLock::new();
        CURRENT.get_or_init(|| {
            let mut tol = Tolerances::default();
            if let Ok(spec) = std::env::var(TOLERANCE_ENV) {
                // Malformed overrides are ignored rather than aborting a run.
                let _ = tol.apply_overrides(&spec);
            }
            tol
        })
    }

    /// Applies `key=value` overrides. Unknown keys or unparsable values are
    /// reported and leave the record untouched for that entry.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<(), String> {
        let mut bad = Vec::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let Some((key, value)) = item.split_once('=') else {
                bad.push(item.to_string());
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            if key == "jacobi_max_sweeps" {
                match value.parse::<usize>() {
                    Ok(v) if v > 0 => self.jacobi_max_sweeps = v,
                    _ => bad.push(item.to_string()),
                }
                continue;
            }
            let parsed = match value.parse::<f64>() {
                Ok(v) if v.is_finite() && v > 0.0 => v,
                _ => {
                    bad.push(item.to_string());
                    continue;
                }
            };
            let slot = match key {
                "hermitian" => &mut self.hermitian,
                "jacobi_off_diagonal" => &mut self.jacobi_off_diagonal,
                "unitary" => &mut self.unitary,
                "density" => &mut self.density,
                "gibbs" => &mut self.gibbs,
                "evolved" => &mut self.evolved,
                "ergotropy" => &mut self.ergotropy,
                "power" => &mut self.power,
                "capacity" => &mut self.capacity,
                "fd_step" => &mut self.fd_step,
                _ => {
                    bad.push(item.to_string());
                    continue;
                }
            };
            *slot = parsed;
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(format!(
                "unrecognised tolerance overrides: {}",
                bad.join(", ")
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let t = Tolerances::default();
        assert_eq!(t.hermitian, 1e-10);
        assert_eq!(t.jacobi_off_diagonal, 1e-13);
        assert_eq!(t.jacobi_max_sweeps, 100);
        assert_eq!(t.evolved, 1e-9);
        assert_eq!(t.power, 1e-5);
        assert_eq!(t.fd_step, 1e-4);
    }

    #[test]
    fn overrides_parse() {
        let mut t = Tolerances::default();
        t.apply_overrides("hermitian=1e-8, power=2e-5,jacobi_max_sweeps=7")
            .unwrap();
        assert_eq!(t.hermitian, 1e-8);
        assert_eq!(t.power, 2e-5);
        assert_eq!(t.jacobi_max_sweeps, 7);
    }

    #[test]
    fn bad_overrides_are_reported_and_skipped() {
        let mut t = Tolerances::default();
        let err = t
            .apply_overrides("bogus=1,gibbs=-3,evolved=1e-7")
            .unwrap_err();
        assert!(err.contains("bogus"));
        assert!(err.contains("gibbs"));
        assert_eq!(t.gibbs, 1e-10);
        assert_eq!(t.evolved, 1e-7);
    }
}
