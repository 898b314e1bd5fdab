use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which sign of the effectiveness indicator triggers storing into memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Store when `Θ ≥ 0`, restore when `Θ < 0`.
    #[default]
    Paper,
    /// Store when `Θ < 0`, restore when `Θ ≥ 0`.
    Inverted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaParams {
    pub population_size: usize,
    pub max_iterations: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub psi_min: f64,
    pub psi_max: f64,
    pub sigma_max: f64,
    /// Observation window of the effectiveness indicator and the stagnation test.
    pub window: usize,
    pub nu_max: f64,
    pub beta_max: f64,
    pub kappa_max: f64,
    /// Stagnation threshold on the best cost.
    pub delta: f64,
    pub memory_capacity: usize,
    /// Default master seed when none is given on the command line.
    pub rng_seed: u64,
    pub memory_trigger_polarity: Polarity,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 100,
            max_iterations: 100,
            rho_min: 0.02,
            rho_max: 0.06,
            psi_min: 0.6,
            psi_max: 0.95,
            sigma_max: 1.0,
            window: 3,
            nu_max: 0.2,
            beta_max: 0.2,
            kappa_max: 0.2,
            delta: 1e-6,
            memory_capacity: 20,
            rng_seed: 1,
            memory_trigger_polarity: Polarity::Paper,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Param(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        prob("rho_min", self.rho_min)?;
        prob("rho_max", self.rho_max)?;
        prob("psi_min", self.psi_min)?;
        prob("psi_max", self.psi_max)?;
        prob("nu_max", self.nu_max)?;
        prob("beta_max", self.beta_max)?;
        prob("kappa_max", self.kappa_max)?;
        if self.rho_min > self.rho_max {
            return Err(Error::Param("rho_min exceeds rho_max".into()));
        }
        if self.psi_min > self.psi_max {
            return Err(Error::Param("psi_min exceeds psi_max".into()));
        }
        if self.population_size < 2 {
            return Err(Error::Param(format!("population_size must be at least 2, got {}", self.population_size)));
        }
        if self.max_iterations < 1 || self.window < 1 {
            return Err(Error::Param("max_iterations and window must be at least 1".into()));
        }
        if !(self.delta > 0.0) || !(self.sigma_max > 0.0) {
            return Err(Error::Param("delta and sigma_max must be positive".into()));
        }
        Ok(())
    }

    /// Same parameters with replacement, storing and restoring switched off.
    pub fn without_memory(&self) -> Self {
        Self { nu_max: 0.0, beta_max: 0.0, kappa_max: 0.0, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        GaParams::default().validate().unwrap();
        let p = GaParams { population_size: 2, max_iterations: 1, ..Default::default() };
        p.validate().unwrap();
    }

    #[test]
    fn bounds_are_enforced() {
        for bad in [
            GaParams { population_size: 1, ..Default::default() },
            GaParams { rho_min: 0.1, rho_max: 0.05, ..Default::default() },
            GaParams { beta_max: 1.5, ..Default::default() },
            GaParams { delta: 0.0, ..Default::default() },
            GaParams { window: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
