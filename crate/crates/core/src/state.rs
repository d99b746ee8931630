//! Field states: hydrodynamic `(ρ, v)`, wavefunction ψ, and stationary
//! solutions `(ρ_s, E_s)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{integrate, Grid1D};

/// Default tolerance on `|∫ρ dx - 1|` for states that claim to be normalized.
pub const DEFAULT_TOL_NORM: f64 = 1e-6;

/// Probability density and velocity field at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
}

impl HydroState {
    /// Build a state, checking `ρ ≥ 0` and matching field lengths.
    pub fn new(t: f64, rho: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if rho.len() != v.len() {
            return Err(Error::Contract(format!(
                "rho has {} samples, v has {}",
                rho.len(),
                v.len()
            )));
        }
        if let Some(i) = rho.iter().position(|r| !(*r >= 0.0)) {
            return Err(Error::Contract(format!(
                "density must be nonnegative, rho[{i}] = {}",
                rho[i]
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("velocity field must be finite".into()));
        }
        Ok(HydroState { t, rho, v })
    }

    /// Total probability `∫ρ dx`.
    pub fn mass(&self, grid: &Grid1D) -> Result<f64> {
        integrate(&self.rho, grid)
    }

    pub fn is_normalized(&self, grid: &Grid1D, tol: f64) -> Result<bool> {
        Ok((self.mass(grid)? - 1.0).abs() <= tol)
    }

    /// Rescale ρ to unit total probability.
    pub fn normalize(&mut self, grid: &Grid1D) -> Result<()> {
        let m = self.mass(grid)?;
        if !(m > 0.0) {
            return Err(Error::Contract(format!(
                "cannot normalize state with total probability {m}"
            )));
        }
        for r in &mut self.rho {
            *r /= m;
        }
        Ok(())
    }
}

/// Complex wavefunction samples at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub t: f64,
    pub psi: Vec<Complex64>,
}

impl WaveState {
    pub fn new(t: f64, psi: Vec<Complex64>) -> Self {
        WaveState { t, psi }
    }

    /// |ψ|² per node.
    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `∫|ψ|² dx`.
    pub fn norm_sq(&self, grid: &Grid1D) -> Result<f64> {
        integrate(&self.density(), grid)
    }

    pub fn normalize(&mut self, grid: &Grid1D) -> Result<()> {
        let n2 = self.norm_sq(grid)?;
        if !(n2 > 0.0) {
            return Err(Error::DegenerateState(
                "wavefunction has zero norm".into(),
            ));
        }
        let s = 1.0 / n2.sqrt();
        for c in &mut self.psi {
            *c *= s;
        }
        Ok(())
    }
}

/// Stationary solution: density `ρ_s` (velocity identically zero) and the
/// associated energy `E_s` with `U_q(ρ_s) + U = E_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryState {
    pub rho_s: Vec<f64>,
    pub e_s: f64,
}

impl StationaryState {
    pub fn new(rho_s: Vec<f64>, e_s: f64) -> Result<Self> {
        if let Some(i) = rho_s.iter().position(|r| !(*r >= 0.0)) {
            return Err(Error::Contract(format!(
                "stationary density must be nonnegative, rho_s[{i}] = {}",
                rho_s[i]
            )));
        }
        if !e_s.is_finite() {
            return Err(Error::Contract("stationary energy must be finite".into()));
        }
        Ok(StationaryState { rho_s, e_s })
    }

    /// View as a hydrodynamic state at rest.
    pub fn at_rest(&self, t: f64) -> HydroState {
        HydroState {
            t,
            rho: self.rho_s.clone(),
            v: vec![0.0; self.rho_s.len()],
        }
    }
}
