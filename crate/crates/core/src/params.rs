//! Physical parameters and external potential specification.

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// External potential.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// Harmonic well `U(x) = d x² / 2` with stiffness `d > 0`.
    Harmonic { stiffness: f64 },
    /// Uniform force `g`, i.e. `U(x) = -g x`.
    Uniform { force: f64 },
    /// Free motion, `U = 0`.
    Free,
    /// Arbitrary potential sampled on the grid nodes.
    Tabulated(Vec<f64>),
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Harmonic { stiffness } => {
                if !(*stiffness > 0.0) {
                    return Err(Error::Contract(format!(
                        "harmonic potential requires stiffness > 0, got {stiffness}"
                    )));
                }
            }
            PotentialSpec::Uniform { force } => {
                if !force.is_finite() {
                    return Err(Error::Contract("uniform force must be finite".into()));
                }
            }
            PotentialSpec::Free => {}
            PotentialSpec::Tabulated(values) => {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Contract(
                        "tabulated potential contains non-finite values".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Potential energy per node. For `Tabulated` the sample count must
    /// match the grid.
    pub fn values(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        self.validate()?;
        match self {
            PotentialSpec::Harmonic { stiffness } => {
                let d = *stiffness;
                Ok(grid.sample(|x| 0.5 * d * x * x))
            }
            PotentialSpec::Uniform { force } => {
                let g = *force;
                Ok(grid.sample(|x| -g * x))
            }
            PotentialSpec::Free => Ok(vec![0.0; grid.n()]),
            PotentialSpec::Tabulated(values) => {
                grid.check_len(values.len())?;
                Ok(values.clone())
            }
        }
    }
}

/// Physical constants of a run: ħ, the particle mass, the damping
/// coefficient of the friction force `-k v`, and the external potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub hbar: f64,
    pub mass: f64,
    pub damping: f64,
    pub potential: PotentialSpec,
}

impl Params {
    pub fn new(hbar: f64, mass: f64, damping: f64, potential: PotentialSpec) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::Contract(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > 0.0) {
            return Err(Error::Contract(format!("mass must be positive, got {mass}")));
        }
        if !(damping >= 0.0) {
            return Err(Error::Contract(format!(
                "damping must be nonnegative, got {damping}"
            )));
        }
        potential.validate()?;
        Ok(Params {
            hbar,
            mass,
            damping,
            potential,
        })
    }

    /// ħ = m = 1 units with the given damping and potential.
    pub fn dimensionless(damping: f64, potential: PotentialSpec) -> Result<Self> {
        Params::new(1.0, 1.0, damping, potential)
    }

    /// Oscillator angular frequency √(d/m); only defined for harmonic wells.
    pub fn oscillator_frequency(&self) -> Option<f64> {
        match self.potential {
            PotentialSpec::Harmonic { stiffness } => Some((stiffness / self.mass).sqrt()),
            _ => None,
        }
    }
}
