//! Priors, channels and discrete inputs.

mod channel;
mod prior;

pub use channel::{sample_poisson, Channel, ChannelKind, Outcome};
pub use prior::{Prior, PriorKind, TabulatedDensity, NEG_EXP_SUPPORT_MEANS};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Finite set of input atoms with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteInput {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteInput {
    pub fn new(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(domain("discrete input needs equally long, non-empty atoms and probabilities"));
        }
        if atoms.iter().any(|x| !x.is_finite()) || probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(domain("discrete input atoms must be finite and probabilities non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("discrete input probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms, probs })
    }

    pub fn uniform(atoms: Vec<f64>) -> Result<Self> {
        let n = atoms.len().max(1) as f64;
        let probs = vec![1.0 / n; atoms.len()];
        Self::new(atoms, probs)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.probs.iter().copied())
    }
}
