//! Mutual information, Fisher information and MMSE for parametric channels.
//!
//! The crate evaluates exact and second-order mutual information, Fisher and
//! Chapman–Robbins information, Bayesian MMSE and the MMSE-based bounds on
//! equivocation and MI, for linear Gaussian and Poisson channels and for a
//! correlated Gaussian nuisance model. A seeded Monte Carlo oracle
//! cross-checks the deterministic results.

pub mod bounds;
pub mod channels;
pub mod config;
pub mod error;
pub mod estimate;
pub mod info;
pub mod mc;
pub mod model;
pub mod nuisance;
mod posterior;
pub mod quad;
pub mod report;

pub use config::QuadConfig;
pub use error::{Error, Result};
pub use mc::{McConfig, McEstimate, McModel};
pub use model::{Channel, ChannelKind, DiscreteInput, Outcome, Prior, PriorKind};
pub use nuisance::NuisanceGaussianParams;
pub use report::InfoReport;
