use std::sync::Arc;

use crate::error::{config, Result};
use crate::quad::GaussLegendre;

/// Numerical knobs shared by every integral and series in the crate.
///
/// The Gauss–Legendre rule is built once when the node count is set and is
/// shared between clones, so a config can be passed around freely.
#[derive(Debug, Clone)]
pub struct QuadConfig {
    /// Half-width, in standard deviations, of the truncated support used for
    /// Gaussian densities.
    pub support_halfwidth_sigmas: f64,
    /// Probability mass allowed to remain in the tail of a truncated series.
    pub series_tail_mass: f64,
    /// Bracket width at which bisection stops.
    pub root_tol: f64,
    /// Relative step for finite differences.
    pub fd_step_rel: f64,
    rule: Arc<GaussLegendre>,
}

pub const DEFAULT_GAUSS_NODES: usize = 256;

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            support_halfwidth_sigmas: 12.0,
            series_tail_mass: 1e-12,
            root_tol: 1e-9,
            fd_step_rel: 1e-5,
            rule: Arc::new(GaussLegendre::new(DEFAULT_GAUSS_NODES)),
        }
    }
}

impl QuadConfig {
    pub fn with_gauss_nodes(mut self, nodes: usize) -> Self {
        assert!(nodes > 0, "Gauss-Legendre rule needs at least one node");
        if nodes != self.rule.len() {
            self.rule = Arc::new(GaussLegendre::new(nodes));
        }
        self
    }

    pub fn gauss_nodes(&self) -> usize {
        self.rule.len()
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("support_halfwidth_sigmas", self.support_halfwidth_sigmas),
            ("series_tail_mass", self.series_tail_mass),
            ("root_tol", self.root_tol),
            ("fd_step_rel", self.fd_step_rel),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.series_tail_mass >= 1e-6 {
            return Err(config(format!(
                "series_tail_mass must be below 1e-6, got {}",
                self.series_tail_mass
            )));
        }
        Ok(())
    }
}
