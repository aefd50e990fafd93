use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::QuadConfig;
use crate::error::{domain, Result};
use crate::quad::{
    integrate_panels, normalize_breaks, panel_nodes, trapezoid_weights, CompensatedSum, GaussLegendre,
};

/// Multiple of the mean at which the negative-exponential prior is truncated.
pub const NEG_EXP_SUPPORT_MEANS: f64 = 60.0;

// Panel edges, in units of the mean, for integrals over the negative-exponential
// prior. The geometric cluster near zero resolves integrands such as x ln x.
const NEG_EXP_BREAKS: [f64; 11] = [0.0, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 1.0, 4.0, 12.0, 30.0, 60.0];

const MIN_SEGMENT_NODES: usize = 4;

/// One-dimensional prior density of the channel input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    kind: PriorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PriorKind {
    Gaussian { mean: f64, variance: f64 },
    NegExp { mean: f64 },
    Tabulated(TabulatedDensity),
}

/// Piecewise-linear density on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
    weights: Vec<f64>,
}

impl TabulatedDensity {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Gauss–Legendre nodes `(x, w P(x))` with `per_segment` points on every
    /// grid segment, so smooth integrands see the interpolated density rather
    /// than its values at the grid points alone.
    fn segment_nodes(&self, per_segment: usize) -> Vec<(f64, f64)> {
        let (g, p) = (&self.grid, &self.density);
        if g.len() == 1 {
            return vec![(g[0], 1.0)];
        }
        let rule = GaussLegendre::new(per_segment);
        let mut out = Vec::with_capacity(per_segment * (g.len() - 1));
        for i in 0..g.len() - 1 {
            if p[i] == 0.0 && p[i + 1] == 0.0 {
                continue;
            }
            let h = g[i + 1] - g[i];
            out.extend(rule.mapped(g[i], g[i + 1]).map(|(x, w)| {
                let t = (x - g[i]) / h;
                (x, w * (p[i] + t * (p[i + 1] - p[i])))
            }));
        }
        out
    }

    // ∫ f P over the piecewise-linear density; exact when f is quadratic.
    fn integrate_quadratic(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (g, p) = (&self.grid, &self.density);
        if g.len() == 1 {
            return f(g[0]);
        }
        let off = 0.5 / 3f64.sqrt();
        let mut acc = CompensatedSum::new();
        for i in 0..g.len() - 1 {
            let h = g[i + 1] - g[i];
            for t in [0.5 - off, 0.5 + off] {
                let x = g[i] + t * h;
                acc.add(0.5 * h * (p[i] + t * (p[i + 1] - p[i])) * f(x));
            }
        }
        acc.value()
    }

    fn nodes_per_segment(&self, cfg: &QuadConfig) -> usize {
        let segments = self.grid.len().saturating_sub(1).max(1);
        (cfg.gauss_nodes() / segments).clamp(MIN_SEGMENT_NODES, cfg.gauss_nodes().max(MIN_SEGMENT_NODES))
    }

    fn interpolate(&self, x: f64) -> Result<f64> {
        let g = &self.grid;
        let (lo, hi) = (g[0], g[g.len() - 1]);
        if !(x >= lo && x <= hi) {
            return Err(domain(format!("tabulated prior queried at {x}, outside [{lo}, {hi}]")));
        }
        if g.len() == 1 {
            return Ok(self.density[0]);
        }
        let i = g.partition_point(|&v| v <= x).clamp(1, g.len() - 1);
        let t = (x - g[i - 1]) / (g[i] - g[i - 1]);
        Ok(self.density[i - 1] + t * (self.density[i] - self.density[i - 1]))
    }
}

impl Prior {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !(variance.is_finite() && variance > 0.0) {
            return Err(domain(format!(
                "Gaussian prior needs finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(Self { kind: PriorKind::Gaussian { mean, variance } })
    }

    pub fn neg_exp(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(domain(format!("negative-exponential prior needs a positive mean, got {mean}")));
        }
        Ok(Self { kind: PriorKind::NegExp { mean } })
    }

    /// A tabulated density. The trapezoid integral must equal one within 1e-9.
    pub fn tabulated(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != density.len() {
            return Err(domain("tabulated prior needs equally long, non-empty grid and density"));
        }
        if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("tabulated grid must be finite and strictly increasing"));
        }
        if density.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(domain("tabulated density must be finite and non-negative"));
        }
        let weights = trapezoid_weights(&grid);
        let total: f64 = weights.iter().zip(&density).map(|(w, p)| w * p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain(format!("tabulated density integrates to {total}, not 1")));
        }
        Ok(Self { kind: PriorKind::Tabulated(TabulatedDensity { grid, density, weights }) })
    }

    /// Degenerate prior concentrated at `x`.
    pub fn point_mass(x: f64) -> Result<Self> {
        Self::tabulated(vec![x], vec![1.0])
    }

    pub fn kind(&self) -> &PriorKind {
        &self.kind
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(&self.kind, PriorKind::Tabulated(t) if t.grid.len() == 1)
    }

    /// `P(x)`, zero outside the support of the analytic priors.
    pub fn density(&self, x: f64) -> Result<f64> {
        match &self.kind {
            PriorKind::Gaussian { mean, variance } => {
                let z = x - mean;
                Ok((-0.5 * z * z / variance).exp() / (2.0 * PI * variance).sqrt())
            }
            PriorKind::NegExp { mean } => Ok(if x < 0.0 { 0.0 } else { (-x / mean).exp() / mean }),
            PriorKind::Tabulated(t) => t.interpolate(x),
        }
    }

    /// `ln P(x)`; `-∞` where the density vanishes or outside the support.
    pub fn ln_density(&self, x: f64) -> f64 {
        match &self.kind {
            PriorKind::Gaussian { mean, variance } => {
                let z = x - mean;
                -0.5 * z * z / variance - 0.5 * (2.0 * PI * variance).ln()
            }
            PriorKind::NegExp { mean } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -x / mean - mean.ln()
                }
            }
            PriorKind::Tabulated(t) => t.interpolate(x).map_or(f64::NEG_INFINITY, f64::ln),
        }
    }

    pub(crate) fn d_ln_density(&self, x: f64) -> f64 {
        match &self.kind {
            PriorKind::Gaussian { mean, variance } => -(x - mean) / variance,
            PriorKind::NegExp { mean } => -1.0 / mean,
            PriorKind::Tabulated(_) => 0.0,
        }
    }

    pub(crate) fn d2_ln_density(&self, _x: f64) -> f64 {
        match &self.kind {
            PriorKind::Gaussian { variance, .. } => -1.0 / variance,
            _ => 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            PriorKind::Gaussian { mean, .. } | PriorKind::NegExp { mean } => *mean,
            PriorKind::Tabulated(t) => t.integrate_quadratic(|x| x),
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.kind {
            PriorKind::Gaussian { variance, .. } => *variance,
            PriorKind::NegExp { mean } => mean * mean,
            PriorKind::Tabulated(t) => {
                let mu = self.mean();
                t.integrate_quadratic(|x| (x - mu) * (x - mu)).max(0.0)
            }
        }
    }

    pub fn second_moment(&self) -> f64 {
        let m = self.mean();
        self.variance() + m * m
    }

    /// Support used for quadrature: `mean ± H σ` for the Gaussian,
    /// `[0, 60 X̄]` for the negative exponential, the grid for tables.
    pub fn support(&self, cfg: &QuadConfig) -> (f64, f64) {
        match &self.kind {
            PriorKind::Gaussian { mean, variance } => {
                let h = cfg.support_halfwidth_sigmas * variance.sqrt();
                (mean - h, mean + h)
            }
            PriorKind::NegExp { mean } => (0.0, NEG_EXP_SUPPORT_MEANS * mean),
            PriorKind::Tabulated(t) => (t.grid[0], t.grid[t.grid.len() - 1]),
        }
    }

    /// Panel edges over the support.
    pub fn breakpoints(&self, cfg: &QuadConfig) -> Vec<f64> {
        let (lo, hi) = self.support(cfg);
        match &self.kind {
            PriorKind::NegExp { mean } => {
                normalize_breaks(NEG_EXP_BREAKS.iter().map(|b| b * mean).collect(), lo, hi)
            }
            _ => vec![lo, hi],
        }
    }

    /// Quadrature nodes `(x, w P(x))` representing the prior.
    pub fn mass_nodes(&self, cfg: &QuadConfig) -> Vec<(f64, f64)> {
        match &self.kind {
            PriorKind::Tabulated(t) => t.segment_nodes(t.nodes_per_segment(cfg)),
            _ => panel_nodes(&self.breakpoints(cfg), cfg)
                .into_iter()
                .map(|(x, w)| (x, w * self.ln_density(x).exp()))
                .collect(),
        }
    }

    /// `∫ P(x) f(x) dx` by Gauss–Legendre, on the truncated support for
    /// analytic priors and segment by segment for tabulated ones.
    pub fn expect<F>(&self, mut f: F, cfg: &QuadConfig) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        match &self.kind {
            PriorKind::Tabulated(t) => {
                let mut acc = CompensatedSum::new();
                for (x, w) in t.segment_nodes(t.nodes_per_segment(cfg)) {
                    if w > 0.0 {
                        acc.add(w * f(x)?);
                    }
                }
                Ok(acc.value())
            }
            _ => {
                let mut err = None;
                let v = integrate_panels(
                    |x| {
                        let p = self.ln_density(x).exp();
                        match f(x) {
                            Ok(v) => p * v,
                            Err(e) => {
                                err.get_or_insert(e);
                                0.0
                            }
                        }
                    },
                    &self.breakpoints(cfg),
                    cfg,
                )?;
                match err {
                    Some(e) => Err(e),
                    None => Ok(v),
                }
            }
        }
    }

    /// Closed-form differential entropy where one exists.
    pub fn closed_form_entropy(&self) -> Option<f64> {
        match &self.kind {
            PriorKind::Gaussian { variance, .. } => {
                Some(0.5 * (2.0 * PI * std::f64::consts::E * variance).ln())
            }
            PriorKind::NegExp { mean } => Some(1.0 + mean.ln()),
            PriorKind::Tabulated(_) => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            PriorKind::Gaussian { mean, variance } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + variance.sqrt() * z
            }
            PriorKind::NegExp { mean } => {
                let u: f64 = rng.random();
                -mean * (-u).ln_1p()
            }
            PriorKind::Tabulated(t) => sample_piecewise_linear(t, rng.random()),
        }
    }
}

// Inverse CDF of a piecewise-linear density.
fn sample_piecewise_linear(t: &TabulatedDensity, u: f64) -> f64 {
    let g = &t.grid;
    if g.len() == 1 {
        return g[0];
    }
    let p = &t.density;
    let mut acc = 0.0;
    let total: f64 = t.weights.iter().zip(p).map(|(w, d)| w * d).sum();
    let target = u * total;
    for i in 0..g.len() - 1 {
        let h = g[i + 1] - g[i];
        let mass = 0.5 * h * (p[i] + p[i + 1]);
        if acc + mass >= target && mass > 0.0 {
            // solve p_i s + (p_{i+1} - p_i) s² / (2h) = r for s in [0, h]
            let r = target - acc;
            let slope = (p[i + 1] - p[i]) / h;
            let s = if slope.abs() < 1e-300 {
                r / p[i]
            } else {
                let disc = (p[i] * p[i] + 2.0 * slope * r).max(0.0);
                2.0 * r / (p[i] + disc.sqrt())
            };
            return g[i] + s.clamp(0.0, h);
        }
        acc += mass;
    }
    g[g.len() - 1]
}
