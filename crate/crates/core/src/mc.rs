//! Monte Carlo estimates of MI and MMSE from sampled input/output pairs.
//!
//! Batch `k` draws from its own ChaCha8 stream (`seed`, stream `k`), and
//! batches are merged in index order, so results do not depend on thread
//! scheduling.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::gaussian_posterior_mean;
use crate::config::QuadConfig;
use crate::error::{config, Result};
use crate::model::{Channel, ChannelKind, Outcome, Prior, PriorKind};
use crate::nuisance::{mmse_estimators, NuisanceGaussianParams};
use crate::posterior::{moments, Moments, MIN_EVIDENCE};

pub const DEFAULT_MC_SAMPLES: u64 = 2_000_000;
pub const DEFAULT_MC_BATCHES: u64 = 20;
/// Gauss–Legendre nodes for per-sample posterior quadrature.
pub const DEFAULT_MC_GAUSS_NODES: usize = 64;
/// Fraction of skipped samples above which an estimate carries a warning.
pub const SKIP_WARNING_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub batches: u64,
    pub quad: QuadConfig,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_MC_SAMPLES,
            seed: 0,
            batches: DEFAULT_MC_BATCHES,
            quad: QuadConfig::default().with_gauss_nodes(DEFAULT_MC_GAUSS_NODES),
        }
    }
}

impl McConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: u64) -> Self {
        self.n_samples = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 10_000 {
            return Err(config(format!("n_samples must be at least 10⁴, got {}", self.n_samples)));
        }
        if self.batches < 2 || self.n_samples % self.batches != 0 {
            return Err(config(format!(
                "batches ({}) must be at least 2 and divide n_samples ({})",
                self.batches, self.n_samples
            )));
        }
        self.quad.validate()
    }
}

/// What is sampled.
#[derive(Debug, Clone, PartialEq)]
pub enum McModel {
    /// `X ~ prior`, `Y | X ~ channel`.
    Scalar { prior: Prior, channel: Channel },
    /// The nuisance model with `U` unknown to the estimator (`+` quantities).
    NuisanceMarginal(NuisanceGaussianParams),
    /// The nuisance model with `U` known to the estimator (`−` quantities).
    NuisanceConditional(NuisanceGaussianParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Samples dropped because the evidence underflowed.
    pub skipped: u64,
    /// More than 0.1% of samples were dropped.
    pub warning: bool,
}

impl McEstimate {
    /// `|estimate − value| / stderr`. A zero stderr gives 0 on an exact
    /// match and `+∞` otherwise.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.estimate - value).abs();
        if self.stderr == 0.0 {
            if d == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            d / self.stderr
        }
    }
}

/// MI and MMSE estimated from the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPair {
    pub mi: McEstimate,
    pub mmse: McEstimate,
}

/// Per-sample values `(ln P(y|x) − ln p(y), (X̂(y) − x)²)`, or `None` when the
/// evidence underflows.
trait Sampler: Send + Sync {
    fn draw(&self, rng: &mut ChaCha8Rng, cache: &mut HashMap<u64, Moments>) -> Result<Option<(f64, f64)>>;
}

fn ln_normal(z: f64, var: f64) -> f64 {
    -0.5 * z * z / var - 0.5 * (2.0 * PI * var).ln()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

struct GaussianPair {
    mean: f64,
    var_x: f64,
    a: f64,
    b: f64,
    noise_var: f64,
}

impl Sampler for GaussianPair {
    fn draw(&self, rng: &mut ChaCha8Rng, _: &mut HashMap<u64, Moments>) -> Result<Option<(f64, f64)>> {
        let x = self.mean + self.var_x.sqrt() * normal(rng);
        let y = self.a * x + self.b + self.noise_var.sqrt() * normal(rng);
        let ln_cond = ln_normal(y - self.a * x - self.b, self.noise_var);
        let var_y = self.a * self.a * self.var_x + self.noise_var;
        let ln_marg = ln_normal(y - self.a * self.mean - self.b, var_y);
        let xhat = gaussian_posterior_mean(self.mean, self.var_x, self.a, self.b, self.noise_var, y);
        Ok(Some((ln_cond - ln_marg, (xhat - x) * (xhat - x))))
    }
}

struct Generic {
    prior: Prior,
    channel: Channel,
    quad: QuadConfig,
}

impl Sampler for Generic {
    fn draw(&self, rng: &mut ChaCha8Rng, cache: &mut HashMap<u64, Moments>) -> Result<Option<(f64, f64)>> {
        let x = self.prior.sample(rng);
        let y = self.channel.sample(x, rng)?;
        let m = match y {
            Outcome::Count(k) => match cache.get(&k) {
                Some(m) => *m,
                None => {
                    let m = moments(&self.prior, &[(&self.channel, y)], &self.quad)?;
                    cache.insert(k, m);
                    m
                }
            },
            Outcome::Real(_) => moments(&self.prior, &[(&self.channel, y)], &self.quad)?,
        };
        if m.evidence() < MIN_EVIDENCE {
            return Ok(None);
        }
        let ln_cond = self.channel.ln_pdf(y, x)?;
        Ok(Some((ln_cond - m.ln_evidence, (m.mean - x) * (m.mean - x))))
    }
}

struct Nuisance {
    p: NuisanceGaussianParams,
    conditional: bool,
}

impl Sampler for Nuisance {
    fn draw(&self, rng: &mut ChaCha8Rng, _: &mut HashMap<u64, Moments>) -> Result<Option<(f64, f64)>> {
        let p = &self.p;
        let u = p.u_mean + p.var_u.sqrt() * normal(rng);
        let x = p.alpha * u + p.var_x_given_u.sqrt() * normal(rng);
        let y = p.a * x + p.b * u + p.noise_var.sqrt() * normal(rng);
        let ln_noise = ln_normal(y - p.a * x - p.b * u, p.noise_var);
        let (xhat_u, xhat) = mmse_estimators(p, y, u);
        if self.conditional {
            // ln P(y|x,u) − ln P(y|u); Y | u ~ N((aα + b)u, a²σ_X|U² + σ_N²)
            let g = p.a * p.alpha + p.b;
            let ln_marg = ln_normal(y - g * u, p.a * p.a * p.var_x_given_u + p.noise_var);
            Ok(Some((ln_noise - ln_marg, (xhat_u - x) * (xhat_u - x))))
        } else {
            let ln_cond = ln_normal(y - p.marginal_gain() * x - p.marginal_bias(), p.var_y_given_x());
            let mean_y = (p.a * p.alpha + p.b) * p.u_mean;
            let ln_marg = ln_normal(y - mean_y, p.var_y());
            Ok(Some((ln_cond - ln_marg, (xhat - x) * (xhat - x))))
        }
    }
}

fn sampler(model: &McModel, quad: &QuadConfig) -> Box<dyn Sampler> {
    match model {
        McModel::Scalar { prior, channel } => match (prior.kind(), channel.kind()) {
            (
                PriorKind::Gaussian { mean, variance },
                ChannelKind::GaussianLinear { gain, bias, noise_var },
            ) => Box::new(GaussianPair { mean: *mean, var_x: *variance, a: *gain, b: *bias, noise_var: *noise_var }),
            _ => Box::new(Generic { prior: prior.clone(), channel: channel.clone(), quad: quad.clone() }),
        },
        McModel::NuisanceMarginal(p) => Box::new(Nuisance { p: *p, conditional: false }),
        McModel::NuisanceConditional(p) => Box::new(Nuisance { p: *p, conditional: true }),
    }
}

struct BatchResult {
    mi: f64,
    mmse: f64,
    used: u64,
    skipped: u64,
}

fn run_batch(s: &dyn Sampler, cfg: &McConfig, index: u64) -> Result<BatchResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let mut cache = HashMap::new();
    let n = cfg.n_samples / cfg.batches;
    let (mut mi, mut mmse, mut used, mut skipped) = (0.0, 0.0, 0u64, 0u64);
    for _ in 0..n {
        match s.draw(&mut rng, &mut cache)? {
            Some((i, e)) => {
                mi += i;
                mmse += e;
                used += 1;
            }
            None => skipped += 1,
        }
    }
    let d = used.max(1) as f64;
    Ok(BatchResult { mi: mi / d, mmse: mmse / d, used, skipped })
}

fn summarize(means: &[f64], weights: &[u64], skipped: u64, total: u64) -> McEstimate {
    let w: f64 = weights.iter().sum::<u64>() as f64;
    let estimate = means.iter().zip(weights).map(|(m, &k)| m * k as f64).sum::<f64>() / w;
    let b = means.len() as f64;
    let mean_of_means = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - mean_of_means) * (m - mean_of_means)).sum::<f64>() / (b - 1.0);
    McEstimate {
        estimate,
        stderr: (var / b).sqrt(),
        skipped,
        warning: skipped as f64 > SKIP_WARNING_FRACTION * total as f64,
    }
}

/// MI and MMSE from one set of draws.
pub fn mc_estimates(model: &McModel, cfg: &McConfig) -> Result<McPair> {
    cfg.validate()?;
    let s = sampler(model, &cfg.quad);
    let batches: Vec<BatchResult> =
        (0..cfg.batches).into_par_iter().map(|k| run_batch(s.as_ref(), cfg, k)).collect::<Result<_>>()?;
    let weights: Vec<u64> = batches.iter().map(|b| b.used).collect();
    let skipped = batches.iter().map(|b| b.skipped).sum();
    let mi: Vec<f64> = batches.iter().map(|b| b.mi).collect();
    let mmse: Vec<f64> = batches.iter().map(|b| b.mmse).collect();
    Ok(McPair {
        mi: summarize(&mi, &weights, skipped, cfg.n_samples),
        mmse: summarize(&mmse, &weights, skipped, cfg.n_samples),
    })
}

/// Average of `ln[P(y|x) / p(y)]` over sampled pairs.
pub fn mc_mi(model: &McModel, cfg: &McConfig) -> Result<McEstimate> {
    Ok(mc_estimates(model, cfg)?.mi)
}

/// Average of `(X̂(y) − x)²` over sampled pairs, `X̂` the exact posterior mean.
pub fn mc_mmse(model: &McModel, cfg: &McConfig) -> Result<McEstimate> {
    Ok(mc_estimates(model, cfg)?.mmse)
}
