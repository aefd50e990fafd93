//! MMSE-based bounds on equivocation and mutual information.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::config::QuadConfig;
use crate::error::{domain, Result};
use crate::estimate::mmse;
use crate::info::{differential_entropy, mutual_information_by_quadrature};
use crate::model::{Channel, Prior};
use crate::quad::find_root_bisect;

/// `½ ln(2πe·MMSE)`; `−∞` when the MMSE vanishes.
pub fn gaussian_entropy_of_mmse(mmse: f64) -> f64 {
    if mmse <= 0.0 {
        f64::NEG_INFINITY
    } else {
        0.5 * (2.0 * PI * E * mmse).ln()
    }
}

/// Upper bound `½ ln(2πe·MMSE)` on the equivocation `h(X|Y)`.
pub fn equivocation_upper_bound(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    Ok(gaussian_entropy_of_mmse(mmse(p, c, cfg)?))
}

/// Lower bound `h(X) − ½ ln(2πe·MMSE)` on the MI. It may be negative, and is
/// `+∞` for a deterministic channel (MMSE = 0).
pub fn mi_lower_bound(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    mi_lower_bound_from(differential_entropy(p, cfg)?, mmse(p, c, cfg)?)
}

pub fn mi_lower_bound_from(h_x: f64, mmse: f64) -> Result<f64> {
    if mmse < 0.0 || mmse.is_nan() {
        return Err(domain(format!("MMSE must be non-negative, got {mmse}")));
    }
    Ok(h_x - gaussian_entropy_of_mmse(mmse))
}

/// Lower bound for the zero-bias Poisson channel with a negative-exponential
/// prior, as a function of `s = aX̄` alone: `½[1 − ln(2π / (1 + s))]`.
pub fn zero_bias_poisson_bound(a_xbar: f64) -> f64 {
    0.5 * (1.0 - (2.0 * PI / (1.0 + a_xbar)).ln())
}

/// Signal level `aX̄` at which the zero-bias Poisson bound crosses zero;
/// analytically `2π/e − 1`.
pub fn bound_threshold_zero_bias(cfg: &QuadConfig) -> Result<f64> {
    find_root_bisect(zero_bias_poisson_bound, 0.5, 5.0, cfg)
}

/// Central difference of `I(SNR)` against `MMSE / (2σ_X²)` for a Gaussian
/// prior and channel, both sides by quadrature. The SNR is varied through
/// the gain.
pub fn gaussian_mi_snr_derivative_check(var_x: f64, a: f64, noise_var: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    if !(var_x > 0.0 && a > 0.0 && noise_var > 0.0) {
        return Err(domain(format!("derivative check needs positive σ_X², a, σ_N², got ({var_x}, {a}, {noise_var})")));
    }
    let prior = Prior::gaussian(0.0, var_x)?;
    let snr = a * a * var_x / noise_var;
    let mi_at = |s: f64| -> Result<f64> {
        let gain = (s * noise_var / var_x).sqrt();
        mutual_information_by_quadrature(&prior, &Channel::gaussian(gain, 0.0, noise_var)?, cfg)
    };
    let h = cfg.fd_step_rel * snr;
    let derivative = (mi_at(snr + h)? - mi_at(snr - h)?) / (2.0 * h);
    let rhs = mmse(&prior, &Channel::gaussian(a, 0.0, noise_var)?, cfg)? / (2.0 * var_x);
    Ok((derivative, rhs))
}

/// One component `y = a x + n` of a parallel Gaussian channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub var_x: f64,
    pub gain: f64,
    pub noise_var: f64,
}

/// Two independent Gaussian inputs observed through separate channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelGaussian {
    pub components: [GaussianComponent; 2],
}

impl ParallelGaussian {
    pub fn new(components: [GaussianComponent; 2]) -> Result<Self> {
        for c in &components {
            if !(c.var_x > 0.0 && c.noise_var > 0.0 && c.gain.is_finite()) {
                return Err(domain(format!("invalid component {c:?}")));
            }
        }
        Ok(Self { components })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MimoBound {
    /// `h(X) − (N/2) ln(2πe·MMSE_avg)`.
    pub bound: f64,
    /// Sum of the per-component MIs.
    pub exact_mi: f64,
    /// `(1/N) E[Tr C_{X|Y}]`.
    pub mmse_avg: f64,
}

/// Vector MI lower bound with the component-averaged MMSE.
pub fn mimo_mi_lower_bound(model: &ParallelGaussian, cfg: &QuadConfig) -> Result<MimoBound> {
    let n = model.components.len() as f64;
    let mut h_x = 0.0;
    let mut exact_mi = 0.0;
    let mut trace = 0.0;
    for c in &model.components {
        let prior = Prior::gaussian(0.0, c.var_x)?;
        let ch = Channel::gaussian(c.gain, 0.0, c.noise_var)?;
        h_x += differential_entropy(&prior, cfg)?;
        exact_mi += mutual_information_by_quadrature(&prior, &ch, cfg)?;
        trace += mmse(&prior, &ch, cfg)?;
    }
    let mmse_avg = trace / n;
    Ok(MimoBound { bound: h_x - n * gaussian_entropy_of_mmse(mmse_avg), exact_mi, mmse_avg })
}
