use std::f64::consts::{E, PI};
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::QuadConfig;
use crate::error::{domain, Result};
use crate::quad::{integrate, ln_factorial, sum_probability_series, SeriesTerm};

/// Rate below which Poisson variates are drawn by CDF inversion.
const POISSON_INVERSION_MAX_RATE: f64 = 30.0;

/// A channel output: real-valued for continuous channels, a count for
/// Poisson channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Real(f64),
    Count(u64),
}

impl Outcome {
    pub fn value(&self) -> f64 {
        match *self {
            Outcome::Real(v) => v,
            Outcome::Count(k) => k as f64,
        }
    }
}

impl From<f64> for Outcome {
    fn from(v: f64) -> Self {
        Outcome::Real(v)
    }
}

impl From<u64> for Outcome {
    fn from(k: u64) -> Self {
        Outcome::Count(k)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Real(v) => write!(f, "{v}"),
            Outcome::Count(k) => write!(f, "{k}"),
        }
    }
}

/// Conditional law `P(y|x)` of the channel output given its input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    kind: ChannelKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChannelKind {
    /// `Y = a X + b + N`, `N ~ N(0, σ_N²)`.
    GaussianLinear { gain: f64, bias: f64, noise_var: f64 },
    /// `Y | x ~ Poisson(a x + b)`.
    PoissonLinear { gain: f64, bias: f64 },
}

impl Channel {
    pub fn gaussian(gain: f64, bias: f64, noise_var: f64) -> Result<Self> {
        if !(gain.is_finite() && bias.is_finite()) || !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(domain(format!(
                "Gaussian channel needs finite gain/bias and positive noise variance, got ({gain}, {bias}, {noise_var})"
            )));
        }
        Ok(Self { kind: ChannelKind::GaussianLinear { gain, bias, noise_var } })
    }

    pub fn poisson(gain: f64, bias: f64) -> Result<Self> {
        if !(gain.is_finite() && gain > 0.0) || !(bias.is_finite() && bias >= 0.0) {
            return Err(domain(format!(
                "Poisson channel needs positive gain and non-negative bias, got ({gain}, {bias})"
            )));
        }
        Ok(Self { kind: ChannelKind::PoissonLinear { gain, bias } })
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, ChannelKind::PoissonLinear { .. })
    }

    pub fn gain(&self) -> f64 {
        match self.kind {
            ChannelKind::GaussianLinear { gain, .. } | ChannelKind::PoissonLinear { gain, .. } => gain,
        }
    }

    pub fn bias(&self) -> f64 {
        match self.kind {
            ChannelKind::GaussianLinear { bias, .. } | ChannelKind::PoissonLinear { bias, .. } => bias,
        }
    }

    /// Conditional mean `a x + b`.
    pub fn conditional_mean(&self, x: f64) -> f64 {
        self.gain() * x + self.bias()
    }

    fn checked_rate(&self, x: f64) -> Result<f64> {
        let rate = self.conditional_mean(x);
        if rate > 0.0 && rate.is_finite() {
            Ok(rate)
        } else {
            Err(domain(format!("Poisson rate a x + b = {rate} at x = {x} must be positive")))
        }
    }

    fn count(&self, y: Outcome) -> Result<u64> {
        match y {
            Outcome::Count(k) => Ok(k),
            Outcome::Real(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
            Outcome::Real(v) => Err(domain(format!("Poisson outcome must be a non-negative integer, got {v}"))),
        }
    }

    fn real(&self, y: Outcome) -> Result<f64> {
        match y {
            Outcome::Real(v) if v.is_finite() => Ok(v),
            Outcome::Real(v) => Err(domain(format!("non-finite outcome {v}"))),
            Outcome::Count(k) => Ok(k as f64),
        }
    }

    /// `ln P(y|x)`.
    pub fn ln_pdf(&self, y: Outcome, x: f64) -> Result<f64> {
        match self.kind {
            ChannelKind::GaussianLinear { noise_var, .. } => {
                let y = self.real(y)?;
                let z = y - self.conditional_mean(x);
                Ok(-0.5 * z * z / noise_var - 0.5 * (2.0 * PI * noise_var).ln())
            }
            ChannelKind::PoissonLinear { .. } => {
                let k = self.count(y)?;
                let rate = self.checked_rate(x)?;
                Ok(k as f64 * rate.ln() - rate - ln_factorial(k))
            }
        }
    }

    /// `∂ ln P(y|x) / ∂x`.
    pub fn score(&self, y: Outcome, x: f64) -> Result<f64> {
        match self.kind {
            ChannelKind::GaussianLinear { gain, noise_var, .. } => {
                let y = self.real(y)?;
                Ok(gain * (y - self.conditional_mean(x)) / noise_var)
            }
            ChannelKind::PoissonLinear { gain, .. } => {
                let k = self.count(y)?;
                let rate = self.checked_rate(x)?;
                Ok(gain * k as f64 / rate - gain)
            }
        }
    }

    // Log-likelihood in x for a fixed outcome; -inf where it vanishes.
    pub(crate) fn ln_lik(&self, y: Outcome, x: f64) -> f64 {
        match self.kind {
            ChannelKind::GaussianLinear { noise_var, .. } => {
                let z = y.value() - self.conditional_mean(x);
                -0.5 * z * z / noise_var - 0.5 * (2.0 * PI * noise_var).ln()
            }
            ChannelKind::PoissonLinear { .. } => {
                let k = y.value();
                let rate = self.conditional_mean(x);
                if rate > 0.0 {
                    k * rate.ln() - rate - libm::lgamma(k + 1.0)
                } else if rate == 0.0 && k == 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub(crate) fn d_ln_lik(&self, y: Outcome, x: f64) -> f64 {
        match self.kind {
            ChannelKind::GaussianLinear { gain, noise_var, .. } => {
                gain * (y.value() - self.conditional_mean(x)) / noise_var
            }
            ChannelKind::PoissonLinear { gain, .. } => {
                let k = y.value();
                let rate = self.conditional_mean(x);
                if k == 0.0 {
                    -gain
                } else if rate > 0.0 {
                    gain * k / rate - gain
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub(crate) fn d2_ln_lik(&self, y: Outcome, x: f64) -> f64 {
        match self.kind {
            ChannelKind::GaussianLinear { gain, noise_var, .. } => -gain * gain / noise_var,
            ChannelKind::PoissonLinear { gain, .. } => {
                let k = y.value();
                let rate = self.conditional_mean(x);
                if k == 0.0 {
                    0.0
                } else {
                    -gain * gain * k / (rate * rate)
                }
            }
        }
    }

    /// Closed-form Fisher information: `a²/σ_N²` or `a²/(a x + b)`.
    pub fn fisher_closed_form(&self, x: f64) -> Result<f64> {
        match self.kind {
            ChannelKind::GaussianLinear { gain, noise_var, .. } => Ok(gain * gain / noise_var),
            ChannelKind::PoissonLinear { gain, .. } => Ok(gain * gain / self.checked_rate(x)?),
        }
    }

    /// Support `[a x + b ± H σ_N]` of a Gaussian conditional density.
    pub(crate) fn conditional_support(&self, x: f64, cfg: &QuadConfig) -> Option<(f64, f64)> {
        match self.kind {
            ChannelKind::GaussianLinear { noise_var, .. } => {
                let m = self.conditional_mean(x);
                let h = cfg.support_halfwidth_sigmas * noise_var.sqrt();
                Some((m - h, m + h))
            }
            ChannelKind::PoissonLinear { .. } => None,
        }
    }

    /// `E_{Y|x}[g(Y)]`: quadrature over `a x + b ± H σ_N` for the Gaussian
    /// channel, a mass-truncated series for the Poisson channel.
    pub fn expect_given_x<G>(&self, x: f64, mut g: G, cfg: &QuadConfig) -> Result<f64>
    where
        G: FnMut(Outcome) -> Result<f64>,
    {
        match self.kind {
            ChannelKind::GaussianLinear { .. } => {
                let (lo, hi) = self.conditional_support(x, cfg).expect("continuous channel");
                let mut err = None;
                let v = integrate(
                    |y| {
                        let p = self.ln_lik(Outcome::Real(y), x).exp();
                        match g(Outcome::Real(y)) {
                            Ok(v) => p * v,
                            Err(e) => {
                                err.get_or_insert(e);
                                0.0
                            }
                        }
                    },
                    lo,
                    hi,
                    cfg,
                )?;
                err.map_or(Ok(v), Err)
            }
            ChannelKind::PoissonLinear { .. } => {
                let rate = self.checked_rate(x)?;
                let lr = rate.ln();
                let s = sum_probability_series(
                    |k| {
                        let p = (k as f64 * lr - rate - ln_factorial(k)).exp();
                        let value = if p > 0.0 { p * g(Outcome::Count(k))? } else { 0.0 };
                        Ok(SeriesTerm { value, mass: p })
                    },
                    cfg,
                )?;
                Ok(s.value)
            }
        }
    }

    /// Conditional entropy `h(Y|X = x)` (differential for the Gaussian
    /// channel, discrete for the Poisson channel).
    pub fn conditional_entropy(&self, x: f64, cfg: &QuadConfig) -> Result<f64> {
        self.expect_given_x(x, |y| Ok(-self.ln_pdf(y, x)?), cfg)
    }

    /// Closed-form differential entropy of the Gaussian conditional density.
    pub fn gaussian_conditional_entropy(&self) -> Option<f64> {
        match self.kind {
            ChannelKind::GaussianLinear { noise_var, .. } => Some(0.5 * (2.0 * PI * E * noise_var).ln()),
            ChannelKind::PoissonLinear { .. } => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> Result<Outcome> {
        match self.kind {
            ChannelKind::GaussianLinear { noise_var, .. } => {
                let z: f64 = rng.sample(StandardNormal);
                Ok(Outcome::Real(self.conditional_mean(x) + noise_var.sqrt() * z))
            }
            ChannelKind::PoissonLinear { .. } => Ok(Outcome::Count(sample_poisson(self.checked_rate(x)?, rng))),
        }
    }
}

/// Exact Poisson variate: CDF inversion for small rates, the rejection
/// sampler of `rand_distr` above.
pub fn sample_poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate < POISSON_INVERSION_MAX_RATE {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-rate).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= rate / k as f64;
            cdf += p;
            if p == 0.0 && cdf < u {
                // u fell in the rounding gap at the far tail
                break;
            }
        }
        k
    } else {
        let d = Poisson::new(rate).expect("positive finite rate");
        d.sample(rng) as u64
    }
}
