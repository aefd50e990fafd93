//! Closed forms for the linear Gaussian channel and the Poisson channel with
//! a negative-exponential prior.

use serde::{Deserialize, Serialize};

use crate::config::QuadConfig;
use crate::error::{domain, Error, Result};
use crate::model::Prior;
use crate::quad::{
    ln_factorial, ln_upper_incomplete_gamma, log_add_exp, sum_probability_series, SeriesTerm,
};

/// Reference values for `Y = a X + b + N` with Gaussian `X` and `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianClosedForms {
    pub mi: f64,
    pub mmse: f64,
    pub fi: f64,
    pub snr: f64,
}

pub fn gaussian_closed_forms(var_x: f64, a: f64, b: f64, noise_var: f64) -> Result<GaussianClosedForms> {
    if !(var_x > 0.0 && noise_var > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(domain(format!(
            "Gaussian closed forms need positive variances and finite gain/bias, got σ_X²={var_x}, a={a}, b={b}, σ_N²={noise_var}"
        )));
    }
    let fi = a * a / noise_var;
    let snr = fi * var_x;
    Ok(GaussianClosedForms { mi: 0.5 * snr.ln_1p(), mmse: var_x / (1.0 + snr), fi, snr })
}

/// Posterior mean for a Gaussian prior `N(μ, σ_X²)` seen through
/// `Y = a X + b + N`: the precision-weighted blend of prior and data.
pub fn gaussian_posterior_mean(prior_mean: f64, var_x: f64, a: f64, b: f64, noise_var: f64, y: f64) -> f64 {
    (prior_mean / var_x + a * (y - b) / noise_var) / (1.0 / var_x + a * a / noise_var)
}

/// Parameters of the Poisson channel `Y | x ~ Poisson(a x + b)` with a
/// negative-exponential prior of mean `X̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonNegExp {
    pub xbar: f64,
    pub a: f64,
    pub b: f64,
}

impl PoissonNegExp {
    pub fn new(xbar: f64, a: f64, b: f64) -> Result<Self> {
        if !(xbar.is_finite() && xbar > 0.0) || !(a.is_finite() && a > 0.0) || !(b.is_finite() && b >= 0.0) {
            return Err(domain(format!(
                "Poisson/negative-exponential model needs X̄ > 0, a > 0, b ≥ 0, got ({xbar}, {a}, {b})"
            )));
        }
        Ok(Self { xbar, a, b })
    }

    /// Signal level `a X̄`.
    pub fn signal(&self) -> f64 {
        self.a * self.xbar
    }

    /// Geometric ratio `α = a X̄ / (a X̄ + 1)`.
    pub fn alpha(&self) -> f64 {
        let s = self.signal();
        s / (s + 1.0)
    }

    /// Argument `u = b (a X̄ + 1) / (a X̄)` of the incomplete gamma function.
    pub fn gamma_argument(&self) -> f64 {
        self.b * (1.0 + 1.0 / self.signal())
    }

    pub fn prior(&self) -> Prior {
        Prior::neg_exp(self.xbar).expect("validated mean")
    }

    /// `ln p(y)` through the incomplete gamma function, with the
    /// `exp(b / a X̄)` factor folded into the logarithm.
    pub fn ln_marginal(&self, y: u64) -> Result<f64> {
        let s = self.signal();
        let ln_geo = y as f64 * (s.ln() - s.ln_1p()) - s.ln_1p();
        if self.b == 0.0 {
            return Ok(ln_geo);
        }
        let u = self.gamma_argument();
        let ln_g = ln_upper_incomplete_gamma(y as f64 + 1.0, u)?;
        Ok(ln_geo + self.b / s + ln_g - ln_factorial(y))
    }

    pub fn marginal(&self, y: u64) -> Result<f64> {
        Ok(self.ln_marginal(y)?.exp())
    }

    /// `ln p(0), ln p(1), …` computed incrementally. The factor
    /// `exp(b/aX̄) Γ(y+1, u) / y!` equals `Σ_{k≤y} e^{-b} u^k / k!`, which is
    /// accumulated term by term with log-add-exp; no large exponents cancel.
    pub fn ln_marginals(&self) -> LnMarginals {
        let s = self.signal();
        let u = self.gamma_argument();
        LnMarginals {
            ln_ratio: s.ln() - s.ln_1p(),
            ln_first: -s.ln_1p(),
            b: self.b,
            ln_u: if u > 0.0 { u.ln() } else { f64::NEG_INFINITY },
            ln_cdf: f64::NEG_INFINITY,
            y: 0,
        }
    }

    /// Posterior mean `X̂(y) = [(y+1) p(y+1)/p(y) − b] / a`.
    pub fn posterior_mean(&self, y: u64) -> Result<f64> {
        let r = (y as f64 + 1.0) * (self.ln_marginal(y + 1)? - self.ln_marginal(y)?).exp();
        Ok((r - self.b) / self.a)
    }

    /// MMSE from the series
    /// `2X̄² + 2(b/a)X̄ + b²/a² − a⁻² Σ_y (y+1)² p(y+1)² / p(y)`.
    pub fn mmse_series(&self, cfg: &QuadConfig) -> Result<f64> {
        let mut seq = self.ln_marginals();
        let mut ln_next = seq.next().expect("infinite sequence");
        let s = sum_probability_series(
            |y| {
                let ln_p = ln_next;
                ln_next = seq.next().expect("infinite sequence");
                let k = y as f64 + 1.0;
                let t = (2.0 * ln_next - ln_p + 2.0 * k.ln()).exp();
                Ok(SeriesTerm { value: t, mass: ln_p.exp() })
            },
            cfg,
        )?;
        let (a, b, xbar) = (self.a, self.b, self.xbar);
        let c = b / a;
        let second = 2.0 * xbar * xbar + 2.0 * c * xbar + c * c;
        Ok((second - s.value / (a * a)).max(0.0))
    }

    /// Closed form `X̄² / (1 + a X̄)`, valid for `b = 0`.
    pub fn mmse_zero_bias(&self) -> f64 {
        self.xbar * self.xbar / (1.0 + self.signal())
    }

    /// MMSE: the series, cross-checked against the closed form when `b = 0`.
    pub fn mmse(&self, cfg: &QuadConfig) -> Result<f64> {
        let series = self.mmse_series(cfg)?;
        if self.b == 0.0 {
            let exact = self.mmse_zero_bias();
            if (series - exact).abs() > 1e-8 * exact {
                return Err(Error::Inconsistent(format!(
                    "zero-bias Poisson MMSE series {series} disagrees with closed form {exact}"
                )));
            }
            return Ok(exact);
        }
        Ok(series)
    }

    /// `∫ P(x) λ(x) [ln λ(x) − 1] dx` with `λ = a x + b`.
    pub fn rate_entropy_term(&self, cfg: &QuadConfig) -> Result<f64> {
        let (a, b) = (self.a, self.b);
        self.prior().expect(
            |x| {
                let l = a * x + b;
                Ok(if l > 0.0 { l * (l.ln() - 1.0) } else { 0.0 })
            },
            cfg,
        )
    }

    /// Exact MI: `∫ P(x) λ(ln λ − 1) dx − Σ_y p(y) ln[p(y) y!]`.
    pub fn mi(&self, cfg: &QuadConfig) -> Result<f64> {
        let first = self.rate_entropy_term(cfg)?;
        let mut seq = self.ln_marginals();
        let s = sum_probability_series(
            |y| {
                let ln_p = seq.next().expect("infinite sequence");
                let p = ln_p.exp();
                let value = if p > 0.0 { p * (ln_p + ln_factorial(y)) } else { 0.0 };
                Ok(SeriesTerm { value, mass: p })
            },
            cfg,
        )?;
        Ok(first - s.value)
    }
}

/// Iterator over `ln p(y)`, `y = 0, 1, 2, …`.
#[derive(Debug, Clone)]
pub struct LnMarginals {
    ln_ratio: f64,
    ln_first: f64,
    b: f64,
    ln_u: f64,
    ln_cdf: f64,
    y: u64,
}

impl Iterator for LnMarginals {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let y = self.y;
        if self.b > 0.0 {
            let term = -self.b + y as f64 * self.ln_u - ln_factorial(y);
            self.ln_cdf = log_add_exp(self.ln_cdf, term);
        } else {
            self.ln_cdf = 0.0;
        }
        self.y += 1;
        Some(self.ln_first + y as f64 * self.ln_ratio + self.ln_cdf)
    }
}

pub fn poisson_marginal(xbar: f64, a: f64, b: f64, y: u64) -> Result<f64> {
    PoissonNegExp::new(xbar, a, b)?.marginal(y)
}

pub fn poisson_mmse(xbar: f64, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    PoissonNegExp::new(xbar, a, b)?.mmse(cfg)
}

pub fn poisson_mi(xbar: f64, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    PoissonNegExp::new(xbar, a, b)?.mi(cfg)
}
