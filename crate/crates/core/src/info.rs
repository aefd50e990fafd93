//! Entropy, mutual information, Fisher information and the Chapman–Robbins
//! information.

use serde::{Deserialize, Serialize};

use crate::channels::PoissonNegExp;
use crate::config::QuadConfig;
use crate::error::{config, domain, Error, Result};
use crate::model::{Channel, ChannelKind, DiscreteInput, Outcome, Prior, PriorKind};
use crate::nuisance::NuisanceGaussianParams;
use crate::posterior::expect_over_outputs;
use crate::quad::{integrate_panels, normalize_breaks, sum_probability_series, CompensatedSum, SeriesTerm};

/// Fisher information `J(Y|x)` tabulated on a set of inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiProfile {
    pub xs: Vec<f64>,
    pub j_values: Vec<f64>,
}

impl FiProfile {
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.j_values.iter().copied())
    }
}

/// `h(X) = −∫ P(x) ln P(x) dx`. Closed forms for the analytic priors,
/// trapezoid quadrature on the grid for tables (empty bins contribute 0).
pub fn differential_entropy(p: &Prior, cfg: &QuadConfig) -> Result<f64> {
    if let Some(h) = p.closed_form_entropy() {
        return Ok(h);
    }
    differential_entropy_by_quadrature(p, cfg)
}

/// `−∫ P(x) ln P(x) dx` by quadrature, whatever the prior.
pub fn differential_entropy_by_quadrature(p: &Prior, cfg: &QuadConfig) -> Result<f64> {
    if p.is_point_mass() {
        return Err(domain("a point mass has no differential entropy"));
    }
    p.expect(
        |x| {
            let l = p.ln_density(x);
            Ok(if l == f64::NEG_INFINITY { 0.0 } else { -l })
        },
        cfg,
    )
}

pub(crate) fn require_compatible(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<()> {
    if let ChannelKind::PoissonLinear { .. } = c.kind() {
        let (lo, hi) = p.support(cfg);
        if c.conditional_mean(lo) < 0.0 || c.conditional_mean(hi) < 0.0 {
            return Err(config(format!(
                "Poisson channel needs a non-negative rate over the prior support [{lo}, {hi}]"
            )));
        }
        if matches!(p.kind(), PriorKind::Gaussian { .. }) {
            return Err(config("Poisson channel with a Gaussian prior is not supported"));
        }
    }
    Ok(())
}

fn as_poisson_neg_exp(p: &Prior, c: &Channel) -> Option<PoissonNegExp> {
    match (p.kind(), c.kind()) {
        (PriorKind::NegExp { mean }, ChannelKind::PoissonLinear { gain, bias }) => {
            PoissonNegExp::new(*mean, *gain, *bias).ok()
        }
        _ => None,
    }
}

/// Output entropy `h(Y)` (differential for continuous outputs).
pub fn output_entropy(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    require_compatible(p, c, cfg)?;
    expect_over_outputs(p, c, cfg, |_, m| Ok(-m.ln_evidence))
}

/// Exact MI. The Poisson channel with a negative-exponential prior uses the
/// rate-entropy form; every other pairing uses `h(Y) − E_X h(Y|X)`.
pub fn mutual_information_exact(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    if let Some(m) = as_poisson_neg_exp(p, c) {
        return m.mi(cfg);
    }
    mutual_information_by_quadrature(p, c, cfg)
}

/// `h(Y) − E_X h(Y|X)` by nested quadrature and series.
pub fn mutual_information_by_quadrature(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    require_compatible(p, c, cfg)?;
    if c.gain() == 0.0 || p.is_point_mass() {
        return Ok(0.0);
    }
    let h_y = output_entropy(p, c, cfg)?;
    let h_y_x = match c.gaussian_conditional_entropy() {
        Some(h) => h,
        None => p.expect(|x| c.conditional_entropy(x, cfg), cfg)?,
    };
    Ok(h_y - h_y_x)
}

/// `J(Y|x) = E_{Y|x}[(∂ ln P(y|x)/∂x)²]`, evaluated as an expectation.
pub fn fisher_information(c: &Channel, x: f64, cfg: &QuadConfig) -> Result<f64> {
    if let ChannelKind::PoissonLinear { .. } = c.kind() {
        c.fisher_closed_form(x)?; // rate check
    }
    c.expect_given_x(
        x,
        |y| {
            let s = c.score(y, x)?;
            Ok(s * s)
        },
        cfg,
    )
}

pub fn fi_profile(c: &Channel, xs: &[f64], cfg: &QuadConfig) -> Result<FiProfile> {
    let j_values = xs.iter().map(|&x| fisher_information(c, x, cfg)).collect::<Result<_>>()?;
    Ok(FiProfile { xs: xs.to_vec(), j_values })
}

/// Second-order MI `½ ∫ P(x) (x − X̄)² J(Y|x) dx`.
///
/// Returns `+∞` for a zero-bias Poisson channel whose prior has positive
/// density at the origin: `J = a/x` is then not integrable there.
pub fn mi_second_order(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    require_compatible(p, c, cfg)?;
    if p.is_point_mass() {
        return Ok(0.0);
    }
    let xbar = p.mean();
    if let ChannelKind::PoissonLinear { gain, bias } = *c.kind() {
        let root = -bias / gain;
        let (lo, _) = p.support(cfg);
        if root >= lo && p.ln_density(root) > f64::NEG_INFINITY && (root - xbar).abs() > 0.0 {
            return Ok(f64::INFINITY);
        }
    }
    let v = p.expect(
        |x| {
            let d = x - xbar;
            Ok(d * d * c.fisher_closed_form(x)?)
        },
        cfg,
    )?;
    Ok(0.5 * v)
}

/// Chapman–Robbins information
/// `K(x, x′) = E_{Y|x}[((P(y|x′) − P(y|x)) / P(y|x))²]`.
pub fn chapman_robbins_k(c: &Channel, x: f64, x_prime: f64, cfg: &QuadConfig) -> Result<f64> {
    if x == x_prime {
        return Ok(0.0);
    }
    match *c.kind() {
        ChannelKind::GaussianLinear { noise_var, .. } => {
            let (m, mp) = (c.conditional_mean(x), c.conditional_mean(x_prime));
            let sd = noise_var.sqrt();
            let h = cfg.support_halfwidth_sigmas * sd;
            // P(y|x′)²/P(y|x) peaks at 2m′ − m
            let far = 2.0 * mp - m;
            let (lo, hi) = (m.min(far) - h, m.max(far) + h);
            let pts = [m, mp, far]
                .iter()
                .flat_map(|&c| [c - 6.0 * sd, c, c + 6.0 * sd])
                .chain([lo, hi])
                .collect();
            let breaks = normalize_breaks(pts, lo, hi);
            integrate_panels(
                |y| {
                    let l = c.ln_lik(Outcome::Real(y), x);
                    let lp = c.ln_lik(Outcome::Real(y), x_prime);
                    let r = (lp - l).exp_m1();
                    l.exp() * r * r
                },
                &breaks,
                cfg,
            )
        }
        ChannelKind::PoissonLinear { .. } => {
            let (l, lp) = (c.conditional_mean(x), c.conditional_mean(x_prime));
            if l < 0.0 || lp < 0.0 {
                return Err(domain(format!("Poisson rates {l}, {lp} must be non-negative")));
            }
            if l == 0.0 {
                return if lp == 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::Divergence(format!(
                        "P(y|{x}) vanishes for y > 0 where P(y|{x_prime}) does not"
                    )))
                };
            }
            // Terms p (p′/p − 1)² have the heavier tail of rate λ′²/λ, so the
            // stopping mass is that of the larger rate.
            let tail_rate = l.max(lp).max(lp * lp / l);
            let (ll, llp, lt) = (l.ln(), lp.ln(), tail_rate.ln());
            let s = sum_probability_series(
                |k| {
                    let kf = k as f64;
                    let lf = crate::quad::ln_factorial(k);
                    let lnp = kf * ll - l - lf;
                    let d = kf * (llp - ll) - (lp - l);
                    let r = d.exp_m1();
                    Ok(SeriesTerm { value: lnp.exp() * r * r, mass: (kf * lt - tail_rate - lf).exp() })
                },
                cfg,
            )?;
            Ok(s.value)
        }
    }
}

/// Closed-form Chapman–Robbins information:
/// `exp(a²δ²/σ_N²) − 1` (Gaussian), `exp((λ′ − λ)²/λ) − 1` (Poisson).
pub fn chapman_robbins_k_closed_form(c: &Channel, x: f64, x_prime: f64) -> Result<f64> {
    match *c.kind() {
        ChannelKind::GaussianLinear { gain, noise_var, .. } => {
            let d = gain * (x_prime - x);
            Ok((d * d / noise_var).exp_m1())
        }
        ChannelKind::PoissonLinear { .. } => {
            let (l, lp) = (c.conditional_mean(x), c.conditional_mean(x_prime));
            if l <= 0.0 {
                return chapman_robbins_k(c, x, x_prime, &QuadConfig::default());
            }
            Ok(((lp - l) * (lp - l) / l).exp_m1())
        }
    }
}

/// `½ Σ_i Σ_j p_i p_j K(x_i, x_j)`, an upper bound on the MI of a discrete
/// input to second order.
pub fn mi_upper_bound_discrete(input: &DiscreteInput, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for (xi, pi) in input.iter() {
        for (xj, pj) in input.iter() {
            if pi > 0.0 && pj > 0.0 {
                acc.add(pi * pj * chapman_robbins_k(c, xi, xj, cfg)?);
            }
        }
    }
    Ok(0.5 * acc.value())
}

/// Second-order MI of the two-input channel `Y = aX + bU + N` with
/// independent Gaussian inputs: `½ ∫∫ P(x)P(u) δᵀ J δ`, where `J` is the
/// constant matrix `[a², ab; ab, b²]/σ_N²`, by a product rule.
pub fn mi_second_order_mimo(p: &NuisanceGaussianParams, cfg: &QuadConfig) -> Result<f64> {
    if p.alpha != 0.0 {
        return Err(domain("the two-input second-order MI needs independent inputs (α = 0)"));
    }
    let px = Prior::gaussian(0.0, p.var_x()).or_else(|_| Prior::point_mass(0.0))?;
    let pu = Prior::gaussian(p.u_mean, p.var_u)?;
    let (a, b, n) = (p.a, p.b, p.noise_var);
    let ubar = p.u_mean;
    let v = px.expect(
        |dx| {
            pu.expect(
                |u| {
                    let du = u - ubar;
                    Ok((a * a * dx * dx + 2.0 * a * b * dx * du + b * b * du * du) / n)
                },
                cfg,
            )
        },
        cfg,
    )?;
    Ok(0.5 * v)
}
