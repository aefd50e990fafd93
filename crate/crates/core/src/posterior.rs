//! Posterior moments and output-space expectations.
//!
//! Every likelihood used here is log-concave in `x`, and so are the analytic
//! priors, so the posterior has a single mode that bisection on the
//! derivative of the log-posterior finds reliably. Quadrature panels are
//! then placed around that mode on the scale set by the local curvature.

use crate::config::QuadConfig;
use crate::error::{Error, Result};
use crate::model::{Channel, Outcome, Prior, PriorKind};
use crate::quad::{integrate_panels, normalize_breaks, sum_probability_series, CompensatedSum, SeriesTerm};

/// Posterior window half-width in units of the local posterior scale.
const WINDOW_SCALES: f64 = 40.0;
/// Inner panel edge in units of the local posterior scale.
const CORE_SCALES: f64 = 6.0;
/// Smallest evidence accepted by the public estimators.
pub(crate) const MIN_EVIDENCE: f64 = 1e-300;

pub(crate) type Observation<'a> = (&'a Channel, Outcome);

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Moments {
    pub ln_evidence: f64,
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn evidence(&self) -> f64 {
        self.ln_evidence.exp()
    }

    pub fn check_evidence(self) -> Result<Self> {
        let p = self.evidence();
        if p < MIN_EVIDENCE || !p.is_finite() {
            Err(Error::DegenerateEvidence { marginal: p })
        } else {
            Ok(self)
        }
    }
}

fn ln_lik(obs: &[Observation<'_>], x: f64) -> f64 {
    obs.iter().map(|(c, y)| c.ln_lik(*y, x)).sum()
}

fn d_ln_post(prior: &Prior, obs: &[Observation<'_>], x: f64) -> f64 {
    prior.d_ln_density(x) + obs.iter().map(|(c, y)| c.d_ln_lik(*y, x)).sum::<f64>()
}

fn d2_ln_post(prior: &Prior, obs: &[Observation<'_>], x: f64) -> f64 {
    prior.d2_ln_density(x) + obs.iter().map(|(c, y)| c.d2_ln_lik(*y, x)).sum::<f64>()
}

// Mode of a log-concave posterior on [lo, hi].
fn mode(prior: &Prior, obs: &[Observation<'_>], lo: f64, hi: f64) -> f64 {
    if d_ln_post(prior, obs, lo) <= 0.0 {
        return lo;
    }
    if d_ln_post(prior, obs, hi) >= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    let tol = 1e-13 * (hi - lo);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if d_ln_post(prior, obs, m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Quadrature panel edges covering the bulk of the posterior.
fn posterior_breaks(prior: &Prior, obs: &[Observation<'_>], cfg: &QuadConfig) -> Vec<f64> {
    let (lo, hi) = prior.support(cfg);
    let m = mode(prior, obs, lo, hi);
    let slope = d_ln_post(prior, obs, m).abs();
    let curv = (-d2_ln_post(prior, obs, m)).max(0.0);
    let inv = slope.max(curv.sqrt());
    let w = if inv > 0.0 && inv.is_finite() { 1.0 / inv } else { hi - lo };
    let pts = [-WINDOW_SCALES, -CORE_SCALES, 0.0, CORE_SCALES, WINDOW_SCALES]
        .iter()
        .map(|k| m + k * w)
        .collect();
    let (wlo, whi) = (lo.max(m - WINDOW_SCALES * w), hi.min(m + WINDOW_SCALES * w));
    let mut breaks = normalize_breaks(pts, wlo, whi);
    if breaks.len() < 2 {
        breaks = vec![lo, hi];
    }
    breaks
}

/// Evidence, mean and variance of the posterior given the observations.
pub(crate) fn moments(prior: &Prior, obs: &[Observation<'_>], cfg: &QuadConfig) -> Result<Moments> {
    let nodes: Vec<(f64, f64)> = match prior.kind() {
        PriorKind::Tabulated(_) => prior
            .mass_nodes(cfg)
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|(x, w)| (x, w.ln() + ln_lik(obs, x)))
            .collect(),
        _ => {
            let breaks = posterior_breaks(prior, obs, cfg);
            let mut v = Vec::with_capacity(breaks.len() * cfg.gauss_nodes());
            for w in breaks.windows(2) {
                for (x, wt) in cfg.rule().mapped(w[0], w[1]) {
                    v.push((x, wt.ln() + prior.ln_density(x) + ln_lik(obs, x)));
                }
            }
            v
        }
    };
    weighted_moments(&nodes)
}

fn weighted_moments(nodes: &[(f64, f64)]) -> Result<Moments> {
    let peak = nodes.iter().map(|n| n.1).fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Ok(Moments { ln_evidence: f64::NEG_INFINITY, mean: f64::NAN, variance: f64::NAN });
    }
    if !peak.is_finite() {
        return Err(Error::NonFinite { abscissa: f64::NAN, value: peak });
    }
    let mut s = CompensatedSum::new();
    let mut s1 = CompensatedSum::new();
    for &(x, l) in nodes {
        let e = (l - peak).exp();
        s.add(e);
        s1.add(e * x);
    }
    let z = s.value();
    let mean = s1.value() / z;
    let mut s2 = CompensatedSum::new();
    for &(x, l) in nodes {
        let d = x - mean;
        s2.add((l - peak).exp() * d * d);
    }
    Ok(Moments { ln_evidence: peak + z.ln(), mean, variance: (s2.value() / z).max(0.0) })
}

fn output_breaks(prior: &Prior, channel: &Channel, cfg: &QuadConfig) -> Vec<f64> {
    let sd_n = match channel.kind() {
        crate::model::ChannelKind::GaussianLinear { noise_var, .. } => noise_var.sqrt(),
        crate::model::ChannelKind::PoissonLinear { .. } => unreachable!("continuous channels only"),
    };
    let h = cfg.support_halfwidth_sigmas;
    let mut xs = prior.breakpoints(cfg);
    if let PriorKind::Tabulated(t) = prior.kind() {
        if t.grid().len() <= 32 {
            xs = t.grid().to_vec();
        }
    }
    let mapped: Vec<f64> = xs.iter().map(|&x| channel.conditional_mean(x)).collect();
    let mlo = mapped.iter().copied().fold(f64::INFINITY, f64::min);
    let mhi = mapped.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let centre = channel.conditional_mean(prior.mean());
    let a = channel.gain();
    let sd_y = (a * a * prior.variance() + sd_n * sd_n).sqrt();
    let mut pts = Vec::with_capacity(mapped.len() * 3 + 12);
    for &m in &mapped {
        pts.extend([m - CORE_SCALES * sd_n, m, m + CORE_SCALES * sd_n]);
    }
    for k in [1.0, 3.0, 6.0] {
        pts.extend([centre - k * sd_y, centre + k * sd_y]);
    }
    normalize_breaks(pts, mlo - h * sd_n, mhi + h * sd_n)
}

/// `∫ p(y) f(y, posterior(y)) dy` (or the sum over counts) for one channel.
pub(crate) fn expect_over_outputs<F>(prior: &Prior, channel: &Channel, cfg: &QuadConfig, f: F) -> Result<f64>
where
    F: FnMut(Outcome, &Moments) -> Result<f64>,
{
    expect_over_outputs_given(prior, &[], None, channel, cfg, f)
}

/// As [`expect_over_outputs`], but for a further channel conditioned on
/// earlier observations whose posterior is `base`. The weights are then the
/// predictive law `p(z | earlier)` and `f` receives the joint posterior.
pub(crate) fn expect_over_outputs_given<F>(
    prior: &Prior,
    given: &[Observation<'_>],
    base: Option<&Moments>,
    channel: &Channel,
    cfg: &QuadConfig,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(Outcome, &Moments) -> Result<f64>,
{
    let base_ln = base.map_or(0.0, |m| m.ln_evidence);
    let mut obs: Vec<Observation<'_>> = given.to_vec();
    obs.push((channel, Outcome::Count(0)));
    let last = obs.len() - 1;
    let mut err: Option<Error> = None;

    if channel.is_discrete() {
        let s = sum_probability_series(
            |k| {
                obs[last].1 = Outcome::Count(k);
                let m = moments(prior, &obs, cfg)?;
                let p = (m.ln_evidence - base_ln).exp();
                let value = if p > 0.0 { p * f(Outcome::Count(k), &m)? } else { 0.0 };
                Ok(SeriesTerm { value, mass: p })
            },
            cfg,
        )?;
        return Ok(s.value);
    }

    let breaks = match base {
        None => output_breaks(prior, channel, cfg),
        Some(m) => {
            let sd_n = match channel.kind() {
                crate::model::ChannelKind::GaussianLinear { noise_var, .. } => noise_var.sqrt(),
                _ => unreachable!(),
            };
            let a = channel.gain();
            let centre = channel.conditional_mean(m.mean);
            let sd = (a * a * m.variance + sd_n * sd_n).sqrt();
            [-WINDOW_SCALES, -12.0, -CORE_SCALES, CORE_SCALES, 12.0, WINDOW_SCALES]
                .iter()
                .map(|k| centre + k * sd)
                .collect()
        }
    };
    let v = integrate_panels(
        |y| {
            if err.is_some() {
                return 0.0;
            }
            obs[last].1 = Outcome::Real(y);
            match moments(prior, &obs, cfg) {
                Ok(m) => {
                    let p = (m.ln_evidence - base_ln).exp();
                    if p > 0.0 {
                        match f(Outcome::Real(y), &m) {
                            Ok(v) => p * v,
                            Err(e) => {
                                err = Some(e);
                                0.0
                            }
                        }
                    } else {
                        0.0
                    }
                }
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        },
        &breaks,
        cfg,
    )?;
    err.map_or(Ok(v), Err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_posterior_is_conjugate() {
        let cfg = QuadConfig::default();
        let prior = Prior::gaussian(0.5, 2.0).unwrap();
        let ch = Channel::gaussian(1.5, 0.3, 0.7).unwrap();
        for y in [-4.0, 0.0, 2.2, 9.0] {
            let m = moments(&prior, &[(&ch, Outcome::Real(y))], &cfg).unwrap();
            let prec = 1.0 / 2.0 + 1.5 * 1.5 / 0.7;
            let mean = (0.5 / 2.0 + 1.5 * (y - 0.3) / 0.7) / prec;
            assert!((m.mean - mean).abs() < 1e-12, "{} vs {mean}", m.mean);
            assert!((m.variance - 1.0 / prec).abs() < 1e-12);
            // evidence is N(y; a μ + b, a² σ² + σ_N²)
            let v = 1.5 * 1.5 * 2.0 + 0.7;
            let z = y - (1.5 * 0.5 + 0.3);
            let ln_ev = -0.5 * z * z / v - 0.5 * (2.0 * std::f64::consts::PI * v).ln();
            assert!((m.ln_evidence - ln_ev).abs() < 1e-12);
        }
    }

    #[test]
    fn neg_exp_poisson_posterior_is_gamma() {
        // b = 0: posterior ∝ x^y e^{-(a + 1/X̄) x}
        let cfg = QuadConfig::default();
        let prior = Prior::neg_exp(2.0).unwrap();
        let ch = Channel::poisson(3.0, 0.0).unwrap();
        let beta = 3.0 + 0.5;
        for y in [0u64, 1, 5, 200] {
            let m = moments(&prior, &[(&ch, Outcome::Count(y))], &cfg).unwrap();
            let k = y as f64 + 1.0;
            assert!((m.mean / (k / beta) - 1.0).abs() < 1e-12, "y={y}");
            assert!((m.variance / (k / (beta * beta)) - 1.0).abs() < 1e-10, "y={y}");
        }
    }

    #[test]
    fn output_expectation_of_one_is_one() {
        let cfg = QuadConfig::default();
        let prior = Prior::neg_exp(1.0).unwrap();
        let g = Channel::gaussian(2.0, -1.0, 0.5).unwrap();
        let p = Channel::poisson(2.0, 3.0).unwrap();
        for ch in [&g, &p] {
            let total = expect_over_outputs(&prior, ch, &cfg, |_, _| Ok(1.0)).unwrap();
            assert!((total - 1.0).abs() < 1e-10, "{ch:?}: {total}");
        }
    }
}
