//! Posterior means, MMSE and conditional variances.

use serde::{Deserialize, Serialize};

use crate::channels::PoissonNegExp;
use crate::config::QuadConfig;
use crate::error::Result;
use crate::info::require_compatible;
use crate::model::{Channel, ChannelKind, Outcome, Prior, PriorKind};
use crate::posterior::{expect_over_outputs, expect_over_outputs_given, moments};

/// Posterior mean and variance of the input for one observed output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub y: Outcome,
    pub posterior_mean: f64,
    pub posterior_variance: f64,
}

/// Posterior mean and variance given `y`. Fails with a degenerate-evidence
/// error when `P(y) < 1e-300`.
pub fn posterior_summary(p: &Prior, c: &Channel, y: Outcome, cfg: &QuadConfig) -> Result<PosteriorSummary> {
    let m = moments(p, &[(c, y)], cfg)?.check_evidence()?;
    Ok(PosteriorSummary { y, posterior_mean: m.mean, posterior_variance: m.variance })
}

/// MMSE estimate `E(X | Y = y)`.
pub fn posterior_mean(p: &Prior, c: &Channel, y: Outcome, cfg: &QuadConfig) -> Result<f64> {
    Ok(posterior_summary(p, c, y, cfg)?.posterior_mean)
}

pub fn posterior_variance_profile(
    p: &Prior,
    c: &Channel,
    ys: &[Outcome],
    cfg: &QuadConfig,
) -> Result<Vec<PosteriorSummary>> {
    ys.iter().map(|&y| posterior_summary(p, c, y, cfg)).collect()
}

/// MMSE. The Poisson channel with a negative-exponential prior uses its
/// series; every other pairing uses [`mmse_by_quadrature`].
pub fn mmse(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    if let (PriorKind::NegExp { mean }, ChannelKind::PoissonLinear { gain, bias }) = (p.kind(), c.kind()) {
        return PoissonNegExp::new(*mean, *gain, *bias)?.mmse(cfg);
    }
    mmse_by_quadrature(p, c, cfg)
}

/// `Var(X) − E[(X̂(Y) − X̄)²]`, which equals `E(X²) − E(X̂²)` without
/// subtracting two large second moments.
pub fn mmse_by_quadrature(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    require_compatible(p, c, cfg)?;
    if p.is_point_mass() {
        return Ok(0.0);
    }
    let xbar = p.mean();
    let spread = expect_over_outputs(p, c, cfg, |_, m| Ok((m.mean - xbar) * (m.mean - xbar)))?;
    Ok((p.variance() - spread).max(0.0))
}

/// `E_Y[σ²_{X|Y}]`, the output-averaged posterior variance.
pub fn expected_posterior_variance(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<f64> {
    require_compatible(p, c, cfg)?;
    expect_over_outputs(p, c, cfg, |_, m| Ok(m.variance))
}

/// `(E[X̂(Y)], E[X̂(Y)²])` over the output law.
pub fn estimator_moments(p: &Prior, c: &Channel, cfg: &QuadConfig) -> Result<(f64, f64)> {
    require_compatible(p, c, cfg)?;
    let m1 = expect_over_outputs(p, c, cfg, |_, m| Ok(m.mean))?;
    let m2 = expect_over_outputs(p, c, cfg, |_, m| Ok(m.mean * m.mean))?;
    Ok((m1, m2))
}

/// Node count used by the nested two-measurement integrals.
pub fn reduced_config(cfg: &QuadConfig) -> QuadConfig {
    cfg.clone().with_gauss_nodes((cfg.gauss_nodes() / 4).max(32))
}

/// `(MMSE(Y), MMSE(Y, Z))` for outputs of `c1` and `c2` that are
/// conditionally independent given `X`. Both values come from the same
/// outer grid over `y`, with the node count of [`reduced_config`].
pub fn mmse_two_measurements(p: &Prior, c1: &Channel, c2: &Channel, cfg: &QuadConfig) -> Result<(f64, f64)> {
    require_compatible(p, c1, cfg)?;
    require_compatible(p, c2, cfg)?;
    if p.is_point_mass() {
        return Ok((0.0, 0.0));
    }
    let rc = reduced_config(cfg);
    let xbar = p.mean();
    let var = p.variance();
    let sq = |v: f64| (v - xbar) * (v - xbar);
    let single = expect_over_outputs(p, c1, &rc, |_, m| Ok(sq(m.mean)))?;
    let joint = expect_over_outputs(p, c1, &rc, |y, m1| {
        expect_over_outputs_given(p, &[(c1, y)], Some(m1), c2, &rc, |_, m12| Ok(sq(m12.mean)))
    })?;
    Ok(((var - single).max(0.0), (var - joint).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{gaussian_closed_forms, gaussian_posterior_mean};
    use crate::Error;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn gaussian_posterior_mean_is_precision_weighted() {
        let p = Prior::gaussian(1.0, 2.0).unwrap();
        let c = Channel::gaussian(0.7, 0.2, 0.3).unwrap();
        for y in [-2.0, 0.5, 3.0] {
            let q = posterior_mean(&p, &c, Outcome::Real(y), &cfg()).unwrap();
            assert!((q - gaussian_posterior_mean(1.0, 2.0, 0.7, 0.2, 0.3, y)).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_gain_posterior_is_prior() {
        let p = Prior::neg_exp(2.0).unwrap();
        let c = Channel::gaussian(0.0, 0.0, 1.0).unwrap();
        let s = posterior_summary(&p, &c, Outcome::Real(0.4), &cfg()).unwrap();
        assert!((s.posterior_mean - 2.0).abs() < 1e-10);
        assert!((s.posterior_variance - 4.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_mmse_matches_closed_form() {
        let p = Prior::gaussian(-1.0, 2.0).unwrap();
        let c = Channel::gaussian(1.5, 3.0, 0.5).unwrap();
        let exact = gaussian_closed_forms(2.0, 1.5, 3.0, 0.5).unwrap().mmse;
        assert!((mmse(&p, &c, &cfg()).unwrap() - exact).abs() < 1e-9);
        assert!((expected_posterior_variance(&p, &c, &cfg()).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn poisson_quadrature_agrees_with_series() {
        for b in [0.0, 3.0] {
            let p = Prior::neg_exp(1.0).unwrap();
            let c = Channel::poisson(2.0, b).unwrap();
            let series = mmse(&p, &c, &cfg()).unwrap();
            let quad = mmse_by_quadrature(&p, &c, &cfg()).unwrap();
            assert!((series - quad).abs() < 1e-9, "b={b}: {series} vs {quad}");
        }
    }

    #[test]
    fn degenerate_evidence_is_reported() {
        let p = Prior::gaussian(0.0, 1.0).unwrap();
        let c = Channel::gaussian(1.0, 0.0, 1e-4).unwrap();
        let e = posterior_mean(&p, &c, Outcome::Real(400.0), &cfg());
        assert!(matches!(e, Err(Error::DegenerateEvidence { .. })), "{e:?}");
    }

    #[test]
    fn identical_gaussian_measurements() {
        let p = Prior::gaussian(0.0, 1.5).unwrap();
        let c = Channel::gaussian(0.8, 0.0, 0.6).unwrap();
        let (single, joint) = mmse_two_measurements(&p, &c, &c, &cfg()).unwrap();
        let s = 1.0 / (1.0 / 1.5 + 0.64 / 0.6);
        let j = 1.0 / (1.0 / 1.5 + 2.0 * 0.64 / 0.6);
        assert!((single - s).abs() < 1e-9, "{single} vs {s}");
        assert!((joint - j).abs() < 1e-9, "{joint} vs {j}");
    }
}
