mod common;

use infobound_core::channels::{gaussian_closed_forms, poisson_mmse, PoissonNegExp};
use infobound_core::estimate::{
    estimator_moments, expected_posterior_variance, mmse, mmse_by_quadrature, mmse_two_measurements, posterior_mean,
    posterior_variance_profile,
};
use infobound_core::{Channel, Error, Outcome, Prior, QuadConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

#[test]
fn zero_bias_series_matches_closed_form() {
    let c = cfg();
    for xbar in [0.5, 1.0, 5.0] {
        for s in [0.1, 1.0, 10.0, 100.0] {
            let m = PoissonNegExp::new(xbar, s / xbar, 0.0).unwrap();
            let series = m.mmse_series(&c).unwrap();
            let closed = xbar * xbar / (1.0 + s);
            assert!(common::rel_err(series, closed) < 1e-8, "X̄={xbar} aX̄={s}: {series} vs {closed}");
        }
    }
}

#[test]
fn poisson_mmse_matches_generic_quadrature() {
    let c = cfg();
    for (a, b) in [(1.0, 2.0), (10.0, 50.0), (0.5, 0.0)] {
        let p = Prior::neg_exp(1.0).unwrap();
        let series = poisson_mmse(1.0, a, b, &c).unwrap();
        let quad = mmse_by_quadrature(&p, &Channel::poisson(a, b).unwrap(), &c).unwrap();
        assert!(common::rel_err(series, quad) < 1e-8, "a={a} b={b}: {series} vs {quad}");
    }
}

#[test]
fn zero_bias_posterior_mean_is_linear_in_count() {
    let m = PoissonNegExp::new(2.0, 1.5, 0.0).unwrap();
    let alpha = m.alpha() / 1.5;
    for y in [0u64, 1, 7, 300] {
        let v = m.posterior_mean(y).unwrap();
        assert!(common::rel_err(v, (y as f64 + 1.0) * alpha) < 1e-10, "y={y}: {v}");
    }
}

#[test]
fn poisson_recurrence_identity() {
    // (ax + b) p(y|x) = (y+1) p(y+1|x)
    let ch = Channel::poisson(1.3, 0.7).unwrap();
    for x in [0.2, 1.0, 4.0] {
        for y in 0..20u64 {
            let l = (1.3 * x + 0.7) * ch.ln_pdf(Outcome::Count(y), x).unwrap().exp();
            let r = (y + 1) as f64 * ch.ln_pdf(Outcome::Count(y + 1), x).unwrap().exp();
            assert!((l - r).abs() <= 1e-14 * l.max(1e-300));
        }
    }
}

#[test]
fn posterior_numerator_by_quadrature() {
    // ∫ x P(x) p(y|x) dx = ((y+1) p(y+1) − b p(y)) / a
    let (xbar, a, b) = (1.0, 2.0, 3.0);
    let m = PoissonNegExp::new(xbar, a, b).unwrap();
    let ch = Channel::poisson(a, b).unwrap();
    for y in 0..10u64 {
        let k = common::simpson(|x| x * (-x).exp() * ch.ln_pdf(Outcome::Count(y), x).unwrap().exp(), 0.0, 60.0, 200_000);
        let r = ((y + 1) as f64 * m.marginal(y + 1).unwrap() - b * m.marginal(y).unwrap()) / a;
        assert!((k - r).abs() < 1e-10, "y={y}: {k} vs {r}");
    }
}

#[test]
fn gaussian_mmse_and_posterior_mean() {
    let c = cfg();
    let p = Prior::gaussian(0.5, 2.0).unwrap();
    let ch = Channel::gaussian(1.5, -1.0, 0.7).unwrap();
    let exact = gaussian_closed_forms(2.0, 1.5, -1.0, 0.7).unwrap().mmse;
    assert!(common::rel_err(mmse(&p, &ch, &c).unwrap(), exact) < 1e-9);
    assert!(common::rel_err(expected_posterior_variance(&p, &ch, &c).unwrap(), exact) < 1e-9);
    let xhat = posterior_mean(&p, &ch, Outcome::Real(2.0), &c).unwrap();
    let exp = 0.5 + 1.5 * 2.0 / (1.5 * 1.5 * 2.0 + 0.7) * (2.0 - (1.5 * 0.5 - 1.0));
    assert!((xhat - exp).abs() < 1e-10);
}

#[test]
fn posterior_variance_profile_averages_to_mmse() {
    let c = cfg();
    let m = PoissonNegExp::new(1.0, 3.0, 2.0).unwrap();
    let p = m.prior();
    let ch = Channel::poisson(3.0, 2.0).unwrap();
    let ys: Vec<Outcome> = (0..200u64).map(Outcome::Count).collect();
    let prof = posterior_variance_profile(&p, &ch, &ys, &c).unwrap();
    let avg: f64 = prof.iter().map(|s| {
        let Outcome::Count(y) = s.y else { unreachable!() };
        m.marginal(y).unwrap() * s.posterior_variance
    }).sum();
    assert!(common::rel_err(avg, m.mmse(&c).unwrap()) < 1e-9);
}

#[test]
fn degenerate_evidence_is_reported() {
    let p = Prior::gaussian(0.0, 1.0).unwrap();
    let ch = Channel::gaussian(1.0, 0.0, 1e-2).unwrap();
    assert!(matches!(posterior_mean(&p, &ch, Outcome::Real(1e4), &cfg()), Err(Error::DegenerateEvidence { .. })));
}

#[test]
fn estimator_orthogonality() {
    // E[X X̂] computed by nesting over x equals E[X̂²]
    let c = cfg();
    let p = Prior::neg_exp(1.0).unwrap();
    let ch = Channel::gaussian(1.0, 0.0, 1.0).unwrap();
    let (m1, m2) = estimator_moments(&p, &ch, &c).unwrap();
    let inner = |x: f64| ch.expect_given_x(x, |y| posterior_mean(&p, &ch, y, &c), &c).unwrap();
    let cross = common::simpson(|x| (-x).exp() * x * inner(x), 0.0, 40.0, 800);
    assert!((m1 - 1.0).abs() < 1e-9, "{m1}");
    assert!((cross - m2).abs() < 1e-6, "{cross} vs {m2}");
}

#[test]
fn two_measurements_never_hurt() {
    let c = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p = Prior::neg_exp(rng.random_range(0.5..2.0)).unwrap();
        let c1 = Channel::gaussian(rng.random_range(0.3..2.0), rng.random_range(-1.0..1.0), rng.random_range(0.3..2.0)).unwrap();
        let c2 = Channel::poisson(rng.random_range(0.3..3.0), rng.random_range(0.0..3.0)).unwrap();
        let (single, joint) = mmse_two_measurements(&p, &c1, &c2, &c).unwrap();
        assert!(joint <= single + 1e-8, "{single} {joint}");
    }
    let g = Prior::gaussian(0.0, 1.0).unwrap();
    let ch = Channel::gaussian(1.0, 0.0, 1.0).unwrap();
    let (single, joint) = mmse_two_measurements(&g, &ch, &ch, &c).unwrap();
    assert!((single - 0.5).abs() < 1e-9 && (joint - 1.0 / 3.0).abs() < 1e-9, "{single} {joint}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mmse_bounded_by_prior_variance(xbar in 0.2..3.0f64, a in 0.05..5.0f64, b in 0.0..20.0f64, n in 0.1..3.0f64) {
        let c = cfg();
        let p = Prior::neg_exp(xbar).unwrap();
        for ch in [Channel::poisson(a, b).unwrap(), Channel::gaussian(a, b, n).unwrap()] {
            let m = mmse(&p, &ch, &c).unwrap();
            prop_assert!(m >= 0.0 && m <= p.variance() + 1e-9, "{ch:?}: {m}");
        }
    }

    #[test]
    fn estimator_is_unbiased(xbar in 0.2..3.0f64, a in 0.05..5.0f64, b in 0.0..20.0f64) {
        let c = cfg();
        let p = Prior::neg_exp(xbar).unwrap();
        let (m1, _) = estimator_moments(&p, &Channel::poisson(a, b).unwrap(), &c).unwrap();
        prop_assert!((m1 - xbar).abs() < 1e-9 * xbar.max(1.0), "{m1}");
    }

    #[test]
    fn more_gain_lowers_poisson_mmse(a in 0.1..10.0f64, b in 0.0..50.0f64) {
        let c = cfg();
        let lo = poisson_mmse(1.0, a, b, &c).unwrap();
        let hi = poisson_mmse(1.0, 1.5 * a, b, &c).unwrap();
        prop_assert!(hi < lo + 1e-12);
    }
}
