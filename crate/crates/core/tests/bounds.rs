mod common;

use std::f64::consts::{E, PI};

use infobound_core::bounds::{
    bound_threshold_zero_bias, equivocation_upper_bound, gaussian_mi_snr_derivative_check, mi_lower_bound,
    mi_lower_bound_from, mimo_mi_lower_bound, zero_bias_poisson_bound, GaussianComponent, ParallelGaussian,
};
use infobound_core::channels::{poisson_mi, poisson_mmse};
use infobound_core::info::{differential_entropy, mutual_information_exact};
use infobound_core::{Channel, Prior, QuadConfig};

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn poisson_gap(s: f64, b: f64, c: &QuadConfig) -> f64 {
    let mi = poisson_mi(1.0, s, b, c).unwrap();
    mi - mi_lower_bound_from(1.0, poisson_mmse(1.0, s, b, c).unwrap()).unwrap()
}

#[test]
fn gaussian_bound_is_tight() {
    let c = cfg();
    for var_x in [0.1f64, 0.5, 1.0, 4.0, 25.0] {
        for snr in [0.01, 0.1, 1.0, 3.0, 10.0] {
            let p = Prior::gaussian(0.0, var_x).unwrap();
            let ch = Channel::gaussian((snr / var_x).sqrt(), 0.0, 1.0).unwrap();
            let mi = mutual_information_exact(&p, &ch, &c).unwrap();
            let lb = mi_lower_bound(&p, &ch, &c).unwrap();
            assert!((mi - lb).abs() < 1e-6, "σ²={var_x} snr={snr}: {mi} vs {lb}");
            assert!((mi - 0.5 * snr.ln_1p()).abs() < 1e-7);
        }
    }
}

#[test]
fn threshold_root() {
    let r = bound_threshold_zero_bias(&cfg()).unwrap();
    assert!((r - (2.0 * PI / E - 1.0)).abs() < 1e-3);
    assert!(zero_bias_poisson_bound(r - 0.1) < 0.0 && zero_bias_poisson_bound(r + 0.1) > 0.0);
}

#[test]
fn zero_bias_bound_matches_generic_route() {
    let c = cfg();
    for s in [0.5, 2.0, 30.0] {
        let p = Prior::neg_exp(1.0).unwrap();
        let generic = mi_lower_bound(&p, &Channel::poisson(s, 0.0).unwrap(), &c).unwrap();
        assert!((generic - zero_bias_poisson_bound(s)).abs() < 1e-9);
    }
}

#[test]
fn poisson_bound_holds_everywhere() {
    let c = cfg();
    for b in [0.0, 50.0, 100.0] {
        for k in 0..=20 {
            let s = 0.5 * 400f64.powf(k as f64 / 20.0);
            let gap = poisson_gap(s, b, &c);
            assert!(gap >= -1e-6, "s={s} b={b}: {gap}");
        }
    }
}

#[test]
fn zero_bias_gap_decreases_with_gain() {
    let c = cfg();
    let gaps: Vec<f64> = (0..=20).map(|k| poisson_gap(5.0 * 40f64.powf(k as f64 / 20.0), 0.0, &c)).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn biased_gap_has_interior_minimum_and_stays_below_zero_bias() {
    // At fixed b the gap tends to the b = 0 curve as aX̄ grows, so it cannot
    // keep falling.
    let c = cfg();
    for (b, s_min) in [(50.0, 66.0), (100.0, 108.0)] {
        assert!(poisson_gap(s_min, b, &c) < poisson_gap(s_min / 2.0, b, &c));
        assert!(poisson_gap(s_min, b, &c) < poisson_gap(s_min * 2.0, b, &c));
    }
    for s in [80.0, 200.0] {
        let g: Vec<f64> = [0.0, 50.0, 100.0].iter().map(|&b| poisson_gap(s, b, &c)).collect();
        assert!(g[2] < g[1] && g[1] < g[0], "s={s}: {g:?}");
    }
}

#[test]
fn poisson_mi_falls_with_bias() {
    let c = cfg();
    for s in [1.0, 10.0, 100.0] {
        let mis: Vec<f64> = [0.0, 10.0, 50.0, 100.0].iter().map(|&b| poisson_mi(1.0, s, b, &c).unwrap()).collect();
        assert!(mis.windows(2).all(|w| w[1] < w[0]), "{mis:?}");
    }
}

#[test]
fn equivocation_bound() {
    let c = cfg();
    let cases = [
        (Prior::neg_exp(1.0).unwrap(), Channel::poisson(3.0, 1.0).unwrap()),
        (Prior::neg_exp(2.0).unwrap(), Channel::gaussian(0.5, 0.0, 1.0).unwrap()),
        (Prior::gaussian(1.0, 2.0).unwrap(), Channel::gaussian(1.0, 0.0, 1.0).unwrap()),
    ];
    for (p, ch) in &cases {
        let equiv = differential_entropy(p, &c).unwrap() - mutual_information_exact(p, ch, &c).unwrap();
        assert!(equiv <= equivocation_upper_bound(p, ch, &c).unwrap() + 1e-9);
    }
}

#[test]
fn derivative_identity() {
    let c = cfg();
    for snr in [0.1f64, 1.0, 3.0, 10.0] {
        let (d, rhs) = gaussian_mi_snr_derivative_check(2.0, (snr / 2.0).sqrt(), 1.0, &c).unwrap();
        assert!(common::rel_err(d, rhs) < 1e-4, "snr={snr}: {d} vs {rhs}");
        assert!(common::rel_err(rhs, 0.5 / (1.0 + snr)) < 1e-9);
    }
}

fn component(var_x: f64, snr: f64) -> GaussianComponent {
    GaussianComponent { var_x, gain: (snr / var_x).sqrt(), noise_var: 1.0 }
}

#[test]
fn mimo_symmetric_is_tight() {
    let m = ParallelGaussian::new([component(1.5, 2.0), component(1.5, 2.0)]).unwrap();
    let r = mimo_mi_lower_bound(&m, &cfg()).unwrap();
    assert!((r.bound - r.exact_mi).abs() < 1e-7, "{r:?}");
    assert!((r.exact_mi - 3f64.ln()).abs() < 1e-7);
}

#[test]
fn mimo_asymmetric_is_strict() {
    let m = ParallelGaussian::new([component(1.0, 1.0), component(1.0, 9.0)]).unwrap();
    let r = mimo_mi_lower_bound(&m, &cfg()).unwrap();
    // mmse_avg = (1/2 + 1/10) / 2
    assert!((r.mmse_avg - 0.3).abs() < 1e-9);
    assert!(r.bound < r.exact_mi - 1e-3, "{r:?}");
}

#[test]
fn deterministic_channel_bound_is_infinite() {
    assert_eq!(mi_lower_bound_from(1.0, 0.0).unwrap(), f64::INFINITY);
    assert!(mi_lower_bound_from(1.0, -1.0).is_err());
}
