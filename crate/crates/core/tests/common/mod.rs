//! Independent reference computations used by the integration tests. They
//! deliberately avoid the library's quadrature and series engines.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

pub fn normal_pdf(z: f64, var: f64) -> f64 {
    (-0.5 * z * z / var).exp() / (2.0 * PI * var).sqrt()
}

/// Poisson pmf `p(0..=n)` by the multiplicative recurrence.
pub fn poisson_pmf_table(rate: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut ln_p = -rate;
    for k in 0..=n {
        if k > 0 {
            ln_p += rate.ln() - (k as f64).ln();
        }
        out.push(if rate == 0.0 { if k == 0 { 1.0 } else { 0.0 } } else { ln_p.exp() });
    }
    out
}

/// Discrete-input MI `Σ_x Σ_y p(x) p(y|x) ln(p(y|x)/p(y))` through a
/// Poisson channel with rate `a x + b`.
pub fn discrete_mi_poisson(atoms: &[f64], probs: &[f64], a: f64, b: f64) -> f64 {
    let max_rate = atoms.iter().map(|x| a * x + b).fold(0.0, f64::max);
    let n = (max_rate + 40.0 * max_rate.sqrt() + 60.0) as usize;
    let tables: Vec<Vec<f64>> = atoms.iter().map(|x| poisson_pmf_table(a * x + b, n)).collect();
    let mut mi = 0.0;
    for y in 0..=n {
        let py: f64 = tables.iter().zip(probs).map(|(t, p)| p * t[y]).sum();
        for (t, p) in tables.iter().zip(probs) {
            if t[y] > 0.0 {
                mi += p * t[y] * (t[y] / py).ln();
            }
        }
    }
    mi
}

/// Discrete-input MI through `Y = a x + b + N(0, σ²)` by Simpson's rule.
pub fn discrete_mi_gaussian(atoms: &[f64], probs: &[f64], a: f64, b: f64, noise_var: f64) -> f64 {
    let sd = noise_var.sqrt();
    let means: Vec<f64> = atoms.iter().map(|x| a * x + b).collect();
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min) - 14.0 * sd;
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 14.0 * sd;
    simpson(
        |y| {
            let dens: Vec<f64> = means.iter().map(|m| normal_pdf(y - m, noise_var)).collect();
            let py: f64 = dens.iter().zip(probs).map(|(d, p)| d * p).sum();
            dens.iter()
                .zip(probs)
                .filter(|(d, _)| **d > 0.0)
                .map(|(d, p)| p * d * (d / py).ln())
                .sum()
        },
        lo,
        hi,
        200_000,
    )
}

/// Mutual information of a finite joint table `p[i][j]`.
pub fn table_mi(p: &[Vec<f64>]) -> f64 {
    let px: Vec<f64> = p.iter().map(|r| r.iter().sum()).collect();
    let ny = p[0].len();
    let py: Vec<f64> = (0..ny).map(|j| p.iter().map(|r| r[j]).sum()).collect();
    let mut mi = 0.0;
    for (i, r) in p.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if v > 0.0 {
                mi += v * (v / (px[i] * py[j])).ln();
            }
        }
    }
    mi
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
