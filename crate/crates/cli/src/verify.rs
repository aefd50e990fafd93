//! Property suites over the built-in corpus. Each check reports the worst
//! point of its grid.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use infobound_core::bounds::{
    bound_threshold_zero_bias, equivocation_upper_bound, gaussian_mi_snr_derivative_check, mi_lower_bound,
    mi_lower_bound_from, mimo_mi_lower_bound, zero_bias_poisson_bound, GaussianComponent, ParallelGaussian,
};
use infobound_core::channels::PoissonNegExp;
use infobound_core::estimate::mmse;
use infobound_core::info::{differential_entropy, mi_second_order, mutual_information_exact};
use infobound_core::mc::McConfig;
use infobound_core::nuisance::{
    fi_block_matrix_with_prior, fi_marginalized_vs_conditional, mi_with_nuisance, mi_without_nuisance,
    mmse_with_without_nuisance,
};
use infobound_core::{Channel, NuisanceGaussianParams, Prior, QuadConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::oracles::{run_corpus, OracleOutcome, REQUIRED_COVERED};
use crate::table::logspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Bounds,
    Nuisance,
    Oracles,
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "bounds" => Ok(Suite::Bounds),
            "nuisance" => Ok(Suite::Nuisance),
            "oracles" => Ok(Suite::Oracles),
            _ => Err(CliError::Usage(format!("unknown suite `{s}`; expected all, bounds, nuisance or oracles"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
}

/// One check: `lhs relation rhs` within `tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, lhs: f64, relation: Relation, rhs: f64, tolerance: f64) -> Self {
        let mut c = Self { name: name.into(), lhs, rhs, relation, tolerance, pass: false };
        c.pass = c.violation() <= tolerance;
        c
    }

    /// Amount by which the relation fails, before tolerance; `+∞` for NaN.
    pub fn violation(&self) -> f64 {
        let v = match self.relation {
            Relation::Eq => (self.lhs - self.rhs).abs(),
            Relation::Ge => (self.rhs - self.lhs).max(0.0),
            Relation::Le => (self.lhs - self.rhs).max(0.0),
        };
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// Worst of several evaluations, renamed `name[count]`.
    pub fn worst(name: &str, checks: Vec<CheckRecord>) -> CheckRecord {
        let n = checks.len();
        let mut w = checks
            .into_iter()
            .max_by(|a, b| a.violation().total_cmp(&b.violation()))
            .expect("at least one evaluation");
        w.name = format!("{name}[{n}]");
        w
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::Eq => "==",
            Relation::Ge => ">=",
            Relation::Le => "<=",
        };
        write!(
            f,
            "{} {:<44} {:.10e} {rel} {:.10e}  tol={:.1e} max_violation={:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.lhs,
            self.rhs,
            self.tolerance,
            self.violation()
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub mc_samples: u64,
    pub quad: QuadConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: crate::oracles::DEFAULT_ORACLE_SEED, mc_samples: 2_000_000, quad: QuadConfig::default() }
    }
}

/// Checks of a suite run, plus the per-configuration Monte Carlo outcomes
/// when the oracle suite ran.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<CheckRecord>,
    pub oracle_outcomes: Vec<OracleOutcome>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Report> {
    let mut report = Report { checks: Vec::new(), oracle_outcomes: Vec::new() };
    if matches!(suite, Suite::All | Suite::Bounds) {
        report.checks.extend(bounds_suite(&opts.quad)?);
    }
    if matches!(suite, Suite::All | Suite::Nuisance) {
        report.checks.extend(nuisance_suite(&opts.quad)?);
    }
    if matches!(suite, Suite::All | Suite::Oracles) {
        let (check, outcomes) = oracle_suite(opts)?;
        report.checks.push(check);
        report.oracle_outcomes = outcomes;
    }
    Ok(report)
}

fn poisson_gap(a_xbar: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    let m = PoissonNegExp::new(1.0, a_xbar, b)?;
    Ok(m.mi(cfg)? - mi_lower_bound_from(1.0, m.mmse(cfg)?)?)
}

fn bounds_suite(cfg: &QuadConfig) -> Result<Vec<CheckRecord>> {
    use Relation::*;
    let mut out = Vec::new();

    let mut series = Vec::new();
    for xbar in [0.5, 1.0, 5.0] {
        for s in [0.1, 1.0, 10.0, 100.0] {
            let m = PoissonNegExp::new(xbar, s / xbar, 0.0)?;
            let closed = m.mmse_zero_bias();
            series.push(CheckRecord::new("", m.mmse_series(cfg)? / closed, Eq, 1.0, 1e-8));
        }
    }
    out.push(CheckRecord::worst("poisson_zero_bias_mmse_series", series));

    let root = bound_threshold_zero_bias(cfg)?;
    out.push(CheckRecord::new("zero_bias_bound_threshold", root, Eq, 2.0 * PI / E - 1.0, 1e-3));
    out.push(CheckRecord::new("zero_bias_bound_negative_at_1", zero_bias_poisson_bound(1.0), Le, 0.0, 0.0));
    out.push(CheckRecord::new("zero_bias_bound_positive_at_2", zero_bias_poisson_bound(2.0), Ge, 0.0, 0.0));

    let mut tight = Vec::new();
    let mut closed = Vec::new();
    for var_x in [0.1f64, 0.5, 1.0, 4.0, 25.0] {
        for snr in [0.01f64, 0.1, 1.0, 3.0, 10.0] {
            let p = Prior::gaussian(0.0, var_x)?;
            let c = Channel::gaussian((snr / var_x).sqrt(), 0.0, 1.0)?;
            let mi = mutual_information_exact(&p, &c, cfg)?;
            tight.push(CheckRecord::new("", mi, Eq, mi_lower_bound(&p, &c, cfg)?, 1e-7));
            closed.push(CheckRecord::new("", mi, Eq, 0.5 * snr.ln_1p(), 1e-7));
        }
    }
    out.push(CheckRecord::worst("gaussian_bound_tightness", tight));
    out.push(CheckRecord::worst("gaussian_mi_closed_form", closed));

    let mut deriv = Vec::new();
    for snr in [0.1f64, 1.0, 3.0, 10.0] {
        let (d, rhs) = gaussian_mi_snr_derivative_check(1.0, snr.sqrt(), 1.0, cfg)?;
        deriv.push(CheckRecord::new("", d / rhs, Eq, 1.0, 1e-4));
    }
    out.push(CheckRecord::worst("mi_snr_derivative_identity", deriv));

    let grid = logspace(0.5, 200.0, 60);
    let jobs: Vec<(f64, f64)> = [0.0, 50.0, 100.0].iter().flat_map(|&b| grid.iter().map(move |&s| (s, b))).collect();
    let gaps: Result<Vec<f64>> = jobs.par_iter().map(|&(s, b)| poisson_gap(s, b, cfg)).collect();
    let validity = gaps?.into_iter().map(|g| CheckRecord::new("", g, Ge, 0.0, 1e-6)).collect();
    out.push(CheckRecord::worst("poisson_mi_ge_lower_bound", validity));

    let trend: Result<Vec<f64>> = logspace(5.0, 200.0, 30).par_iter().map(|&s| poisson_gap(s, 0.0, cfg)).collect();
    let trend = trend?;
    let steps = trend.windows(2).map(|w| CheckRecord::new("", w[1], Le, w[0], 0.0)).collect();
    out.push(CheckRecord::worst("zero_bias_gap_decreasing_in_gain", steps));

    let mut tighter = Vec::new();
    for s in [80.0, 200.0] {
        let g: Result<Vec<f64>> = [0.0, 50.0, 100.0].iter().map(|&b| poisson_gap(s, b, cfg)).collect();
        let g = g?;
        tighter.push(CheckRecord::new("", g[1], Le, g[0], 0.0));
        tighter.push(CheckRecord::new("", g[2], Le, g[1], 0.0));
    }
    out.push(CheckRecord::worst("gap_tighter_with_bias_at_high_gain", tighter));

    let mut fig2 = Vec::new();
    for s in [5.0, 20.0, 80.0] {
        let mis: Result<Vec<f64>> =
            [0.0, 25.0, 50.0, 100.0, 200.0].iter().map(|&b| Ok(PoissonNegExp::new(1.0, s, b)?.mi(cfg)?)).collect();
        fig2.extend(mis?.windows(2).map(|w| CheckRecord::new("", w[1], Le, w[0], 0.0)));
    }
    out.push(CheckRecord::worst("poisson_mi_decreasing_in_bias", fig2));

    let corpus = [
        (Prior::neg_exp(1.0)?, Channel::poisson(3.0, 1.0)?),
        (Prior::neg_exp(2.0)?, Channel::gaussian(0.5, 0.0, 1.0)?),
        (Prior::gaussian(1.0, 2.0)?, Channel::gaussian(1.0, 0.0, 1.0)?),
        (Prior::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0])?, Channel::gaussian(1.0, 0.0, 0.3)?),
    ];
    let mut equiv = Vec::new();
    let mut below_prior = Vec::new();
    for (p, c) in &corpus {
        let h = differential_entropy(p, cfg)? - mutual_information_exact(p, c, cfg)?;
        equiv.push(CheckRecord::new("", h, Le, equivocation_upper_bound(p, c, cfg)?, 1e-6));
        below_prior.push(CheckRecord::new("", mmse(p, c, cfg)?, Le, p.variance(), 1e-9));
    }
    out.push(CheckRecord::worst("equivocation_le_gaussian_bound", equiv));
    out.push(CheckRecord::worst("mmse_le_prior_variance", below_prior));

    let mut so = Vec::new();
    let mut ratio = Vec::new();
    for snr in [1e-4, 1e-3, 1e-2] {
        let p = Prior::gaussian(0.0, 1.0)?;
        let c = Channel::gaussian(f64::sqrt(snr), 0.0, 1.0)?;
        let second = mi_second_order(&p, &c, cfg)?;
        so.push(CheckRecord::new("", second, Eq, 0.5 * snr, 1e-9));
        let r = mutual_information_exact(&p, &c, cfg)? / second;
        ratio.push(CheckRecord::new("", r, Le, 1.0, 0.0));
        ratio.push(CheckRecord::new("", r, Ge, 1.0 - 2.0 * snr, 0.0));
    }
    out.push(CheckRecord::worst("second_order_mi_half_snr", so));
    out.push(CheckRecord::worst("exact_over_second_order_mi", ratio));

    let comp = |snr: f64| GaussianComponent { var_x: 1.0, gain: snr.sqrt(), noise_var: 1.0 };
    let sym = mimo_mi_lower_bound(&ParallelGaussian::new([comp(2.0), comp(2.0)])?, cfg)?;
    out.push(CheckRecord::new("mimo_symmetric_bound_tight", sym.bound, Eq, sym.exact_mi, 1e-7));
    let asym = mimo_mi_lower_bound(&ParallelGaussian::new([comp(1.0), comp(9.0)])?, cfg)?;
    out.push(CheckRecord::new("mimo_asymmetric_bound_strict", asym.bound, Le, asym.exact_mi - 1e-6, 0.0));
    Ok(out)
}

fn nuisance_suite(cfg: &QuadConfig) -> Result<Vec<CheckRecord>> {
    use Relation::*;
    let mut out = Vec::new();

    let mut mi_order = Vec::new();
    let mut fi_order = Vec::new();
    for a in [0.5, 1.0, 3.0] {
        for b in [0.2, 1.0, 4.0] {
            for (vxu, vu) in [(0.5, 2.0), (1.0, 1.0), (4.0, 0.3)] {
                let p = NuisanceGaussianParams::new(a, b, 0.0, vxu, vu, 0.0, 1.0)?;
                // strict: require a positive margin
                mi_order.push(CheckRecord::new("", mi_without_nuisance(&p) - mi_with_nuisance(&p), Ge, 1e-15, 0.0));
                let (jp, jm) = fi_marginalized_vs_conditional(&p, cfg)?;
                fi_order.push(CheckRecord::new("", jm, Ge, jp, 1e-12));
            }
        }
    }
    out.push(CheckRecord::worst("mi_minus_gt_mi_plus_uncorrelated", mi_order));
    out.push(CheckRecord::worst("fi_minus_ge_fi_plus", fi_order));

    let p0 = NuisanceGaussianParams::new(1.5, 0.0, 0.0, 1.0, 2.0, 0.0, 1.0)?;
    let (jp, jm) = fi_marginalized_vs_conditional(&p0, cfg)?;
    out.push(CheckRecord::new("fi_equal_without_nuisance", jp, Eq, jm, 1e-12));

    // Deterministic parameter cloud; values are spread with a simple
    // low-discrepancy sequence so the suite has no RNG dependency.
    let frac = |k: usize, g: f64| (k as f64 * g).fract();
    let mut cloud = Vec::new();
    let mut locus = Vec::new();
    for k in 1..=1000 {
        let a = -3.0 + 6.0 * frac(k, 0.618_033_988_749_895);
        let b = -3.0 + 6.0 * frac(k, 0.754_877_666_246_693);
        let alpha = -3.0 + 6.0 * frac(k, 0.569_840_290_998_053);
        let vxu = 5.0 * frac(k, 0.414_213_562_373_095);
        let vu = 0.01 + 5.0 * frac(k, 0.732_050_807_568_877);
        let p = NuisanceGaussianParams::new(a, b, alpha, vxu, vu, 0.0, 1.0)?;
        let (plus, minus) = mmse_with_without_nuisance(&p);
        cloud.push(CheckRecord::new("", plus, Ge, minus, 1e-12));
        // α chosen so that χ = η exactly
        if b != 0.0 && vxu > 0.0 {
            let q = NuisanceGaussianParams { alpha: a * b * vxu, ..p };
            let (plus, minus) = mmse_with_without_nuisance(&q);
            locus.push(CheckRecord::new("", plus, Eq, minus, 1e-12));
        }
    }
    out.push(CheckRecord::worst("mmse_plus_ge_mmse_minus", cloud));
    out.push(CheckRecord::worst("mmse_equal_when_chi_eq_eta", locus));

    let mut decomposition = Vec::new();
    let mut marginal = Vec::new();
    for p in [
        NuisanceGaussianParams::new(1.0, 0.5, 0.7, 2.0, 1.5, 0.3, 1.0)?,
        NuisanceGaussianParams::new(2.0, -1.0, 0.0, 0.5, 3.0, 1.0, 1.0)?,
        NuisanceGaussianParams::new(0.5, 2.0, -1.5, 1.0, 0.4, -0.5, 0.5)?,
    ] {
        let c = p.marginal_gain();
        decomposition.push(CheckRecord::new("", p.var_y(), Eq, p.var_y_given_x() + c * c * p.var_x(), 1e-10 * p.var_y()));
        let (prior, ch) = p.marginal_model()?;
        marginal.push(CheckRecord::new("", mmse(&prior, &ch, cfg)?, Eq, mmse_with_without_nuisance(&p).0, 1e-6));
    }
    out.push(CheckRecord::worst("output_variance_decomposition", decomposition));
    out.push(CheckRecord::worst("marginal_model_mmse_matches_closed_form", marginal));

    let base = NuisanceGaussianParams::new(1.3, 0.8, 0.0, 2.0, 1.5, 0.0, 1.0)?;
    let moved = NuisanceGaussianParams { alpha: 5.0, var_u: 40.0, ..base };
    out.push(CheckRecord::new("mi_minus_independent_of_alpha", mi_without_nuisance(&moved), Eq, mi_without_nuisance(&base), 0.0));

    let mut interior = Vec::new();
    for alpha in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let vals: Result<Vec<f64>> = crate::table::linspace(0.0, 10.0, 601)
            .into_iter()
            .map(|r| Ok(mi_with_nuisance(&NuisanceGaussianParams::new(1.0, r, alpha, 1.0, 5.0, 0.0, 1.0)?)))
            .collect();
        let vals = vals?;
        let imax = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
        // distance of the argmax from the nearest end of the sweep
        interior.push(CheckRecord::new("", imax.min(600 - imax) as f64, Ge, 1.0, 0.0));
    }
    out.push(CheckRecord::worst("fig3_mi_plus_interior_maximum", interior));

    let mut crb = Vec::new();
    for p in [
        NuisanceGaussianParams::new(1.0, 1.0, 0.0, 2.0, 3.0, 0.0, 1.0)?,
        NuisanceGaussianParams::new(1.5, -0.5, 1.2, 0.7, 2.0, 0.0, 1.0)?,
    ] {
        let m = fi_block_matrix_with_prior(&p)?;
        crb.push(CheckRecord::new("", m.crb_x, Ge, 1.0 / m.j[0][0], 1e-12));
    }
    out.push(CheckRecord::worst("crb_with_prior_ge_inverse_jxx", crb));
    Ok(out)
}

fn oracle_suite(opts: &VerifyOptions) -> Result<(CheckRecord, Vec<OracleOutcome>)> {
    let mcfg = McConfig::default().with_seed(opts.seed).with_samples(opts.mc_samples);
    let outcomes = run_corpus(&mcfg, &opts.quad)?;
    let covered = outcomes.iter().filter(|o| o.covered).count();
    let check = CheckRecord::new(
        format!("mc_concordance_seed_{}[{}]", opts.seed, outcomes.len()),
        covered as f64,
        Relation::Ge,
        REQUIRED_COVERED as f64,
        0.0,
    );
    Ok((check, outcomes))
}
