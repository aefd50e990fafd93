//! The Monte Carlo concordance corpus: 20 sampled models, each giving an MI
//! and an MMSE configuration, compared against deterministic values.

use infobound_core::channels::{gaussian_closed_forms, PoissonNegExp};
use infobound_core::estimate::mmse;
use infobound_core::info::mutual_information_exact;
use infobound_core::mc::{mc_estimates, McConfig, McModel};
use infobound_core::nuisance::{mi_with_nuisance, mi_without_nuisance, mmse_with_without_nuisance};
use infobound_core::{Channel, NuisanceGaussianParams, Prior, QuadConfig};
use serde::Serialize;

use crate::error::Result;

pub const DEFAULT_ORACLE_SEED: u64 = 42;
/// Coverage threshold in batch standard errors.
pub const Z_LIMIT: f64 = 3.0;
/// Configurations that must be covered out of the 40.
pub const REQUIRED_COVERED: usize = 38;

#[derive(Debug, Clone)]
pub struct OracleModel {
    pub name: String,
    pub model: McModel,
    pub mi: f64,
    pub mmse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleOutcome {
    pub name: String,
    pub quantity: &'static str,
    pub exact: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub z: f64,
    pub covered: bool,
}

fn gaussian(var_x: f64, a: f64, b: f64, noise_var: f64) -> Result<OracleModel> {
    let cf = gaussian_closed_forms(var_x, a, b, noise_var)?;
    Ok(OracleModel {
        name: format!("gaussian var_x={var_x} a={a} b={b} noise_var={noise_var}"),
        model: McModel::Scalar { prior: Prior::gaussian(0.0, var_x)?, channel: Channel::gaussian(a, b, noise_var)? },
        mi: cf.mi,
        mmse: cf.mmse,
    })
}

fn poisson(xbar: f64, a_xbar: f64, b: f64, cfg: &QuadConfig) -> Result<OracleModel> {
    let m = PoissonNegExp::new(xbar, a_xbar / xbar, b)?;
    Ok(OracleModel {
        name: format!("poisson xbar={xbar} a_xbar={a_xbar} b={b}"),
        model: McModel::Scalar { prior: m.prior(), channel: Channel::poisson(a_xbar / xbar, b)? },
        mi: m.mi(cfg)?,
        mmse: m.mmse(cfg)?,
    })
}

fn nuisance(p: NuisanceGaussianParams) -> [OracleModel; 2] {
    let (plus, minus) = mmse_with_without_nuisance(&p);
    let tag = format!("a={} b={} alpha={} var_x_given_u={} var_u={}", p.a, p.b, p.alpha, p.var_x_given_u, p.var_u);
    [
        OracleModel { name: format!("nuisance+ {tag}"), model: McModel::NuisanceMarginal(p), mi: mi_with_nuisance(&p), mmse: plus },
        OracleModel {
            name: format!("nuisance- {tag}"),
            model: McModel::NuisanceConditional(p),
            mi: mi_without_nuisance(&p),
            mmse: minus,
        },
    ]
}

/// The 20 corpus models with their deterministic MI and MMSE.
pub fn corpus(cfg: &QuadConfig) -> Result<Vec<OracleModel>> {
    let mut out = vec![
        gaussian(1.0, 1.0, 0.0, 1.0)?,
        gaussian(1.0, 3f64.sqrt(), 0.0, 1.0)?,
        gaussian(2.0, 0.5, 1.0, 0.5)?,
        gaussian(0.5, 3.0, -2.0, 2.0)?,
        gaussian(4.0, 0.2, 0.0, 1.0)?,
        gaussian(1.0, 10.0, 0.0, 1.0)?,
        gaussian(2.0, 0.0, 0.0, 1.0)?,
    ];
    for (s, b) in [(1.0, 0.0), (10.0, 0.0), (10.0, 50.0), (0.5, 0.0), (3.0, 2.0), (20.0, 100.0)] {
        out.push(poisson(1.0, s, b, cfg)?);
    }
    for p in [
        NuisanceGaussianParams::new(1.0, 0.8, 0.6, 1.5, 2.0, 0.3, 1.0)?,
        NuisanceGaussianParams::new(2.0, -1.0, 0.0, 0.5, 3.0, 0.0, 1.0)?,
        NuisanceGaussianParams::new(0.5, 2.0, -1.5, 1.0, 0.4, 1.0, 0.5)?,
    ] {
        out.extend(nuisance(p));
    }
    let prior = Prior::neg_exp(1.0)?;
    let channel = Channel::gaussian(1.0, 0.0, 1.0)?;
    out.push(OracleModel {
        name: "negexp xbar=1, gaussian a=1 b=0 noise_var=1".into(),
        mi: mutual_information_exact(&prior, &channel, cfg)?,
        mmse: mmse(&prior, &channel, cfg)?,
        model: McModel::Scalar { prior, channel },
    });
    Ok(out)
}

/// Runs every corpus model and returns 40 outcomes, MI then MMSE per model.
pub fn run_corpus(mcfg: &McConfig, cfg: &QuadConfig) -> Result<Vec<OracleOutcome>> {
    let mut out = Vec::new();
    for m in corpus(cfg)? {
        let pair = mc_estimates(&m.model, mcfg)?;
        for (quantity, exact, est) in [("mi", m.mi, pair.mi), ("mmse", m.mmse, pair.mmse)] {
            let z = est.z_score(exact);
            out.push(OracleOutcome {
                name: m.name.clone(),
                quantity,
                exact,
                estimate: est.estimate,
                stderr: est.stderr,
                z,
                covered: z < Z_LIMIT && !est.warning,
            });
        }
    }
    Ok(out)
}
