//! Parameter sweeps driven by a TOML file.
//!
//! ```toml
//! model = "poisson"                 # gaussian | poisson | nuisance_gaussian
//! quantities = ["mmse", "mi_exact"]
//!
//! [sweep]
//! param = "a_xbar"
//! start = 0.1
//! stop = 100.0
//! count = 50
//! scale = "log"                     # linear (default) | log
//!
//! [poisson]
//! xbar = 1.0
//! b = 0.0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use infobound_core::bounds::mi_lower_bound;
use infobound_core::estimate::mmse;
use infobound_core::info::{fisher_information, mi_second_order, mutual_information_exact};
use infobound_core::nuisance::{mi_with_nuisance, mi_without_nuisance, mmse_with_without_nuisance};
use infobound_core::{Channel, NuisanceGaussianParams, Prior, QuadConfig};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::table::{linspace, logspace, Cell, Table};

/// Slack for `mi_lower_bound ≤ mi_exact` on sweep rows.
pub const BOUND_SLACK: f64 = 1e-6;
/// Slack for `mmse_plus ≥ mmse_minus` on sweep rows.
pub const ORDERING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Gaussian,
    Poisson,
    NuisanceGaussian,
}

impl Model {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Model::Gaussian),
            "poisson" => Ok(Model::Poisson),
            "nuisance_gaussian" => Ok(Model::NuisanceGaussian),
            _ => Err(CliError::config("model", format!("unknown model `{s}`; expected gaussian, poisson or nuisance_gaussian"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Gaussian => "gaussian",
            Model::Poisson => "poisson",
            Model::NuisanceGaussian => "nuisance_gaussian",
        }
    }

    /// Parameters of the model section with their defaults.
    fn defaults(self) -> BTreeMap<&'static str, f64> {
        let v: &[(&str, f64)] = match self {
            Model::Gaussian => &[("prior_mean", 0.0), ("var_x", 1.0), ("a", 1.0), ("b", 0.0), ("noise_var", 1.0)],
            Model::Poisson => &[("xbar", 1.0), ("a", 1.0), ("b", 0.0)],
            Model::NuisanceGaussian => &[
                ("a", 1.0),
                ("b", 1.0),
                ("alpha", 0.0),
                ("var_x_given_u", 1.0),
                ("var_u", 1.0),
                ("u_mean", 0.0),
                ("noise_var", 1.0),
            ],
        };
        v.iter().copied().collect()
    }

    /// Derived parameters that may be set or swept in place of a gain.
    fn aliases(self) -> &'static [&'static str] {
        match self {
            Model::Gaussian => &["snr", "fi_x"],
            Model::Poisson => &["a_xbar", "fi_x"],
            Model::NuisanceGaussian => &[],
        }
    }

    fn accepts(self, q: Quantity) -> bool {
        q.is_nuisance() == (self == Model::NuisanceGaussian)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    MiExact,
    MiSecondOrder,
    Mmse,
    MiLowerBound,
    Fi,
    MiPlus,
    MiMinus,
    MmsePlus,
    MmseMinus,
}

impl Quantity {
    pub const ALL: [Quantity; 9] = [
        Quantity::MiExact,
        Quantity::MiSecondOrder,
        Quantity::Mmse,
        Quantity::MiLowerBound,
        Quantity::Fi,
        Quantity::MiPlus,
        Quantity::MiMinus,
        Quantity::MmsePlus,
        Quantity::MmseMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::MiExact => "mi_exact",
            Quantity::MiSecondOrder => "mi_second_order",
            Quantity::Mmse => "mmse",
            Quantity::MiLowerBound => "mi_lower_bound",
            Quantity::Fi => "fi",
            Quantity::MiPlus => "mi_plus",
            Quantity::MiMinus => "mi_minus",
            Quantity::MmsePlus => "mmse_plus",
            Quantity::MmseMinus => "mmse_minus",
        }
    }

    fn is_nuisance(self) -> bool {
        matches!(self, Quantity::MiPlus | Quantity::MiMinus | Quantity::MmsePlus | Quantity::MmseMinus)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub model: Model,
    pub quantities: Vec<Quantity>,
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Scale,
    /// Model parameters, including any aliases that were set.
    pub fixed: BTreeMap<String, f64>,
}

const TOP_KEYS: [&str; 6] = ["model", "quantities", "sweep", "gaussian", "poisson", "nuisance_gaussian"];
const SWEEP_KEYS: [&str; 5] = ["param", "start", "stop", "count", "scale"];

fn number(v: &toml::Value, key: &str) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::config(key, "expected a number")),
    }
}

fn string<'a>(v: &'a toml::Value, key: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| CliError::config(key, "expected a string"))
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::config("<file>", e.message().to_owned()))?;
        for k in doc.keys() {
            if !TOP_KEYS.contains(&k.as_str()) {
                return Err(CliError::config(k, format!("unknown key; expected one of {}", TOP_KEYS.join(", "))));
            }
        }
        let model = Model::parse(string(doc.get("model").ok_or_else(|| CliError::config("model", "missing"))?, "model")?)?;

        let qs = doc.get("quantities").ok_or_else(|| CliError::config("quantities", "missing"))?;
        let qs = qs.as_array().ok_or_else(|| CliError::config("quantities", "expected an array of names"))?;
        let mut quantities = Vec::new();
        for q in qs {
            let name = string(q, "quantities")?;
            let q = Quantity::ALL
                .into_iter()
                .find(|x| x.name() == name)
                .ok_or_else(|| CliError::config("quantities", format!("unknown quantity `{name}`")))?;
            if !model.accepts(q) {
                return Err(CliError::config("quantities", format!("`{q}` does not apply to model {}", model.name())));
            }
            quantities.push(q);
        }
        if quantities.is_empty() {
            return Err(CliError::config("quantities", "at least one quantity is required"));
        }

        let sweep = doc.get("sweep").and_then(|v| v.as_table()).ok_or_else(|| CliError::config("sweep", "missing [sweep] section"))?;
        for k in sweep.keys() {
            if !SWEEP_KEYS.contains(&k.as_str()) {
                return Err(CliError::config(format!("sweep.{k}"), format!("unknown key; expected one of {}", SWEEP_KEYS.join(", "))));
            }
        }
        let get = |k: &str| sweep.get(k).ok_or_else(|| CliError::config(format!("sweep.{k}"), "missing"));
        let param = string(get("param")?, "sweep.param")?.to_owned();
        let start = number(get("start")?, "sweep.start")?;
        let stop = number(get("stop")?, "sweep.stop")?;
        let count = match get("count")? {
            toml::Value::Integer(i) if *i >= 2 => *i as usize,
            toml::Value::Integer(_) => return Err(CliError::config("sweep.count", "must be at least 2")),
            _ => return Err(CliError::config("sweep.count", "expected an integer")),
        };
        let scale = match sweep.get("scale").map(|v| string(v, "sweep.scale")).transpose()? {
            None | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => return Err(CliError::config("sweep.scale", format!("expected linear or log, got `{other}`"))),
        };
        if !(start.is_finite() && stop.is_finite()) {
            return Err(CliError::config("sweep.start", "start and stop must be finite"));
        }
        if scale == Scale::Log && !(start > 0.0 && stop > 0.0) {
            return Err(CliError::config("sweep.start", "log scale needs positive start and stop"));
        }

        let defaults = model.defaults();
        let mut fixed: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for other in [Model::Gaussian, Model::Poisson, Model::NuisanceGaussian] {
            if other != model && doc.contains_key(other.name()) {
                return Err(CliError::config(other.name(), format!("section does not apply to model {}", model.name())));
            }
        }
        if let Some(sec) = doc.get(model.name()) {
            let sec = sec.as_table().ok_or_else(|| CliError::config(model.name(), "expected a table"))?;
            for (k, v) in sec {
                let key = format!("{}.{k}", model.name());
                if !defaults.contains_key(k.as_str()) && !model.aliases().contains(&k.as_str()) {
                    let mut valid: Vec<&str> = defaults.keys().copied().collect();
                    valid.extend(model.aliases());
                    return Err(CliError::config(key, format!("unknown key; expected one of {}", valid.join(", "))));
                }
                fixed.insert(k.clone(), number(v, &key)?);
            }
        }
        if !defaults.contains_key(param.as_str()) && !model.aliases().contains(&param.as_str()) {
            return Err(CliError::config("sweep.param", format!("`{param}` is not a parameter of model {}", model.name())));
        }
        let cfg = Self { model, quantities, param, start, stop, count, scale, fixed };
        for v in [start, stop] {
            cfg.point(v)?;
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> Vec<f64> {
        match self.scale {
            Scale::Linear => linspace(self.start, self.stop, self.count),
            Scale::Log => logspace(self.start, self.stop, self.count),
        }
    }

    /// Parameters at one sweep value, validated.
    fn point(&self, value: f64) -> Result<Point> {
        let mut p = self.fixed.clone();
        p.insert(self.param.clone(), value);
        let positive = |k: &str, p: &BTreeMap<String, f64>| -> Result<()> {
            if p[k] > 0.0 {
                Ok(())
            } else {
                Err(CliError::config(k, format!("must be positive, got {}", p[k])))
            }
        };
        match self.model {
            Model::Gaussian => {
                positive("var_x", &p)?;
                positive("noise_var", &p)?;
                if let Some(&snr) = p.get("snr") {
                    if snr < 0.0 {
                        return Err(CliError::config("snr", "must be non-negative"));
                    }
                    p.insert("a".into(), (snr * p["noise_var"] / p["var_x"]).sqrt());
                }
                let prior = Prior::gaussian(p["prior_mean"], p["var_x"]).map_err(|e| CliError::config("var_x", e.to_string()))?;
                let channel = Channel::gaussian(p["a"], p["b"], p["noise_var"]).map_err(|e| CliError::config("a", e.to_string()))?;
                let fi_x = p.get("fi_x").copied().unwrap_or(p["prior_mean"]);
                Ok(Point::Scalar { prior, channel, fi_x })
            }
            Model::Poisson => {
                positive("xbar", &p)?;
                if let Some(&s) = p.get("a_xbar") {
                    p.insert("a".into(), s / p["xbar"]);
                }
                positive("a", &p)?;
                if p["b"] < 0.0 {
                    return Err(CliError::config("b", "must be non-negative"));
                }
                let prior = Prior::neg_exp(p["xbar"]).map_err(|e| CliError::config("xbar", e.to_string()))?;
                let channel = Channel::poisson(p["a"], p["b"]).map_err(|e| CliError::config("a", e.to_string()))?;
                let fi_x = p.get("fi_x").copied().unwrap_or(p["xbar"]);
                Ok(Point::Scalar { prior, channel, fi_x })
            }
            Model::NuisanceGaussian => {
                positive("var_u", &p)?;
                positive("noise_var", &p)?;
                if p["var_x_given_u"] < 0.0 {
                    return Err(CliError::config("var_x_given_u", "must be non-negative"));
                }
                let n = NuisanceGaussianParams::new(
                    p["a"],
                    p["b"],
                    p["alpha"],
                    p["var_x_given_u"],
                    p["var_u"],
                    p["u_mean"],
                    p["noise_var"],
                )
                .map_err(|e| CliError::config(self.model.name(), e.to_string()))?;
                Ok(Point::Nuisance(n))
            }
        }
    }

    fn metadata(&self) -> String {
        let fixed: Vec<String> =
            self.fixed.iter().filter(|(k, _)| **k != self.param).map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "infobound sweep: model={} param={} scale={} fixed: {}",
            self.model.name(),
            self.param,
            match self.scale {
                Scale::Linear => "linear",
                Scale::Log => "log",
            },
            fixed.join(" ")
        )
    }
}

enum Point {
    Scalar { prior: Prior, channel: Channel, fi_x: f64 },
    Nuisance(NuisanceGaussianParams),
}

fn evaluate(point: &Point, q: Quantity, cfg: &QuadConfig) -> Result<f64> {
    Ok(match (point, q) {
        (Point::Scalar { prior, channel, .. }, Quantity::MiExact) => mutual_information_exact(prior, channel, cfg)?,
        (Point::Scalar { prior, channel, .. }, Quantity::MiSecondOrder) => mi_second_order(prior, channel, cfg)?,
        (Point::Scalar { prior, channel, .. }, Quantity::Mmse) => mmse(prior, channel, cfg)?,
        (Point::Scalar { prior, channel, .. }, Quantity::MiLowerBound) => mi_lower_bound(prior, channel, cfg)?,
        (Point::Scalar { channel, fi_x, .. }, Quantity::Fi) => fisher_information(channel, *fi_x, cfg)?,
        (Point::Nuisance(p), Quantity::MiPlus) => mi_with_nuisance(p),
        (Point::Nuisance(p), Quantity::MiMinus) => mi_without_nuisance(p),
        (Point::Nuisance(p), Quantity::MmsePlus) => mmse_with_without_nuisance(p).0,
        (Point::Nuisance(p), Quantity::MmseMinus) => mmse_with_without_nuisance(p).1,
        _ => unreachable!("quantities are checked against the model when parsing"),
    })
}

/// Runs the sweep and checks each row's inequalities.
pub fn run_sweep(sc: &SweepConfig, cfg: &QuadConfig) -> Result<Table> {
    let grid = sc.grid();
    let rows: Result<Vec<Vec<f64>>> = grid
        .par_iter()
        .map(|&v| {
            let pt = sc.point(v)?;
            let mut row = vec![v];
            for &q in &sc.quantities {
                row.push(evaluate(&pt, q, cfg)?);
            }
            Ok(row)
        })
        .collect();
    let rows = rows?;
    let mut header: Vec<&str> = vec![sc.param.as_str()];
    header.extend(sc.quantities.iter().map(|q| q.name()));
    let mut t = Table::new(sc.metadata(), &header);
    let col = |q: Quantity| sc.quantities.iter().position(|&x| x == q).map(|i| i + 1);
    for (i, r) in rows.into_iter().enumerate() {
        if let (Some(mi), Some(lb)) = (col(Quantity::MiExact), col(Quantity::MiLowerBound)) {
            if !(r[lb] <= r[mi] + BOUND_SLACK) {
                return Err(CliError::Inconsistent(format!("row {}: mi_lower_bound {} > mi_exact {}", i + 1, r[lb], r[mi])));
            }
        }
        if let (Some(p), Some(m)) = (col(Quantity::MmsePlus), col(Quantity::MmseMinus)) {
            if r[p] < r[m] - ORDERING_SLACK {
                return Err(CliError::Inconsistent(format!("row {}: mmse_plus {} < mmse_minus {}", i + 1, r[p], r[m])));
            }
        }
        t.push(r.into_iter().map(Cell::from).collect());
    }
    Ok(t)
}
