//! Data for the four figures: Poisson MI and its MMSE lower bound against
//! gain and bias, nuisance MI against coupling strength, and nuisance MMSE
//! against χ.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use infobound_core::bounds::mi_lower_bound_from;
use infobound_core::channels::PoissonNegExp;
use infobound_core::nuisance::{mi_with_nuisance, mi_without_nuisance, mmse_with_without_nuisance};
use infobound_core::{NuisanceGaussianParams, QuadConfig};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::table::{linspace, logspace, Cell, Table};

/// Slack for `bound ≤ exact` on figure rows.
pub const BOUND_SLACK: f64 = 1e-9;
/// Slack for `MMSE⁺ ≥ MMSE⁻` and `I⁻ ≥ I⁺` on figure rows.
pub const ORDERING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    One,
    Two,
    Three,
    Four,
}

impl Figure {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Figure::One),
            2 => Ok(Figure::Two),
            3 => Ok(Figure::Three),
            4 => Ok(Figure::Four),
            _ => Err(CliError::Usage(format!("figure must be 1, 2, 3 or 4, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Figure::One => 1,
            Figure::Two => 2,
            Figure::Three => 3,
            Figure::Four => 4,
        }
    }

    /// Default parameters. List-valued keys hold one curve per entry.
    pub fn defaults(self) -> BTreeMap<&'static str, Vec<f64>> {
        let entries: Vec<(&'static str, Vec<f64>)> = match self {
            Figure::One => vec![
                ("a_xbar_min", vec![0.5]),
                ("a_xbar_max", vec![200.0]),
                ("points", vec![60.0]),
                ("b", vec![0.0, 50.0, 100.0]),
                ("xbar", vec![1.0]),
            ],
            Figure::Two => vec![
                ("b_min", vec![0.0]),
                ("b_max", vec![200.0]),
                ("points", vec![60.0]),
                ("a_xbar", vec![5.0, 20.0, 80.0]),
                ("xbar", vec![1.0]),
            ],
            Figure::Three => vec![
                ("b_over_a_max", vec![10.0]),
                ("s_xu_max", vec![10.0]),
                ("points", vec![60.0]),
                ("alpha", vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0]),
                ("s_u", vec![5.0]),
                ("s_xu", vec![1.0]),
                ("b_over_a", vec![1.0]),
            ],
            Figure::Four => vec![
                ("chi_min", vec![0.01]),
                ("chi_max", vec![100.0]),
                ("points", vec![80.0]),
                ("eta", vec![0.0, 0.5, 1.0, 2.0]),
                ("snr_u", vec![10.0, 100.0]),
            ],
        };
        entries.into_iter().collect()
    }
}

/// Resolved figure parameters after applying `key=value` overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureParams {
    figure: Figure,
    values: BTreeMap<&'static str, Vec<f64>>,
}

impl FigureParams {
    pub fn defaults(figure: Figure) -> Self {
        Self { figure, values: figure.defaults() }
    }

    /// Applies overrides of the form `key=v` or `key=v1,v2,...`.
    pub fn with_overrides<S: AsRef<str>>(mut self, overrides: &[S]) -> Result<Self> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("override `{o}` is not of the form key=value")))?;
            let k = k.trim();
            let slot = self.values.iter_mut().find(|(key, _)| **key == k).map(|(_, v)| v).ok_or_else(|| {
                let keys: Vec<&str> = self.figure.defaults().into_keys().collect();
                CliError::Usage(format!(
                    "unknown override `{k}` for fig {}; valid keys: {}",
                    self.figure.number(),
                    keys.join(", ")
                ))
            })?;
            let parsed: std::result::Result<Vec<f64>, _> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let parsed = parsed.map_err(|_| CliError::Usage(format!("override `{k}`: cannot parse `{v}` as numbers")))?;
            if parsed.is_empty() || parsed.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Usage(format!("override `{k}`: values must be finite")));
            }
            *slot = parsed;
        }
        self.validate()?;
        Ok(self)
    }

    /// Replaces the α list of figure 3.
    pub fn with_alpha(mut self, alpha: &[f64]) -> Result<Self> {
        if alpha.is_empty() {
            return Ok(self);
        }
        if self.figure != Figure::Three {
            return Err(CliError::Usage("--alpha applies to fig 3 only".into()));
        }
        self.values.insert("alpha", alpha.to_vec());
        self.validate()?;
        Ok(self)
    }

    pub fn figure(&self) -> Figure {
        self.figure
    }

    pub fn list(&self, key: &str) -> &[f64] {
        &self.values[key]
    }

    pub fn scalar(&self, key: &str) -> f64 {
        self.values[key][0]
    }

    fn points(&self) -> usize {
        self.scalar("points") as usize
    }

    fn validate(&self) -> Result<()> {
        let bad = |k: &str, why: &str| Err(CliError::Usage(format!("override `{k}`: {why}")));
        for (k, v) in &self.values {
            if v.len() > 1 && !matches!(*k, "b" | "a_xbar" | "alpha" | "eta" | "snr_u") {
                return bad(k, "takes a single value");
            }
        }
        let p = self.scalar("points");
        if p < 2.0 || p.fract() != 0.0 {
            return bad("points", "must be an integer ≥ 2");
        }
        match self.figure {
            Figure::One => {
                if !(self.scalar("a_xbar_min") > 0.0 && self.scalar("a_xbar_max") > self.scalar("a_xbar_min")) {
                    return bad("a_xbar_min", "need 0 < a_xbar_min < a_xbar_max");
                }
                if self.list("b").iter().any(|&b| b < 0.0) {
                    return bad("b", "bias must be non-negative");
                }
                if self.scalar("xbar") <= 0.0 {
                    return bad("xbar", "must be positive");
                }
            }
            Figure::Two => {
                if !(self.scalar("b_min") >= 0.0 && self.scalar("b_max") > self.scalar("b_min")) {
                    return bad("b_min", "need 0 ≤ b_min < b_max");
                }
                if self.list("a_xbar").iter().any(|&s| s <= 0.0) {
                    return bad("a_xbar", "must be positive");
                }
                if self.scalar("xbar") <= 0.0 {
                    return bad("xbar", "must be positive");
                }
            }
            Figure::Three => {
                for k in ["b_over_a_max", "s_xu_max", "s_u"] {
                    if self.scalar(k) <= 0.0 {
                        return bad(k, "must be positive");
                    }
                }
                for k in ["s_xu", "b_over_a"] {
                    if self.scalar(k) < 0.0 {
                        return bad(k, "must be non-negative");
                    }
                }
            }
            Figure::Four => {
                if !(self.scalar("chi_min") > 0.0 && self.scalar("chi_max") > self.scalar("chi_min")) {
                    return bad("chi_min", "need 0 < chi_min < chi_max");
                }
                if self.list("snr_u").iter().any(|&s| s <= 0.0) {
                    return bad("snr_u", "must be positive");
                }
            }
        }
        Ok(())
    }

    fn metadata(&self, note: &str) -> String {
        let mut s = format!("infobound fig {}:", self.figure.number());
        for (k, v) in &self.values {
            let vals: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            let _ = write!(s, " {k}={}", vals.join(","));
        }
        if !note.is_empty() {
            let _ = write!(s, "; {note}");
        }
        s
    }
}

/// Builds the figure table and checks every row's inequality before
/// returning it.
pub fn build_figure(params: &FigureParams, cfg: &QuadConfig) -> Result<Table> {
    let table = match params.figure {
        Figure::One => fig1(params, cfg)?,
        Figure::Two => fig2(params, cfg)?,
        Figure::Three => fig3(params)?,
        Figure::Four => fig4(params)?,
    };
    validate_rows(params.figure, &table)?;
    Ok(table)
}

/// `(mi_exact, mi_lower_bound)` for the negative-exponential prior and
/// Poisson channel.
fn poisson_pair(xbar: f64, a_xbar: f64, b: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    let m = PoissonNegExp::new(xbar, a_xbar / xbar, b)?;
    let mi = m.mi(cfg)?;
    let h_x = 1.0 + xbar.ln();
    Ok((mi, mi_lower_bound_from(h_x, m.mmse(cfg)?)?))
}

fn fig1(p: &FigureParams, cfg: &QuadConfig) -> Result<Table> {
    let xbar = p.scalar("xbar");
    let grid = logspace(p.scalar("a_xbar_min"), p.scalar("a_xbar_max"), p.points());
    let jobs: Vec<(f64, f64)> = p.list("b").iter().flat_map(|&b| grid.iter().map(move |&s| (s, b))).collect();
    let rows: Result<Vec<Vec<Cell>>> = jobs
        .par_iter()
        .map(|&(s, b)| {
            let (mi, lb) = poisson_pair(xbar, s, b, cfg)?;
            Ok(vec![s.into(), b.into(), mi.into(), lb.into()])
        })
        .collect();
    let mut t = Table::new(p.metadata("negative-exponential prior, Poisson channel"), &["a_xbar", "b", "mi_exact", "mi_lower_bound"]);
    rows?.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

fn fig2(p: &FigureParams, cfg: &QuadConfig) -> Result<Table> {
    let xbar = p.scalar("xbar");
    let grid = linspace(p.scalar("b_min"), p.scalar("b_max"), p.points());
    let jobs: Vec<(f64, f64)> = p.list("a_xbar").iter().flat_map(|&s| grid.iter().map(move |&b| (b, s))).collect();
    let rows: Result<Vec<Vec<Cell>>> = jobs
        .par_iter()
        .map(|&(b, s)| {
            let (mi, lb) = poisson_pair(xbar, s, b, cfg)?;
            Ok(vec![b.into(), s.into(), mi.into(), lb.into()])
        })
        .collect();
    let mut t = Table::new(p.metadata("negative-exponential prior, Poisson channel"), &["b", "a_xbar", "mi_exact", "mi_lower_bound"]);
    rows?.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// Nuisance model with `a = σ_N² = 1`, `σ_U² = S_U`, `σ_X|U² = S_X|U`.
fn fig3_model(b_over_a: f64, alpha: f64, s_xu: f64, s_u: f64) -> Result<NuisanceGaussianParams> {
    Ok(NuisanceGaussianParams::new(1.0, b_over_a, alpha, s_xu, s_u, 0.0, 1.0)?)
}

fn fig3(p: &FigureParams) -> Result<Table> {
    let n = p.points();
    let s_u = p.scalar("s_u");
    let mut t = Table::new(
        p.metadata("a=1 noise_var=1; s_xu and b_over_a are the values held fixed in the other sweep"),
        &["sweep", "sweep_var", "alpha", "mi_plus", "mi_minus"],
    );
    for &alpha in p.list("alpha") {
        for r in linspace(0.0, p.scalar("b_over_a_max"), n) {
            let m = fig3_model(r, alpha, p.scalar("s_xu"), s_u)?;
            t.push(vec!["b_over_a".into(), r.into(), alpha.into(), mi_with_nuisance(&m).into(), mi_without_nuisance(&m).into()]);
        }
    }
    for &alpha in p.list("alpha") {
        for s in linspace(0.0, p.scalar("s_xu_max"), n) {
            let m = fig3_model(p.scalar("b_over_a"), alpha, s, s_u)?;
            t.push(vec!["s_xu".into(), s.into(), alpha.into(), mi_with_nuisance(&m).into(), mi_without_nuisance(&m).into()]);
        }
    }
    Ok(t)
}

/// Nuisance model with `a = b = σ_N² = 1`, so that `χ = σ_X|U²`,
/// `η = α` and `SNR_U = σ_U²`.
pub fn fig4_model(chi: f64, eta: f64, snr_u: f64) -> Result<NuisanceGaussianParams> {
    Ok(NuisanceGaussianParams::new(1.0, 1.0, eta, chi, snr_u, 0.0, 1.0)?)
}

fn fig4(p: &FigureParams) -> Result<Table> {
    let grid = logspace(p.scalar("chi_min"), p.scalar("chi_max"), p.points());
    let mut t = Table::new(p.metadata("a=1 b=1 noise_var=1"), &["chi", "eta", "snr_u", "mmse_plus", "mmse_minus"]);
    for &snr_u in p.list("snr_u") {
        for &eta in p.list("eta") {
            for &chi in &grid {
                let (plus, minus) = mmse_with_without_nuisance(&fig4_model(chi, eta, snr_u)?);
                t.push(vec![chi.into(), eta.into(), snr_u.into(), plus.into(), minus.into()]);
            }
        }
    }
    Ok(t)
}

fn num(t: &Table, row: &[Cell], col: &str) -> f64 {
    t.column_index(col).and_then(|i| row[i].as_f64()).unwrap_or(f64::NAN)
}

fn validate_rows(fig: Figure, t: &Table) -> Result<()> {
    for (i, r) in t.rows.iter().enumerate() {
        let fail = match fig {
            Figure::One | Figure::Two => {
                let (mi, lb) = (num(t, r, "mi_exact"), num(t, r, "mi_lower_bound"));
                (!(lb <= mi + BOUND_SLACK)).then(|| format!("mi_lower_bound {lb} > mi_exact {mi}"))
            }
            Figure::Three => {
                let (plus, minus, alpha) = (num(t, r, "mi_plus"), num(t, r, "mi_minus"), num(t, r, "alpha"));
                (alpha == 0.0 && minus < plus - ORDERING_SLACK).then(|| format!("mi_minus {minus} < mi_plus {plus} at alpha 0"))
            }
            Figure::Four => {
                let (plus, minus) = (num(t, r, "mmse_plus"), num(t, r, "mmse_minus"));
                (plus < minus - ORDERING_SLACK).then(|| format!("mmse_plus {plus} < mmse_minus {minus}"))
            }
        };
        if let Some(msg) = fail {
            return Err(CliError::Inconsistent(format!("fig {} row {}: {msg}", fig.number(), i + 1)));
        }
    }
    Ok(())
}
