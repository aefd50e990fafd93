use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::{gaussian_entropy_of_mmse, mi_lower_bound_from};
use crate::config::QuadConfig;
use crate::error::Result;
use crate::estimate::mmse;
use crate::info::{differential_entropy, fi_profile, mi_second_order, mutual_information_exact, FiProfile};
use crate::model::{Channel, Prior};

pub const FLAG_MMSE_BELOW_PRIOR_VARIANCE: &str = "mmse_le_prior_variance";
pub const FLAG_MI_ABOVE_LOWER_BOUND: &str = "mi_ge_lower_bound";
pub const FLAG_EQUIVOCATION_BOUND: &str = "equivocation_le_bound";

/// Quantities computed for one prior and channel, with the inequalities they
/// are expected to satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub h_x: f64,
    pub mi_exact: f64,
    pub mi_second_order: f64,
    pub mmse: f64,
    pub mi_lower_bound: f64,
    pub fi_profile: FiProfile,
    pub flags: BTreeMap<String, bool>,
}

impl InfoReport {
    pub fn compute(p: &Prior, c: &Channel, fi_xs: &[f64], cfg: &QuadConfig) -> Result<Self> {
        let h_x = differential_entropy(p, cfg)?;
        let mi_exact = mutual_information_exact(p, c, cfg)?;
        let mi_so = mi_second_order(p, c, cfg)?;
        let m = mmse(p, c, cfg)?;
        let lb = mi_lower_bound_from(h_x, m)?;
        let fi = fi_profile(c, fi_xs, cfg)?;
        let mut flags = BTreeMap::new();
        flags.insert(FLAG_MMSE_BELOW_PRIOR_VARIANCE.to_owned(), m <= p.variance() + 1e-9);
        flags.insert(FLAG_MI_ABOVE_LOWER_BOUND.to_owned(), mi_exact >= lb - 1e-6);
        flags.insert(FLAG_EQUIVOCATION_BOUND.to_owned(), h_x - mi_exact <= gaussian_entropy_of_mmse(m) + 1e-6);
        Ok(Self { h_x, mi_exact, mi_second_order: mi_so, mmse: m, mi_lower_bound: lb, fi_profile: fi, flags })
    }

    pub fn all_satisfied(&self) -> bool {
        self.flags.values().all(|&v| v)
    }
}
