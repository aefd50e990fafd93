//! The correlated two-input Gaussian model `Y = aX + bU + N` with
//! `X | U ~ N(αU, σ_{X|U}²)`, `U ~ N(Ū, σ_U²)`, `N ~ N(0, σ_N²)`.
//!
//! Superscript `+` quantities treat the nuisance `U` as random; `−`
//! quantities hold it fixed and average over its law afterwards.

use serde::{Deserialize, Serialize};

use crate::channels::gaussian_posterior_mean;
use crate::config::QuadConfig;
use crate::error::{domain, Result};
use crate::info::fisher_information;
use crate::model::{Channel, Prior};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuisanceGaussianParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub var_x_given_u: f64,
    pub var_u: f64,
    pub u_mean: f64,
    pub noise_var: f64,
}

impl NuisanceGaussianParams {
    pub fn new(
        a: f64,
        b: f64,
        alpha: f64,
        var_x_given_u: f64,
        var_u: f64,
        u_mean: f64,
        noise_var: f64,
    ) -> Result<Self> {
        let p = Self { a, b, alpha, var_x_given_u, var_u, u_mean, noise_var };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.alpha, self.var_x_given_u, self.var_u, self.u_mean, self.noise_var];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(domain(format!("nuisance parameters must be finite: {self:?}")));
        }
        if self.var_x_given_u < 0.0 {
            return Err(domain(format!("σ_X|U² must be non-negative, got {}", self.var_x_given_u)));
        }
        if self.var_u <= 0.0 {
            return Err(domain(format!("σ_U² must be positive, got {}", self.var_u)));
        }
        if self.noise_var <= 0.0 {
            return Err(domain(format!("σ_N² must be positive, got {}", self.noise_var)));
        }
        Ok(())
    }

    /// `σ_X² = σ_{X|U}² + α²σ_U²`.
    pub fn var_x(&self) -> f64 {
        self.var_x_given_u + self.alpha * self.alpha * self.var_u
    }

    /// `σ_{U|X}² = σ_U² σ_{X|U}² / σ_X²`, or `σ_U²` when `X` is degenerate.
    pub fn var_u_given_x(&self) -> f64 {
        let vx = self.var_x();
        if vx == 0.0 {
            self.var_u
        } else {
            self.var_u * self.var_x_given_u / vx
        }
    }

    /// `σ_{Y|X}² = σ_N² + b²σ_{U|X}²`.
    pub fn var_y_given_x(&self) -> f64 {
        self.noise_var + self.b * self.b * self.var_u_given_x()
    }

    /// `σ_Y² = σ_N² + a²σ_{X|U}² + (aα + b)²σ_U²`.
    pub fn var_y(&self) -> f64 {
        let g = self.a * self.alpha + self.b;
        self.noise_var + self.a * self.a * self.var_x_given_u + g * g * self.var_u
    }

    /// `χ = a²σ_{X|U}²/σ_N²`.
    pub fn chi(&self) -> f64 {
        self.a * self.a * self.var_x_given_u / self.noise_var
    }

    /// `η = αa/b`.
    pub fn eta(&self) -> f64 {
        self.alpha * self.a / self.b
    }

    /// `SNR_U = b²σ_U²/σ_N²`.
    pub fn snr_u(&self) -> f64 {
        self.b * self.b * self.var_u / self.noise_var
    }

    /// Gain of `Y` on `X` once `U` is marginalized: `a + αbσ_U²/σ_X²`.
    pub fn marginal_gain(&self) -> f64 {
        let vx = self.var_x();
        if vx == 0.0 {
            self.a
        } else {
            self.a + self.alpha * self.b * self.var_u / vx
        }
    }

    /// Offset of `Y` given `X` once `U` is marginalized: `bŪσ_{X|U}²/σ_X²`.
    pub fn marginal_bias(&self) -> f64 {
        let vx = self.var_x();
        if vx == 0.0 {
            self.b * self.u_mean
        } else {
            self.b * self.u_mean * self.var_x_given_u / vx
        }
    }

    /// Prior `N(αŪ, σ_X²)` of `X` and the channel `P(y|x)` with `U`
    /// integrated out.
    pub fn marginal_model(&self) -> Result<(Prior, Channel)> {
        let prior = Prior::gaussian(self.alpha * self.u_mean, self.var_x())?;
        let channel = Channel::gaussian(self.marginal_gain(), self.marginal_bias(), self.var_y_given_x())?;
        Ok((prior, channel))
    }
}

/// `I⁺(X;Y) = ½ ln(σ_Y² / σ_{Y|X}²)`.
pub fn mi_with_nuisance(p: &NuisanceGaussianParams) -> f64 {
    0.5 * (p.var_y() / p.var_y_given_x()).ln()
}

/// `I⁻(X;Y) = I(X;Y|U) = ½ ln(1 + a²σ_{X|U}²/σ_N²)`.
pub fn mi_without_nuisance(p: &NuisanceGaussianParams) -> f64 {
    0.5 * p.chi().ln_1p()
}

/// `(MMSE⁺, MMSE⁻)`.
pub fn mmse_with_without_nuisance(p: &NuisanceGaussianParams) -> (f64, f64) {
    let (vxu, vu, n) = (p.var_x_given_u, p.var_u, p.noise_var);
    let (a, b, al) = (p.a, p.b, p.alpha);
    let minus = vxu * n / (a * a * vxu + n);
    let plus = (n * vxu + al * al * n * vu + b * b * vxu * vu) / p.var_y();
    (plus, minus)
}

/// `(X̂_u(y), X̂(y))`: the posterior mean of `X` with `U = u` known, and
/// with `U` unknown.
pub fn mmse_estimators(p: &NuisanceGaussianParams, y: f64, u: f64) -> (f64, f64) {
    let xhat_u = if p.var_x_given_u == 0.0 {
        p.alpha * u
    } else {
        let prec_data = p.a * p.a / p.noise_var;
        let prec_prior = 1.0 / p.var_x_given_u;
        (p.a * (y - p.b * u) / p.noise_var + p.alpha * u * prec_prior) / (prec_data + prec_prior)
    };
    let vx = p.var_x();
    let xhat = if vx == 0.0 {
        p.alpha * p.u_mean
    } else {
        gaussian_posterior_mean(p.alpha * p.u_mean, vx, p.marginal_gain(), p.marginal_bias(), p.var_y_given_x(), y)
    };
    (xhat_u, xhat)
}

/// A 2×2 Fisher information matrix over `(X, U)` with its Cramér–Rao bound
/// for `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiBlockMatrix {
    pub j: [[f64; 2]; 2],
    /// `J_XX − J_XU J_UU⁻¹ J_UX`, or `J_XX` when `J_UU = 0`.
    pub schur: f64,
    /// `(J⁻¹)_XX`; infinite when the Schur complement vanishes.
    pub crb_x: f64,
    /// `J_UU = 0`: the nuisance block cannot be inverted.
    pub nuisance_singular: bool,
}

impl FiBlockMatrix {
    fn from_matrix(j: [[f64; 2]; 2]) -> Self {
        let nuisance_singular = j[1][1] == 0.0;
        let schur = if nuisance_singular {
            j[0][0]
        } else {
            // cancellation-free form of J_XX − J_XU²/J_UU for rank-one data terms
            (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / j[1][1]
        };
        let schur = if schur.abs() <= 1e-14 * j[0][0].abs() { 0.0 } else { schur };
        let crb_x = if schur > 0.0 { 1.0 / schur } else { f64::INFINITY };
        Self { j, schur, crb_x, nuisance_singular }
    }

    /// Whether `(J⁻¹)_XX ≥ (J_XX)⁻¹` holds.
    pub fn crb_inequality_holds(&self) -> bool {
        self.crb_x >= (1.0 - 1e-12) / self.j[0][0]
    }

    pub fn crb_is_infinite(&self) -> bool {
        self.crb_x.is_infinite()
    }
}

/// Data-only FI matrix `[a², ab; ab, b²]/σ_N²`. It is singular whenever both
/// inputs feed one scalar measurement.
pub fn fi_block_matrix(p: &NuisanceGaussianParams) -> FiBlockMatrix {
    let (a, b, n) = (p.a, p.b, p.noise_var);
    let j = [[a * a / n, a * b / n], [a * b / n, b * b / n]];
    let mut m = FiBlockMatrix::from_matrix(j);
    if !m.nuisance_singular {
        m.schur = 0.0;
        m.crb_x = f64::INFINITY;
    }
    m
}

/// Data FI plus the prior FI, the inverse of the joint prior covariance of
/// `(X, U)` (`diag(1/σ_X², 1/σ_U²)` when `α = 0`).
pub fn fi_block_matrix_with_prior(p: &NuisanceGaussianParams) -> Result<FiBlockMatrix> {
    if p.var_x_given_u <= 0.0 {
        return Err(domain("prior FI needs σ_X|U² > 0"));
    }
    let data = fi_block_matrix(p).j;
    let (vxu, vu, al) = (p.var_x_given_u, p.var_u, p.alpha);
    let prior = [[1.0 / vxu, -al / vxu], [-al / vxu, 1.0 / vu + al * al / vxu]];
    let mut j = data;
    for r in 0..2 {
        for c in 0..2 {
            j[r][c] += prior[r][c];
        }
    }
    Ok(FiBlockMatrix::from_matrix(j))
}

/// `(J⁺, J⁻)` for independent input and nuisance: `J⁺` is the FI of the
/// channel with `U` integrated out, `J⁻` the `U`-average of the FI with `U`
/// known. Both are computed as output-space expectations.
pub fn fi_marginalized_vs_conditional(p: &NuisanceGaussianParams, cfg: &QuadConfig) -> Result<(f64, f64)> {
    if p.alpha != 0.0 {
        return Err(domain("marginalized-vs-conditional FI needs independent input and nuisance (α = 0)"));
    }
    let x0 = 0.0;
    let marginal = Channel::gaussian(p.a, p.b * p.u_mean, p.noise_var + p.b * p.b * p.var_u)?;
    let j_plus = fisher_information(&marginal, x0, cfg)?;
    let pu = Prior::gaussian(p.u_mean, p.var_u)?;
    let j_minus = pu.expect(
        |u| {
            let c = Channel::gaussian(p.a, p.b * u, p.noise_var)?;
            fisher_information(&c, x0, cfg)
        },
        cfg,
    )?;
    Ok((j_plus, j_minus))
}
