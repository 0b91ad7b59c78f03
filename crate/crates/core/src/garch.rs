//! GARCH(p,q) model family: parameter containers, validation, moment
//! conditions, path simulation, and random parameter generation.
//!
//! A GARCH(p,q) process is
//!
//! ```text
//! X_t = sigma_t Z_t,
//! sigma2_t = omega + sum_i alpha_i X2_{t-i} + sum_j beta_j sigma2_{t-j},
//! ```
//!
//! with non-negative coefficients and i.i.d. innovations Z_t of zero mean and
//! unit variance. Under variance targeting the intercept is re-expressed
//! through the unconditional variance gamma2, with
//! `omega = gamma2 * (1 - sum(alpha) - sum(beta))`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lag orders (p, q) of a GARCH model; ARCH(p) is the q = 0 case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOrder {
    /// Number of squared-return lags.
    pub p: usize,
    /// Number of variance lags.
    pub q: usize,
}

impl ModelOrder {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p + q == 0 {
            return Err(Error::InvalidOrder { p, q });
        }
        Ok(Self { p, q })
    }

    /// Dimension of the full parameter vector (omega, alpha_1..p, beta_1..q).
    pub fn dim_full(&self) -> usize {
        self.p + self.q + 1
    }

    /// Dimension of the variance-targeting vector (alpha_1..p, beta_1..q).
    pub fn dim_vte(&self) -> usize {
        self.p + self.q
    }
}

/// Full GARCH parameter vector theta = (omega, alpha_1..alpha_p, beta_1..beta_q).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl GarchParams {
    pub fn new(omega: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        Self { omega, alpha, beta }
    }

    /// ARCH(p) shorthand (no variance lags).
    pub fn arch(omega: f64, alpha: Vec<f64>) -> Self {
        Self::new(omega, alpha, Vec::new())
    }

    pub fn order(&self) -> Result<ModelOrder> {
        ModelOrder::new(self.alpha.len(), self.beta.len())
    }

    /// sum(alpha) + sum(beta).
    pub fn persistence(&self) -> f64 {
        self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>()
    }

    /// Unconditional variance omega / (1 - persistence), defined when the
    /// second-order stationarity condition holds.
    pub fn long_run_variance(&self) -> Option<f64> {
        let s = self.persistence();
        (s < 1.0).then(|| self.omega / (1.0 - s))
    }

    /// Check the coefficient invariants: omega > 0 and alpha, beta >= 0.
    /// With `require_k` set, additionally enforce sum(alpha) + sum(beta) < 1.
    pub fn validate(&self, require_k: bool) -> Result<&Self> {
        self.order()?;
        if !(self.omega > 0.0) {
            return Err(Error::NonNegativityViolation {
                what: format!("omega = {} must be > 0", self.omega),
            });
        }
        for (name, coeffs) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            for (i, &c) in coeffs.iter().enumerate() {
                if !(c >= 0.0) {
                    return Err(Error::NonNegativityViolation {
                        what: format!("{}[{}] = {} must be >= 0", name, i + 1, c),
                    });
                }
            }
        }
        let s = self.persistence();
        if require_k && s >= 1.0 {
            return Err(Error::StationarityViolation { sum: s });
        }
        Ok(self)
    }

    /// Re-parameterize through the unconditional variance. Requires
    /// membership in K (persistence < 1) so that gamma2 is finite.
    pub fn to_vte(&self) -> Result<VteParams> {
        self.validate(true)?;
        Ok(VteParams {
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            gamma2: self.omega / (1.0 - self.persistence()),
        })
    }
}

/// Variance-targeting parameter vector: (alpha, beta) on the capped simplex
/// paired with the unconditional variance gamma2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VteParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma2: f64,
}

impl VteParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, gamma2: f64) -> Self {
        Self { alpha, beta, gamma2 }
    }

    pub fn order(&self) -> Result<ModelOrder> {
        ModelOrder::new(self.alpha.len(), self.beta.len())
    }

    pub fn persistence(&self) -> f64 {
        self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>()
    }

    /// omega implied by the reparameterization: gamma2 * (1 - persistence).
    pub fn implied_omega(&self) -> f64 {
        self.gamma2 * (1.0 - self.persistence())
    }

    pub fn validate(&self) -> Result<&Self> {
        self.order()?;
        if !(self.gamma2 > 0.0) {
            return Err(Error::NonNegativityViolation {
                what: format!("gamma2 = {} must be > 0", self.gamma2),
            });
        }
        for (name, coeffs) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            for (i, &c) in coeffs.iter().enumerate() {
                if !(c >= 0.0) {
                    return Err(Error::NonNegativityViolation {
                        what: format!("{}[{}] = {} must be >= 0", name, i + 1, c),
                    });
                }
            }
        }
        let s = self.persistence();
        if s >= 1.0 {
            return Err(Error::StationarityViolation { sum: s });
        }
        Ok(self)
    }

    pub fn to_full(&self) -> GarchParams {
        GarchParams {
            omega: self.implied_omega(),
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
        }
    }
}

/// A parameter vector in either parameterization, as consumed by the batch
/// objective and the rolling baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Full(GarchParams),
    Vte(VteParams),
}

impl ModelParams {
    pub fn order(&self) -> Result<ModelOrder> {
        match self {
            ModelParams::Full(p) => p.order(),
            ModelParams::Vte(p) => p.order(),
        }
    }

    /// Gradient dimension: p + q + 1 for the full vector, p + q under
    /// variance targeting.
    pub fn dim(&self) -> usize {
        match self {
            ModelParams::Full(p) => p.alpha.len() + p.beta.len() + 1,
            ModelParams::Vte(p) => p.alpha.len() + p.beta.len(),
        }
    }

    pub fn validate(&self, require_k: bool) -> Result<&Self> {
        match self {
            ModelParams::Full(p) => {
                p.validate(require_k)?;
            }
            ModelParams::Vte(p) => {
                p.validate()?;
            }
        }
        Ok(self)
    }
}

/// A simulated GARCH path: observations and the true conditional variances
/// that generated them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimOutput {
    pub returns: Vec<f64>,
    pub true_vol2: Vec<f64>,
    pub seed: u64,
}

/// Check the finite-fourth-moment condition for ARCH(1)/GARCH(1,1):
/// `(alpha_1 + beta_1)^2 + (kurtosis - 1) * alpha_1^2 < 1`, where `kurtosis`
/// is E[Z^4] of the innovations (3 for Gaussian). beta_1 is taken as 0 for
/// ARCH(1).
pub fn fourth_moment_ok(params: &GarchParams, kurtosis: f64) -> Result<bool> {
    let (p, q) = (params.alpha.len(), params.beta.len());
    if p > 1 || q > 1 {
        return Err(Error::UnsupportedOrder { p, q });
    }
    let a1 = params.alpha.first().copied().unwrap_or(0.0);
    let b1 = params.beta.first().copied().unwrap_or(0.0);
    Ok((a1 + b1).powi(2) + (kurtosis - 1.0) * a1 * a1 < 1.0)
}

/// Monte Carlo estimate of E[log(alpha_1 Z^2 + beta_1)] with standard
/// Gaussian Z. A negative value indicates strict stationarity of the
/// GARCH(1,1) (or ARCH(1)) process; the condition is much weaker than
/// `alpha_1 + beta_1 < 1`.
pub fn strict_stationarity_estimate(
    params: &GarchParams,
    mc_draws: usize,
    seed: u64,
) -> Result<f64> {
    let (p, q) = (params.alpha.len(), params.beta.len());
    if p > 1 || q > 1 {
        return Err(Error::UnsupportedOrder { p, q });
    }
    let a1 = params.alpha.first().copied().unwrap_or(0.0);
    let b1 = params.beta.first().copied().unwrap_or(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..mc_draws.max(1) {
        let z: f64 = rng.sample(StandardNormal);
        acc += (a1 * z * z + b1).max(f64::MIN_POSITIVE).ln();
    }
    Ok(acc / mc_draws.max(1) as f64)
}

/// Simulate a GARCH(p,q) path with Gaussian innovations.
///
/// The recursion starts from the long-run variance omega / (1 - persistence);
/// `burn_in` leading steps are generated and discarded so the retained path
/// carries no initialization transient. Deterministic given `seed`.
pub fn simulate(params: &GarchParams, n: usize, burn_in: usize, seed: u64) -> Result<SimOutput> {
    params.validate(false)?;
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let s = params.persistence();
    if s >= 1.0 {
        return Err(Error::StationarityViolation { sum: s });
    }
    let v0 = params.omega / (1.0 - s);
    let (p, q) = (params.alpha.len(), params.beta.len());
    // Lags seeded at the stationary values: E[X^2] = E[sigma^2] = v0.
    let mut lag_x2 = vec![v0; p];
    let mut lag_v = vec![v0; q];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut returns = Vec::with_capacity(n);
    let mut true_vol2 = Vec::with_capacity(n);
    for t in 0..burn_in + n {
        let mut v = params.omega;
        for (a, x2) in params.alpha.iter().zip(&lag_x2) {
            v += a * x2;
        }
        for (b, lv) in params.beta.iter().zip(&lag_v) {
            v += b * lv;
        }
        let z: f64 = rng.sample(StandardNormal);
        let x = v.sqrt() * z;
        if p > 0 {
            lag_x2.rotate_right(1);
            lag_x2[0] = x * x;
        }
        if q > 0 {
            lag_v.rotate_right(1);
            lag_v[0] = v;
        }
        if t >= burn_in {
            returns.push(x);
            true_vol2.push(v);
        }
    }
    Ok(SimOutput { returns, true_vol2, seed })
}

/// Draw a random parameter vector covering a broad domain while staying in
/// the stationary set K: omega = U * 10^{-tau} with U ~ Uniform(0,1] and tau
/// uniform on {1,..,8}; each of (alpha, beta) is drawn Uniform(0,1) and the
/// block is rejection-sampled until its sum is below one.
pub fn random_params(order: ModelOrder, seed: u64) -> GarchParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau: i32 = rng.random_range(1..=8);
    let u = 1.0 - rng.random::<f64>(); // (0, 1]
    let omega = u * 10f64.powi(-tau);
    let d = order.p + order.q;
    let coeffs = loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        if v.iter().sum::<f64>() < 1.0 {
            break v;
        }
    };
    GarchParams {
        omega,
        alpha: coeffs[..order.p].to_vec(),
        beta: coeffs[order.p..].to_vec(),
    }
}
