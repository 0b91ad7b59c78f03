//! Adaptive recursive QML estimation for GARCH models under variance
//! targeting.
//!
//! Each observation triggers one pass of:
//!
//! ```text
//! mu_t, gamma2_t     <- streaming mean / variance recursions
//! g_t                <- grad of the QL loss at theta_{t-1}, using the
//!                       one-step-ahead variance predicted without X_t
//! G_t                <- G_{t-1} + g_t (.)  g_t
//! theta_t            <- P_K[ theta_{t-1} - eta * g_t / sqrt(G_t) ]
//! sigma2_{t+1}       <- variance-targeting recursion at (theta_t, gamma2_t)
//! ```
//!
//! with `P_K` the Euclidean projection onto the capped simplex
//! `{theta >= 0, sum(theta) <= 1 - margin}`. The first variance is
//! initialized to X_1^2, which forces a zero first gradient. Per-update cost
//! is O(p + q).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{FilterState, VARIANCE_FLOOR};
use crate::garch::ModelOrder;
use crate::loss::loss_gradient;

/// Which mean/variance recursion drives the variance-targeting level.
///
/// `Standard` keeps the exact running sample mean and (biased, 1/t) sample
/// variance. `Paper` uses the weighting
/// `mu_t = t/(t+1) mu_{t-1} + X_t/(t+1)`,
/// `gamma2_t = (t-1)/t gamma2_{t-1} + (X_t - mu_t)^2/t`,
/// which shades the mean toward zero (mu_1 = X_1/2) and is kept as a
/// compatibility option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanRecursion {
    #[default]
    Standard,
    Paper,
}

impl std::str::FromStr for MeanRecursion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(MeanRecursion::Standard),
            "paper" => Ok(MeanRecursion::Paper),
            other => Err(Error::InvalidConfig(format!(
                "unknown mean recursion '{other}' (expected 'standard' or 'paper')"
            ))),
        }
    }
}

/// Streaming estimates of the observation mean and (biased) variance.
#[derive(Debug, Clone)]
pub struct StreamingMoments {
    mode: MeanRecursion,
    t: usize,
    mean: f64,
    var: f64,
    m2: f64,
}

impl StreamingMoments {
    pub fn new(mode: MeanRecursion) -> Self {
        Self { mode, t: 0, mean: 0.0, var: 0.0, m2: 0.0 }
    }

    pub fn update(&mut self, x: f64) {
        self.t += 1;
        let t = self.t as f64;
        match self.mode {
            MeanRecursion::Standard => {
                // Welford: exact running mean and 1/t variance.
                let d = x - self.mean;
                self.mean += d / t;
                self.m2 += d * (x - self.mean);
                self.var = self.m2 / t;
            }
            MeanRecursion::Paper => {
                self.mean = t / (t + 1.0) * self.mean + x / (t + 1.0);
                self.var = (t - 1.0) / t * self.var + (x - self.mean).powi(2) / t;
            }
        }
    }

    pub fn count(&self) -> usize {
        self.t
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Biased (1/t) variance estimate; 0 before the first observation.
    pub fn var(&self) -> f64 {
        self.var
    }
}

/// Optional stop rule for [`run_stream`]: stop once
/// `max |theta_t - theta_{t-window}| < tol`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EarlyStop {
    pub window: usize,
    pub tol: f64,
}

/// Tuning and model configuration of the streaming estimator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaVolConfig {
    /// AdaGrad learning rate.
    pub eta: f64,
    /// AdaGrad stabilizer; the squared-gradient accumulator starts at this
    /// value, so effective steps are at most eta / sqrt(eps).
    pub eps: f64,
    pub order: ModelOrder,
    /// Strictness gap of the feasible set: sum(theta) <= 1 - margin.
    pub margin: f64,
    pub mean_recursion: MeanRecursion,
    /// Number of consecutive loss gradients averaged per AdaGrad step.
    pub minibatch: usize,
    pub early_stop: Option<EarlyStop>,
}

impl AdaVolConfig {
    pub fn new(order: ModelOrder) -> Self {
        Self {
            eta: 0.1,
            eps: 1e-8,
            order,
            margin: 1e-6,
            mean_recursion: MeanRecursion::Standard,
            minibatch: 1,
            early_stop: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::InvalidConfig(format!("eta = {} must be > 0", self.eta)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidConfig(format!("eps = {} must be > 0", self.eps)));
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "margin = {} must lie in (0, 1)",
                self.margin
            )));
        }
        if self.minibatch == 0 {
            return Err(Error::InvalidConfig("minibatch must be >= 1".into()));
        }
        if let Some(es) = &self.early_stop {
            if es.window == 0 || !(es.tol > 0.0) {
                return Err(Error::InvalidConfig(
                    "early stop needs window >= 1 and tol > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Euclidean projection onto `{x >= 0, sum(x) <= cap}`.
///
/// Clipping negatives is the projection whenever the clipped point already
/// satisfies the cap; otherwise the point is projected onto the face
/// `{x >= 0, sum(x) = cap}` by sort-and-threshold water-filling.
pub fn project(v: &[f64], cap: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= cap {
        return clipped;
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let tk = (cumsum - cap) / (k + 1) as f64;
        if uk - tk > 0.0 {
            theta = tk;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Streaming estimator state: current VTE parameter estimate, the AdaGrad
/// accumulator, the targeting moments, and the one-step-ahead variance
/// prediction. Single-owner and mutable; one state per series.
#[derive(Debug, Clone)]
pub struct AdaVol {
    cfg: AdaVolConfig,
    theta: Vec<f64>,
    accum_g2: Vec<f64>,
    moments: StreamingMoments,
    filter: FilterState,
    /// sigma2_t: the variance prediction for the step being processed.
    cur_vol2: f64,
    /// grad sigma2_t with respect to theta.
    cur_grad: Vec<f64>,
    t: usize,
    batch_grad: Vec<f64>,
    batch_len: usize,
}

impl AdaVol {
    /// Initialize with a VTE start vector theta0 = (alpha.., beta..). An
    /// infeasible start is projected onto the capped simplex first.
    pub fn new(theta0: &[f64], cfg: AdaVolConfig) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.order.dim_vte();
        if theta0.len() != d {
            return Err(Error::InvalidConfig(format!(
                "theta0 has {} components, order ({},{}) needs {}",
                theta0.len(),
                cfg.order.p,
                cfg.order.q,
                d
            )));
        }
        if theta0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("theta0 must be finite".into()));
        }
        let theta = project(theta0, 1.0 - cfg.margin);
        let filter = FilterState::vte(cfg.order, 0.0);
        Ok(Self {
            accum_g2: vec![cfg.eps; d],
            moments: StreamingMoments::new(cfg.mean_recursion),
            filter,
            cur_vol2: 0.0,
            cur_grad: vec![0.0; d],
            t: 0,
            batch_grad: vec![0.0; d],
            batch_len: 0,
            theta,
            cfg,
        })
    }

    pub fn config(&self) -> &AdaVolConfig {
        &self.cfg
    }

    /// Current estimate (alpha_1..p, beta_1..q); always in the capped simplex.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Streaming mean of the observations.
    pub fn mean(&self) -> f64 {
        self.moments.mean()
    }

    /// Streaming variance-targeting level gamma2_t.
    pub fn gamma2(&self) -> f64 {
        self.moments.var()
    }

    /// AdaGrad squared-gradient accumulator (componentwise >= eps).
    pub fn accum_g2(&self) -> &[f64] {
        &self.accum_g2
    }

    /// One-step-ahead variance prediction sigma2_{t+1}, made without the
    /// next observation. Meaningful once at least one update has run.
    pub fn predicted_vol2(&self) -> f64 {
        self.cur_vol2
    }

    /// Intercept implied by the targeting level: gamma2_t (1 - sum theta_t).
    pub fn implied_omega(&self) -> f64 {
        self.gamma2() * (1.0 - self.theta.iter().sum::<f64>())
    }

    /// Process one observation; returns the variance prediction for the next
    /// step, sigma2_{t+1}.
    pub fn update(&mut self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFiniteInput { t: self.t + 1, value: x });
        }
        self.t += 1;
        self.moments.update(x);
        let gamma2 = self.moments.var().max(VARIANCE_FLOOR);

        if self.t == 1 {
            // Table-style initialization: the first variance is X_1^2, so the
            // first loss gradient vanishes and theta_1 = theta_0.
            self.cur_vol2 = (x * x).max(VARIANCE_FLOOR);
            self.cur_grad.iter_mut().for_each(|g| *g = 0.0);
        }

        let g = loss_gradient(x, self.cur_vol2, &self.cur_grad)?;
        self.batch_len += 1;
        for (acc, gi) in self.batch_grad.iter_mut().zip(&g) {
            *acc += gi;
        }
        if self.batch_len == self.cfg.minibatch {
            let inv_b = 1.0 / self.batch_len as f64;
            for k in 0..self.theta.len() {
                let gbar = self.batch_grad[k] * inv_b;
                self.accum_g2[k] += gbar * gbar;
                self.theta[k] -= self.cfg.eta * gbar / self.accum_g2[k].sqrt();
            }
            self.theta = project(&self.theta, 1.0 - self.cfg.margin);
            self.batch_grad.iter_mut().for_each(|g| *g = 0.0);
            self.batch_len = 0;
        }

        // Advance the filter: X_t^2 and the consumed (sigma2_t, grad) become
        // lags, then predict step t+1 under the updated theta and gamma2.
        self.filter.set_fills(gamma2, gamma2);
        self.filter.observe(x);
        self.filter.push_gradient(std::mem::take(&mut self.cur_grad));
        self.filter.push_variance(self.cur_vol2);
        let (alpha, beta) = self.theta.split_at(self.cfg.order.p);
        self.cur_grad = self.filter.predict_gradient_raw(beta, Some(gamma2));
        self.cur_vol2 = self.filter.predict_variance_raw(alpha, beta, gamma2);
        Ok(self.cur_vol2)
    }
}

/// Full trajectory of a streaming run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamOutput {
    /// theta_t after each update.
    pub theta_track: Vec<Vec<f64>>,
    /// sigma2_t used at step t: X_1^2 at t = 1, thereafter the one-step-ahead
    /// prediction made before observing X_t.
    pub vol2_track: Vec<f64>,
    /// gamma2_t after each update.
    pub gamma2_track: Vec<f64>,
    /// Prediction for the step after the last processed observation.
    pub next_vol2: f64,
}

/// Fold [`AdaVol::update`] over a series, recording the parameter trajectory
/// and the variance predictions. Deterministic in its inputs.
pub fn run_stream(series: &[f64], theta0: &[f64], cfg: AdaVolConfig) -> Result<(StreamOutput, AdaVol)> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let early = cfg.early_stop;
    let mut state = AdaVol::new(theta0, cfg)?;
    let mut theta_track = Vec::with_capacity(series.len());
    let mut vol2_track = Vec::with_capacity(series.len());
    let mut gamma2_track = Vec::with_capacity(series.len());
    for &x in series {
        let v_t = if state.t() == 0 {
            (x * x).max(VARIANCE_FLOOR)
        } else {
            state.predicted_vol2()
        };
        state.update(x)?;
        vol2_track.push(v_t);
        theta_track.push(state.theta().to_vec());
        gamma2_track.push(state.gamma2());
        if let Some(es) = early {
            let t = theta_track.len();
            if t > es.window {
                let prev = &theta_track[t - 1 - es.window];
                let gap = state
                    .theta()
                    .iter()
                    .zip(prev)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                if gap < es.tol {
                    break;
                }
            }
        }
    }
    let next_vol2 = state.predicted_vol2();
    Ok((StreamOutput { theta_track, vol2_track, gamma2_track, next_vol2 }, state))
}
