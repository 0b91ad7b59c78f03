//! Conditional-variance recursion and its parameter derivatives.
//!
//! Full parameterization (theta = (omega, alpha, beta)):
//!
//! ```text
//! sigma2_t = omega + sum_i alpha_i X2_{t-i} + sum_j beta_j sigma2_{t-j}
//! ```
//!
//! Variance targeting (theta = (alpha, beta), gamma2 held fixed per step):
//!
//! ```text
//! sigma2_t = gamma2 + sum_i alpha_i (X2_{t-i} - gamma2) + sum_j beta_j (sigma2_{t-j} - gamma2)
//! ```
//!
//! The gradient recursion is `grad sigma2_t = vartheta_t + sum_j beta_j grad
//! sigma2_{t-j}`, where vartheta_t stacks (1, X2 lags, sigma2 lags) in the
//! full parameterization and (X2 lags - gamma2, sigma2 lags - gamma2) under
//! variance targeting. The second-derivative recursion follows by
//! differentiating once more: each beta_j contributes the symmetric pair
//! `e_{beta_j} grad sigma2_{t-j}^T + grad sigma2_{t-j} e_{beta_j}^T` plus
//! `beta_j hess sigma2_{t-j}`.
//!
//! Canonical per-step call order (step t uses lags from step t-1):
//!
//! 1. `observe(x_{t-1})` — skipped at t = 1, where the fill values stand in
//! 2. `hessian_step_*` — only when second derivatives are tracked
//! 3. `gradient_step_*` — only when gradients are needed
//! 4. `variance_step_*`

use crate::error::{Error, Result};
use crate::garch::{GarchParams, ModelOrder, VteParams};
use crate::linalg::SymMatrix;

/// Hard floor applied to every filtered variance (and to gamma2 inside the
/// VTE recursion); the QL loss divides by the variance.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Parameterization mode of a filter state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Full,
    Vte,
}

/// Fixed-capacity lag buffer, newest entry first. Slots not yet backed by
/// real data read as the `fill` value (the pre-sample initialization).
#[derive(Debug, Clone)]
struct LagBuf {
    data: Vec<f64>,
    cap: usize,
    fill: f64,
}

impl LagBuf {
    fn new(cap: usize, fill: f64) -> Self {
        Self { data: Vec::with_capacity(cap), cap, fill }
    }

    fn push(&mut self, v: f64) {
        if self.cap == 0 {
            return;
        }
        if self.data.len() == self.cap {
            self.data.pop();
        }
        self.data.insert(0, v);
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        self.data.get(i).copied().unwrap_or(self.fill)
    }
}

/// State of the variance/gradient/Hessian recursions over one observation
/// stream. Single-owner and mutable; one state per series.
#[derive(Debug, Clone)]
pub struct FilterState {
    mode: Mode,
    p: usize,
    q: usize,
    dim: usize,
    lag_x2: LagBuf,
    lag_v: LagBuf,
    /// grad sigma2_{t-1}, .., grad sigma2_{t-q}; missing entries are zero
    /// (a constant initialization has zero parameter derivative).
    lag_dv: Vec<Vec<f64>>,
    lag_d2v: Vec<SymMatrix>,
    t: usize,
}

impl FilterState {
    /// Full-parameterization state with zero-seeded pre-sample lags.
    pub fn full(order: ModelOrder) -> Self {
        Self::with_fills(order, Mode::Full, 0.0, 0.0)
    }

    /// Variance-targeting state with gamma2-seeded pre-sample lags, so that
    /// vartheta vanishes until real data enters the buffers.
    pub fn vte(order: ModelOrder, gamma2: f64) -> Self {
        Self::with_fills(order, Mode::Vte, gamma2, gamma2)
    }

    /// State with explicit pre-sample values for the squared-observation and
    /// variance lags.
    pub fn with_fills(order: ModelOrder, mode: Mode, x2_fill: f64, v_fill: f64) -> Self {
        let dim = match mode {
            Mode::Full => order.dim_full(),
            Mode::Vte => order.dim_vte(),
        };
        Self {
            mode,
            p: order.p,
            q: order.q,
            dim,
            lag_x2: LagBuf::new(order.p, x2_fill),
            lag_v: LagBuf::new(order.q, v_fill),
            lag_dv: Vec::with_capacity(order.q),
            lag_d2v: Vec::with_capacity(order.q),
            t: 0,
        }
    }

    /// Replace the pre-sample fill values; entries already backed by data are
    /// unaffected. The streaming estimator updates these to the current
    /// variance-targeting level each step.
    pub fn set_fills(&mut self, x2_fill: f64, v_fill: f64) {
        self.lag_x2.fill = x2_fill;
        self.lag_v.fill = v_fill;
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of completed variance steps.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Record an observation: X_t^2 becomes the newest squared-return lag.
    pub fn observe(&mut self, x: f64) {
        self.lag_x2.push(x * x);
    }

    /// Push an externally determined variance as the newest variance lag
    /// (used by the streaming estimator, whose first variance is X_1^2
    /// rather than a recursion output).
    pub fn push_variance(&mut self, v: f64) {
        self.lag_v.push(v);
        self.t += 1;
    }

    /// Push an externally determined variance gradient as the newest
    /// gradient lag. Must match the state dimension.
    pub fn push_gradient(&mut self, dv: Vec<f64>) {
        debug_assert_eq!(dv.len(), self.dim);
        if self.q == 0 {
            return;
        }
        if self.lag_dv.len() == self.q {
            self.lag_dv.pop();
        }
        self.lag_dv.insert(0, dv);
    }

    fn push_hessian(&mut self, h: SymMatrix) {
        if self.q == 0 {
            return;
        }
        if self.lag_d2v.len() == self.q {
            self.lag_d2v.pop();
        }
        self.lag_d2v.insert(0, h);
    }

    fn lag_dv_get(&self, j: usize) -> Option<&Vec<f64>> {
        self.lag_dv.get(j)
    }

    fn check_full(&self, params: &GarchParams) -> Result<()> {
        let d = params.alpha.len() + params.beta.len() + 1;
        if self.mode != Mode::Full || d != self.dim || params.alpha.len() != self.p {
            return Err(Error::ModeMismatch { state_dim: self.dim, param_dim: d });
        }
        Ok(())
    }

    fn check_vte(&self, params: &VteParams) -> Result<()> {
        let d = params.alpha.len() + params.beta.len();
        if self.mode != Mode::Vte || d != self.dim || params.alpha.len() != self.p {
            return Err(Error::ModeMismatch { state_dim: self.dim, param_dim: d });
        }
        Ok(())
    }

    /// sigma2_t from the current lags under the full parameterization,
    /// without committing it to the buffers.
    pub fn predict_variance_full(&self, params: &GarchParams) -> f64 {
        self.predict_variance_core(params.omega, &params.alpha, &params.beta, None)
    }

    /// sigma2_t from the current lags under variance targeting, without
    /// committing it to the buffers.
    pub fn predict_variance_vte(&self, params: &VteParams) -> f64 {
        self.predict_variance_raw(&params.alpha, &params.beta, params.gamma2)
    }

    pub(crate) fn predict_variance_raw(&self, alpha: &[f64], beta: &[f64], gamma2: f64) -> f64 {
        let g2 = gamma2.max(VARIANCE_FLOOR);
        self.predict_variance_core(g2, alpha, beta, Some(g2))
    }

    fn predict_variance_core(
        &self,
        intercept: f64,
        alpha: &[f64],
        beta: &[f64],
        center: Option<f64>,
    ) -> f64 {
        let c = center.unwrap_or(0.0);
        let mut v = intercept;
        for (i, &a) in alpha.iter().enumerate() {
            v += a * (self.lag_x2.get(i) - c);
        }
        for (j, &b) in beta.iter().enumerate() {
            v += b * (self.lag_v.get(j) - c);
        }
        v.max(VARIANCE_FLOOR)
    }

    /// grad sigma2_t from the current lags, without committing it.
    pub(crate) fn predict_gradient_raw(&self, beta: &[f64], vte_gamma2: Option<f64>) -> Vec<f64> {
        let mut g = Vec::with_capacity(self.dim);
        match vte_gamma2 {
            None => {
                g.push(1.0);
                for i in 0..self.p {
                    g.push(self.lag_x2.get(i));
                }
                for j in 0..self.q {
                    g.push(self.lag_v.get(j));
                }
            }
            Some(gamma2) => {
                let c = gamma2.max(VARIANCE_FLOOR);
                for i in 0..self.p {
                    g.push(self.lag_x2.get(i) - c);
                }
                for j in 0..self.q {
                    g.push(self.lag_v.get(j) - c);
                }
            }
        }
        for (j, &b) in beta.iter().enumerate() {
            if let Some(dv) = self.lag_dv_get(j) {
                for (gk, dk) in g.iter_mut().zip(dv) {
                    *gk += b * dk;
                }
            }
        }
        g
    }

    /// One step of the gradient recursion (full parameterization): returns
    /// `grad sigma2_t = vartheta_t + sum_j beta_j grad sigma2_{t-j}` with
    /// `vartheta_t = (1, X2 lags, sigma2 lags)` and commits it as the newest
    /// gradient lag. Call after `observe`, before the matching
    /// `variance_step_full`.
    pub fn gradient_step_full(&mut self, params: &GarchParams) -> Result<Vec<f64>> {
        self.check_full(params)?;
        let g = self.predict_gradient_raw(&params.beta, None);
        self.push_gradient(g.clone());
        Ok(g)
    }

    /// One step of the gradient recursion under variance targeting, with
    /// `vartheta_t = (X2 lags - gamma2, sigma2 lags - gamma2)`.
    pub fn gradient_step_vte(&mut self, params: &VteParams) -> Result<Vec<f64>> {
        self.check_vte(params)?;
        let g = self.predict_gradient_raw(&params.beta, Some(params.gamma2));
        self.push_gradient(g.clone());
        Ok(g)
    }

    fn hessian_step_core(&mut self, beta: &[f64]) -> SymMatrix {
        // hess sigma2_t = sum_j [ e_{beta_j} grad sigma2_{t-j}^T
        //                       + grad sigma2_{t-j} e_{beta_j}^T
        //                       + beta_j hess sigma2_{t-j} ]
        let offset = match self.mode {
            Mode::Full => 1 + self.p,
            Mode::Vte => self.p,
        };
        let mut h = SymMatrix::zeros(self.dim);
        for (j, &b) in beta.iter().enumerate() {
            if let Some(dv) = self.lag_dv.get(j) {
                h.add_sym_basis_outer(offset + j, dv);
            }
            if let Some(h_prev) = self.lag_d2v.get(j) {
                h.add_scaled(h_prev, b);
            }
        }
        self.push_hessian(h.clone());
        h
    }

    /// One step of the second-derivative recursion (full parameterization).
    /// Call after `observe`, before the matching `gradient_step_full`: the
    /// recursion reads the gradient lags of steps t-1, .., t-q.
    pub fn hessian_step_full(&mut self, params: &GarchParams) -> Result<SymMatrix> {
        self.check_full(params)?;
        Ok(self.hessian_step_core(&params.beta))
    }

    /// One step of the second-derivative recursion under variance targeting.
    pub fn hessian_step_vte(&mut self, params: &VteParams) -> Result<SymMatrix> {
        self.check_vte(params)?;
        Ok(self.hessian_step_core(&params.beta))
    }

    /// sigma2_t = omega + sum_i alpha_i X2_{t-i} + sum_j beta_j sigma2_{t-j},
    /// floored at `VARIANCE_FLOOR` and committed as the newest variance lag.
    pub fn variance_step_full(&mut self, params: &GarchParams) -> f64 {
        debug_assert!(self.check_full(params).is_ok());
        let v = self.predict_variance_full(params);
        self.push_variance(v);
        v
    }

    /// sigma2_t = gamma2 + sum_i alpha_i (X2_{t-i} - gamma2)
    ///                   + sum_j beta_j (sigma2_{t-j} - gamma2),
    /// floored and committed. With gamma2-seeded lags the first output is
    /// exactly gamma2.
    pub fn variance_step_vte(&mut self, params: &VteParams) -> f64 {
        debug_assert!(self.check_vte(params).is_ok());
        let v = self.predict_variance_vte(params);
        self.push_variance(v);
        v
    }
}

/// Filtered variance series under the given parameters, starting from the
/// parameterization's canonical pre-sample initialization (zeros for the
/// full vector, gamma2 under variance targeting).
pub fn filter_variances(series: &[f64], params: &crate::garch::ModelParams) -> Result<Vec<f64>> {
    use crate::garch::ModelParams;
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let order = params.order()?;
    let mut out = Vec::with_capacity(series.len());
    match params {
        ModelParams::Full(p) => {
            let mut st = FilterState::full(order);
            for &x in series {
                out.push(st.variance_step_full(p));
                st.observe(x);
            }
        }
        ModelParams::Vte(p) => {
            let mut st = FilterState::vte(order, p.gamma2);
            for &x in series {
                out.push(st.variance_step_vte(p));
                st.observe(x);
            }
        }
    }
    Ok(out)
}
