//! Quasi-likelihood losses and their derivatives.
//!
//! Per-observation Gaussian QL loss at filtered variance v = sigma2_t:
//!
//! ```text
//! l_t     = (X_t^2 / v + log v) / 2
//! grad    = grad_v * (v - X_t^2) / (2 v^2)
//! hessian = grad_v^T grad_v * (2 X_t^2 - v) / (2 v^3)
//!         + hess_v * (v - X_t^2) / (2 v^2)
//! ```
//!
//! where grad_v and hess_v come from the variance recursion in
//! [`crate::filter`]. The criterion is only locally convex: for an ARCH(1)
//! step the Hessian eigenvalues are (0, lambda_t) with
//! `lambda_t = (1 + X2_{t-1}^2) (2 X_t^2 - sigma2_t) / (2 sigma2_t^3)`,
//! which is negative whenever 2 X_t^2 < sigma2_t. The windowed
//! smallest-eigenvalue diagnostic below makes that observable.

use crate::error::{Error, Result};
use crate::filter::FilterState;
use crate::garch::ModelParams;
use crate::linalg::SymMatrix;

/// Loss, gradient, and (optionally) Hessian of one QL term.
#[derive(Debug, Clone)]
pub struct LossEval {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub hess: Option<SymMatrix>,
}

/// QL loss (X^2 / v + log v) / 2 at observation x and variance v > 0.
pub fn loss(x: f64, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::NonPositiveVariance { value: v });
    }
    Ok(0.5 * (x * x / v + v.ln()))
}

/// Gradient of the QL loss: dv * (v - x^2) / (2 v^2). Vanishes when x^2 = v.
pub fn loss_gradient(x: f64, v: f64, dv: &[f64]) -> Result<Vec<f64>> {
    if !(v > 0.0) {
        return Err(Error::NonPositiveVariance { value: v });
    }
    let s = (v - x * x) / (2.0 * v * v);
    Ok(dv.iter().map(|d| d * s).collect())
}

/// Hessian of the QL loss from the variance gradient dv and variance Hessian
/// d2v. Symmetric by construction.
pub fn loss_hessian(x: f64, v: f64, dv: &[f64], d2v: &SymMatrix) -> Result<SymMatrix> {
    if !(v > 0.0) {
        return Err(Error::NonPositiveVariance { value: v });
    }
    if d2v.n() != dv.len() {
        return Err(Error::LengthMismatch { left: dv.len(), right: d2v.n() });
    }
    let x2 = x * x;
    let c_outer = (2.0 * x2 - v) / (2.0 * v * v * v);
    let c_curv = (v - x2) / (2.0 * v * v);
    let mut h = SymMatrix::outer(dv);
    h.scale(c_outer);
    h.add_scaled(d2v, c_curv);
    Ok(h)
}

/// Run the variance filter across the whole series from its canonical
/// initialization, accumulating the batch QL objective and its gradient.
pub fn batch_loss(series: &[f64], params: &ModelParams) -> Result<(f64, Vec<f64>)> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    params.validate(false)?;
    let order = params.order()?;
    let dim = params.dim();
    let mut total = 0.0;
    let mut grad = vec![0.0; dim];
    match params {
        ModelParams::Full(p) => {
            let mut st = FilterState::full(order);
            for &x in series {
                let dv = st.gradient_step_full(p)?;
                let v = st.variance_step_full(p);
                total += loss(x, v)?;
                let s = (v - x * x) / (2.0 * v * v);
                for (g, d) in grad.iter_mut().zip(&dv) {
                    *g += d * s;
                }
                st.observe(x);
            }
        }
        ModelParams::Vte(p) => {
            let mut st = FilterState::vte(order, p.gamma2);
            for &x in series {
                let dv = st.gradient_step_vte(p)?;
                let v = st.variance_step_vte(p);
                total += loss(x, v)?;
                let s = (v - x * x) / (2.0 * v * v);
                for (g, d) in grad.iter_mut().zip(&dv) {
                    *g += d * s;
                }
                st.observe(x);
            }
        }
    }
    Ok((total, grad))
}

/// Per-step QL-loss evaluation (with Hessian) along a series. Test and
/// diagnostic surface behind `min_hessian_eig`.
pub fn eval_steps(series: &[f64], params: &ModelParams) -> Result<Vec<LossEval>> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    params.validate(false)?;
    let order = params.order()?;
    let mut st = match params {
        ModelParams::Full(_) => FilterState::full(order),
        ModelParams::Vte(p) => FilterState::vte(order, p.gamma2),
    };
    let mut out = Vec::with_capacity(series.len());
    for &x in series {
        let (d2v, dv, v) = match params {
            ModelParams::Full(p) => {
                let d2v = st.hessian_step_full(p)?;
                let dv = st.gradient_step_full(p)?;
                (d2v, dv, st.variance_step_full(p))
            }
            ModelParams::Vte(p) => {
                let d2v = st.hessian_step_vte(p)?;
                let dv = st.gradient_step_vte(p)?;
                (d2v, dv, st.variance_step_vte(p))
            }
        };
        out.push(LossEval {
            loss: loss(x, v)?,
            grad: loss_gradient(x, v, &dv)?,
            hess: Some(loss_hessian(x, v, &dv, &d2v)?),
        });
        st.observe(x);
    }
    Ok(out)
}

/// Smallest eigenvalue of the window-averaged Hessian, one entry per full
/// non-overlapping window of length `window`; a trailing partial window is
/// dropped. Positive values indicate local strong convexity of the batch
/// criterion over that stretch of data.
pub fn min_hessian_eig(series: &[f64], params: &ModelParams, window: usize) -> Result<Vec<f64>> {
    let dim = params.dim();
    if window < dim {
        return Err(Error::WindowTooSmall { window, dim });
    }
    let evals = eval_steps(series, params)?;
    let mut out = Vec::new();
    let mut acc = SymMatrix::zeros(dim);
    let mut count = 0usize;
    for e in &evals {
        acc.add_scaled(e.hess.as_ref().expect("hessians tracked"), 1.0);
        count += 1;
        if count == window {
            acc.scale(1.0 / window as f64);
            out.push(acc.eigenvalues()[0]);
            acc = SymMatrix::zeros(dim);
            count = 0;
        }
    }
    Ok(out)
}
