//! Streaming volatility estimation for GARCH(p,q) models.
//!
//! The centerpiece is [`AdaVol`], a recursive quasi-maximum-likelihood
//! estimator that processes each observation once at O(p + q) cost: a
//! streaming variance-targeting level replaces the intercept, AdaGrad scales
//! the per-coordinate steps, and a capped-simplex projection keeps the
//! estimate in the stationary region. A batch QMLE baseline
//! ([`qmle::fit`] / [`qmle::rolling_refit`]), a path simulator
//! ([`garch::simulate`]), accuracy scores ([`metrics`]), and closing-price
//! ingestion ([`ingest`]) round out the toolkit.
//!
//! ```
//! use adavol_core::{simulate, run_stream, AdaVolConfig, GarchParams, ModelOrder};
//!
//! let truth = GarchParams::arch(2.0, vec![0.6]);
//! let sim = simulate(&truth, 2000, 500, 7).unwrap();
//! let cfg = AdaVolConfig::new(ModelOrder::new(1, 0).unwrap());
//! let (out, state) = run_stream(&sim.returns, &[0.4], cfg).unwrap();
//! assert_eq!(out.theta_track.len(), sim.returns.len());
//! assert!(state.predicted_vol2() > 0.0);
//! ```

// `!(x > 0.0)` is used deliberately where NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adavol;
pub mod error;
pub mod filter;
pub mod garch;
pub mod ingest;
pub mod linalg;
pub mod loss;
pub mod metrics;
pub mod qmle;

pub use adavol::{project, run_stream, AdaVol, AdaVolConfig, EarlyStop, MeanRecursion, StreamOutput, StreamingMoments};
pub use error::{Error, Result};
pub use filter::{filter_variances, FilterState, Mode, VARIANCE_FLOOR};
pub use garch::{
    fourth_moment_ok, random_params, simulate, strict_stationarity_estimate, GarchParams,
    ModelOrder, ModelParams, SimOutput, VteParams,
};
pub use ingest::{load_prices, load_returns, log_returns, CsvFormat, PriceSeries, ReturnSeries};
pub use linalg::SymMatrix;
pub use loss::{batch_loss, loss, loss_gradient, loss_hessian, min_hessian_eig, LossEval};
pub use metrics::{
    alpha_grid, default_alpha_grid, mae_var, mape, mpe, norm_inv_cdf, pinball, qs_score,
    EvalReport,
};
pub use qmle::{fit, rolling_refit, streaming_refit_pass, FitOptions, FitOutcome, RefitSchedule, RollingFit};
