//! Forecast accuracy scores: mean (absolute) percentage errors against the
//! true volatility, mean absolute error against squared returns, and the
//! cumulative quantile score built from the pinball loss under Gaussian
//! innovations. Includes a self-contained inverse normal CDF.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean percentage error (1/n) sum (sigma_t - est_t) / sigma_t. Signed;
/// positive values mean the forecast runs below the true volatility.
pub fn mpe(true_vol: &[f64], est_vol: &[f64]) -> Result<f64> {
    if true_vol.len() != est_vol.len() {
        return Err(Error::LengthMismatch { left: true_vol.len(), right: est_vol.len() });
    }
    if true_vol.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut acc = 0.0;
    for (i, (&s, &e)) in true_vol.iter().zip(est_vol).enumerate() {
        if !(s > 0.0) {
            return Err(Error::NonPositiveTruth { index: i });
        }
        acc += (s - e) / s;
    }
    Ok(acc / true_vol.len() as f64)
}

/// Mean absolute percentage error (1/n) sum |sigma_t - est_t| / sigma_t.
pub fn mape(true_vol: &[f64], est_vol: &[f64]) -> Result<f64> {
    if true_vol.len() != est_vol.len() {
        return Err(Error::LengthMismatch { left: true_vol.len(), right: est_vol.len() });
    }
    if true_vol.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut acc = 0.0;
    for (i, (&s, &e)) in true_vol.iter().zip(est_vol).enumerate() {
        if !(s > 0.0) {
            return Err(Error::NonPositiveTruth { index: i });
        }
        acc += (s - e).abs() / s;
    }
    Ok(acc / true_vol.len() as f64)
}

/// Mean absolute error between squared returns and estimated variances:
/// (1/n) sum |r_t^2 - est_var_t|. The squared-return proxy makes this usable
/// when the true variance is unobserved.
pub fn mae_var(returns: &[f64], est_var: &[f64]) -> Result<f64> {
    if returns.len() != est_var.len() {
        return Err(Error::LengthMismatch { left: returns.len(), right: est_var.len() });
    }
    if returns.is_empty() {
        return Err(Error::EmptySeries);
    }
    let acc: f64 = returns
        .iter()
        .zip(est_var)
        .map(|(&r, &v)| (r * r - v).abs())
        .sum();
    Ok(acc / returns.len() as f64)
}

/// Pinball loss of the Gaussian alpha-quantile forecast q = inv_cdf(alpha) * vol:
/// alpha (x - q) above the quantile, (1 - alpha)(q - x) at or below it.
/// Low-probability quantiles are punished more for overestimation, and
/// conversely for high-probability ones.
pub fn pinball(x: f64, vol: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    if !(vol > 0.0) {
        return Err(Error::NonPositiveVariance { value: vol });
    }
    let q = norm_inv_cdf(alpha)? * vol;
    Ok(if x > q { alpha * (x - q) } else { (1.0 - alpha) * (q - x) })
}

/// Cumulative quantile score: (1/n) sum_t sum_m pinball(x_t, vol_t, alpha_m).
/// Lower is better; the true conditional quantiles minimize it in
/// expectation.
pub fn qs_score(returns: &[f64], est_vol: &[f64], alphas: &[f64]) -> Result<f64> {
    if returns.len() != est_vol.len() {
        return Err(Error::LengthMismatch { left: returns.len(), right: est_vol.len() });
    }
    if returns.is_empty() || alphas.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut quantiles = Vec::with_capacity(alphas.len());
    for &a in alphas {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::AlphaOutOfRange { alpha: a });
        }
        quantiles.push(norm_inv_cdf(a)?);
    }
    let mut acc = 0.0;
    for (i, (&x, &vol)) in returns.iter().zip(est_vol).enumerate() {
        if !(vol > 0.0) {
            return Err(Error::NonPositiveVariance { value: est_vol[i] });
        }
        for (&a, &z) in alphas.iter().zip(&quantiles) {
            let q = z * vol;
            acc += if x > q { a * (x - q) } else { (1.0 - a) * (q - x) };
        }
    }
    Ok(acc / returns.len() as f64)
}

/// The quantile grid alpha = lo, lo + step, .., hi (inclusive up to rounding).
pub fn alpha_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let a = lo + step * k as f64;
        if a > hi + step * 0.5 {
            break;
        }
        out.push(a);
        k += 1;
    }
    out
}

/// Default scoring grid {0.01, 0.02, .., 0.99}.
pub fn default_alpha_grid() -> Vec<f64> {
    alpha_grid(0.01, 0.99, 0.01)
}

/// Inverse standard normal CDF (quantile function), by Wichura's rational
/// approximation; absolute error well below 1e-8 across (1e-6, 1 - 1e-6).
#[allow(clippy::excessive_precision)] // coefficients kept at published length
pub fn norm_inv_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DomainError { p });
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_608)
            * q;
        let den = ((((((5.226_495_278_852_545_5e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return Ok(num / den);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -val } else { val })
}

/// Accuracy scores of one estimated variance series. The percentage errors
/// require the true volatility and are absent on real data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mpe: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mape: Option<f64>,
    pub mae: f64,
    pub qs: f64,
    pub n: usize,
    pub alphas: Vec<f64>,
}

impl EvalReport {
    /// Score an estimated variance series against the observed returns and,
    /// when available, the true variance path.
    pub fn compute(
        returns: &[f64],
        est_vol2: &[f64],
        true_vol2: Option<&[f64]>,
        alphas: &[f64],
    ) -> Result<Self> {
        if returns.len() != est_vol2.len() {
            return Err(Error::LengthMismatch { left: returns.len(), right: est_vol2.len() });
        }
        let est_vol: Vec<f64> = est_vol2.iter().map(|v| v.sqrt()).collect();
        let (mpe_v, mape_v) = match true_vol2 {
            Some(tv2) => {
                let tv: Vec<f64> = tv2.iter().map(|v| v.sqrt()).collect();
                (Some(mpe(&tv, &est_vol)?), Some(mape(&tv, &est_vol)?))
            }
            None => (None, None),
        };
        Ok(EvalReport {
            mpe: mpe_v,
            mape: mape_v,
            mae: mae_var(returns, est_vol2)?,
            qs: qs_score(returns, &est_vol, alphas)?,
            n: returns.len(),
            alphas: alphas.to_vec(),
        })
    }

    pub fn csv_header() -> &'static str {
        "n,mpe,mape,mae,qs"
    }

    /// One-line CSV row matching [`EvalReport::csv_header`]; absent scores
    /// serialize as empty cells.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!("{},{},{},{},{}", self.n, opt(self.mpe), opt(self.mape), self.mae, self.qs)
    }
}
