//! Accuracy and stability of SNR series, in dB.

use super::EstimateSeries;
use crate::{Error, Result};

/// Errors `estimated − true` over frames with a finite true SNR.
fn errors(series: &EstimateSeries) -> Vec<f64> {
    series
        .points
        .iter()
        .filter(|p| p.snr_true_db.is_finite())
        .map(|p| p.snr_est_db - p.snr_true_db)
        .collect()
}

/// Root-mean-square SNR error over frames with a finite true SNR.
pub fn rmse_db(series: &EstimateSeries) -> Result<f64> {
    ErrorStats::from_errors(&errors(series)).map(|s| s.rmse_db)
}

pub fn mean_bias_db(series: &EstimateSeries) -> Result<f64> {
    ErrorStats::from_errors(&errors(series)).map(|s| s.mean_bias_db)
}

/// Sample standard deviation of the estimated SNR series about its own mean.
pub fn std_dev_db(series: &EstimateSeries) -> Result<f64> {
    sample_std(&series.snr_est_db())
}

pub(crate) fn sample_std(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "standard deviation needs >= 2 values, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    Ok((x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// RMSE, bias and sample standard deviation of one set of errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub count: usize,
    pub rmse_db: f64,
    pub mean_bias_db: f64,
    pub std_dev_db: f64,
}

impl ErrorStats {
    pub fn from_errors(e: &[f64]) -> Result<Self> {
        if e.is_empty() {
            return Err(Error::InvalidParameter(
                "no frames with a finite true SNR".into(),
            ));
        }
        let n = e.len() as f64;
        let bias = e.iter().sum::<f64>() / n;
        let rmse = (e.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        let std = if e.len() > 1 {
            (e.iter().map(|v| (v - bias).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(ErrorStats {
            count: e.len(),
            rmse_db: rmse,
            mean_bias_db: bias,
            std_dev_db: std,
        })
    }

    /// Pools the errors of several series.
    pub fn pooled<'a>(series: impl IntoIterator<Item = &'a EstimateSeries>) -> Result<Self> {
        let all: Vec<f64> = series.into_iter().flat_map(errors).collect();
        Self::from_errors(&all)
    }
}
