//! Noise power estimators and the SNR mapping.
//!
//! | kind | input | idea |
//! |------|-------|------|
//! | ML   | one frame + mask | mean of noise bins |
//! | MVU  | frames + masks | mean of noise bins over the block |
//! | AIC  | averaged periodogram | model order by AIC, mean of the remaining bins |
//! | CBE  | block | Marchenko–Pastur fit to covariance eigenvalues |
//! | MMSE | block | per-subcarrier variance prediction (blind) |

mod aic;
mod cbe;
mod ml;
mod mmse;
mod mp;
mod snr;

pub use aic::{aic_curve, aic_estimate, AicPenalty};
pub use cbe::{
    cbe_estimate, cbe_estimate_with_count, covariance_eigenvalues, mp_fit_range, EigenSpectrum,
    MpFitRange,
};
pub use ml::{ml_estimate, mvu_estimate};
pub use mmse::{levinson_solve, mmse_estimate, mmse_weights};
pub use mp::{mp_cdf, mp_support};
pub use snr::{snr_from_powers, Snr};

pub(crate) use aic::aic_estimate_with;
pub(crate) use cbe::cbe_estimate_with;
pub(crate) use cbe::signal_count;
pub(crate) use ml::{ml_estimate_with, mvu_estimate_with};
pub(crate) use mmse::mmse_estimate_with;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Floor applied to zero power values before logarithms.
pub const POWER_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Ml,
    Mvu,
    Aic,
    Cbe,
    Mmse,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Ml,
        EstimatorKind::Mvu,
        EstimatorKind::Aic,
        EstimatorKind::Cbe,
        EstimatorKind::Mmse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Ml => "ml",
            EstimatorKind::Mvu => "mvu",
            EstimatorKind::Aic => "aic",
            EstimatorKind::Cbe => "cbe",
            EstimatorKind::Mmse => "mmse",
        }
    }

    /// ML and MVU work on separated noise bins.
    pub fn needs_separation(self) -> bool {
        matches!(self, EstimatorKind::Ml | EstimatorKind::Mvu)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ml" => Ok(EstimatorKind::Ml),
            "mvu" => Ok(EstimatorKind::Mvu),
            "aic" => Ok(EstimatorKind::Aic),
            "cbe" => Ok(EstimatorKind::Cbe),
            "mmse" => Ok(EstimatorKind::Mmse),
            _ => Err(Error::InvalidParameter(format!("unknown estimator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum EstimateDiagnostics {
    #[default]
    None,
    Separated {
        noise_bins: usize,
    },
    Aic {
        n_min: usize,
    },
    Cbe {
        signal_eigenvalues: usize,
        best_index: usize,
        grid: Vec<f64>,
        distance: Vec<f64>,
    },
    Mmse {
        weight_sum: f64,
        weight_min: f64,
        weight_max: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePowerEstimate {
    pub value_mw: f64,
    /// Frame the estimate refers to; the last frame of a block.
    pub frame_index: usize,
    pub method: EstimatorKind,
    pub diagnostics: EstimateDiagnostics,
}

impl NoisePowerEstimate {
    pub(crate) fn new(
        value_mw: f64,
        frame_index: usize,
        method: EstimatorKind,
        diagnostics: EstimateDiagnostics,
    ) -> Result<Self> {
        if !(value_mw.is_finite() && value_mw > 0.0) {
            return Err(Error::NonPositiveEstimate(value_mw));
        }
        Ok(NoisePowerEstimate {
            value_mw,
            frame_index,
            method,
            diagnostics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("mdl".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn estimates_must_be_positive() {
        for v in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(
                NoisePowerEstimate::new(v, 0, EstimatorKind::Ml, EstimateDiagnostics::None)
                    .is_err()
            );
        }
    }
}
