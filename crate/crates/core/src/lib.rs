//! Noise power and SNR estimation for wideband spectrum sensing.
//!
//! The crate is organised around a time–frequency [`ResourceBlock`]: `N`
//! spectral bins observed over `M` consecutive non-overlapping frames.
//!
//! * [`spectral`] frames a complex sample stream and produces periodograms.
//! * [`scenario`] builds simulated ISM-band observations with exact ground truth.
//! * [`separation`] splits a power spectrum into noise and signal bins
//!   (ideal, Fisher discriminant and rank-order filtering).
//! * [`estimators`] implements the ML, MVU, AIC, covariance-based (CBE) and
//!   blind MMSE noise power estimators.
//! * [`harness`] runs methods over scenarios, scores them and writes CSV reports.
//! * [`ops`] counts arithmetic operations along the estimator path.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod ops;
pub mod scenario;
pub mod separation;
pub mod spectral;

pub use error::{Error, Result};
pub use estimators::{EstimatorKind, NoisePowerEstimate, Snr};
pub use harness::{EstimateSeries, MethodSpec, RunOptions};
pub use scenario::{GroundTruth, ScenarioConfig};
pub use separation::{RofParams, SeparationKind, SeparationMask};
pub use spectral::{ComplexSeries, PowerSpectrum, ResourceBlock, SpectralFrame};
