//! Noise/signal classification of power-spectrum bins.

mod fisher;
mod rof;

pub(crate) use fisher::fisher_separate_with;
pub use fisher::{fisher_criterion, fisher_separate};
pub(crate) use rof::rof_separate_with;
pub use rof::{rof_erode, rof_find_band_width, rof_separate, BandWidth, RofParams};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scenario::GroundTruth;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparationKind {
    Ideal,
    Fisher,
    Rof,
}

impl SeparationKind {
    pub fn name(self) -> &'static str {
        match self {
            SeparationKind::Ideal => "ideal",
            SeparationKind::Fisher => "fisher",
            SeparationKind::Rof => "rof",
        }
    }
}

impl fmt::Display for SeparationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeparationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" | "is" => Ok(SeparationKind::Ideal),
            "fisher" | "fd" => Ok(SeparationKind::Fisher),
            "rof" => Ok(SeparationKind::Rof),
            _ => Err(Error::InvalidParameter(format!("unknown separation `{s}`"))),
        }
    }
}

/// Method-specific by-products of a separation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeparationDiagnostics {
    /// Rank-order filter band width `K`.
    pub band_width: Option<usize>,
    /// Energy drop in percent for erosion widths `2..=N` (entry 0 is `k = 2`).
    pub energy_drop: Vec<f64>,
    /// `K`-point moving average of the spectrum.
    pub smoothed: Vec<f64>,
    /// Detected signal runs as half-open bin ranges.
    pub runs: Vec<(usize, usize)>,
    /// Fisher split: number of bins in the low (noise) group.
    pub fisher_split: Option<usize>,
    pub fisher_criterion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationMask {
    pub is_signal: Vec<bool>,
    pub method: SeparationKind,
    pub aux: SeparationDiagnostics,
}

impl SeparationMask {
    pub fn len(&self) -> usize {
        self.is_signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_signal.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.is_signal.iter().filter(|s| !**s).count()
    }

    pub fn signal_count(&self) -> usize {
        self.len() - self.noise_count()
    }

    /// Maximal runs of signal bins, half-open.
    pub fn signal_runs(&self) -> Vec<(usize, usize)> {
        runs_of(&self.is_signal)
    }
}

pub(crate) fn runs_of(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, flags.len()));
    }
    out
}

/// Ground-truth mask for one frame.
pub fn ideal_separate(truth: &GroundTruth, frame_index: usize) -> Result<SeparationMask> {
    let mask = truth.mask(frame_index)?;
    if mask.iter().all(|s| *s) {
        return Err(Error::EmptyNoiseGroup);
    }
    Ok(SeparationMask {
        is_signal: mask.to_vec(),
        method: SeparationKind::Ideal,
        aux: SeparationDiagnostics::default(),
    })
}
