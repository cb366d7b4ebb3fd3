//! Runs estimation methods over scenarios and scores the results.
//!
//! ML works per frame. MVU, AIC, CBE and MMSE work on a sliding window of
//! the last `window_frames` frames (step one frame), so their series start
//! at the window's first full position. SNR estimates use the whole-band
//! mean power of the series frame as the received power.

mod complexity;
mod metrics;
mod report;

pub use complexity::{count_ops, count_ops_on_block, dominant_stage};
pub use metrics::{mean_bias_db, rmse_db, std_dev_db, ErrorStats};
pub use report::{
    build_report, emit_report, emit_series, format_float, parse_report, read_report, write_report,
    write_series, BenchmarkReport, MethodReport, REPORT_HEADER, SERIES_HEADER,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimators::{
    aic_estimate_with, cbe_estimate_with, ml_estimate_with, mmse_estimate_with, mvu_estimate_with,
    signal_count, snr_from_powers, AicPenalty, EstimatorKind, NoisePowerEstimate, Snr,
};
use crate::ops::Tally;
use crate::scenario::{build_scenario, GroundTruth, ScenarioConfig};
use crate::separation::{
    fisher_separate_with, ideal_separate, rof_separate_with, RofParams, SeparationKind,
    SeparationMask,
};
use crate::spectral::{averaged_periodogram_with, PowerSpectrum, ResourceBlock};
use crate::{Error, Result};

/// Benchmark settings, the `[run]` table of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunOptions {
    /// Frames per block for MVU, AIC, CBE and MMSE.
    pub window_frames: usize,
    /// CBE grid size `L`.
    pub cbe_grid_points: usize,
    /// CBE occupancy; taken from the ground truth when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cbe_occupancy: Option<f64>,
    /// Number of CBE signal eigenvalues; overrides the occupancy rule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cbe_signal_count: Option<usize>,
    /// Remove each subcarrier's time-mean before MMSE.
    pub mmse_blind: bool,
    pub aic_penalty: AicPenalty,
    pub rof: RofParams,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            window_frames: 100,
            cbe_grid_points: 100,
            cbe_occupancy: None,
            cbe_signal_count: None,
            mmse_blind: true,
            aic_penalty: AicPenalty::default(),
            rof: RofParams::default(),
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if self.window_frames < 1 {
            return Err(Error::Config("run.window_frames must be >= 1".into()));
        }
        if self.cbe_grid_points < 2 {
            return Err(Error::Config("run.cbe_grid_points must be >= 2".into()));
        }
        if let Some(o) = self.cbe_occupancy {
            if !(0.0..1.0).contains(&o) {
                return Err(Error::Config("run.cbe_occupancy must be in [0, 1)".into()));
            }
        }
        self.rof
            .validate()
            .map_err(|e| Error::Config(format!("run.rof: {e}")))
    }
}

/// An estimator, with a separation strategy for ML and MVU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodSpec {
    pub estimator: EstimatorKind,
    pub separation: Option<SeparationKind>,
}

impl MethodSpec {
    pub fn new(estimator: EstimatorKind, separation: Option<SeparationKind>) -> Result<Self> {
        match (estimator.needs_separation(), separation) {
            (true, None) => Err(Error::InvalidParameter(format!(
                "{estimator} needs a separation (e.g. `{estimator}:rof`)"
            ))),
            (false, Some(s)) => Err(Error::InvalidParameter(format!(
                "{estimator} does not take a separation, got `{s}`"
            ))),
            _ => Ok(MethodSpec {
                estimator,
                separation,
            }),
        }
    }

    /// Every valid combination: ML and MVU with each separation, then AIC, CBE, MMSE.
    pub fn all() -> Vec<MethodSpec> {
        let mut out = Vec::new();
        for e in EstimatorKind::ALL {
            if e.needs_separation() {
                for s in [
                    SeparationKind::Ideal,
                    SeparationKind::Fisher,
                    SeparationKind::Rof,
                ] {
                    out.push(MethodSpec::new(e, Some(s)).unwrap());
                }
            } else {
                out.push(MethodSpec::new(e, None).unwrap());
            }
        }
        out
    }

    pub fn separation_name(&self) -> &'static str {
        self.separation.map_or("none", SeparationKind::name)
    }

    pub fn is_windowed(&self) -> bool {
        self.estimator != EstimatorKind::Ml
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.separation {
            Some(s) => write!(f, "{}:{}", self.estimator, s),
            None => write!(f, "{}", self.estimator),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    /// `ml:rof`, `mvu:fisher`, `aic`, `cbe`, `mmse`.
    fn from_str(s: &str) -> Result<Self> {
        let (e, sep) = match s.split_once(':') {
            Some((e, sep)) => (e, Some(sep)),
            None => (s, None),
        };
        let estimator: EstimatorKind = e.trim().parse()?;
        let separation = match sep.map(str::trim) {
            None | Some("none") => None,
            Some(v) => Some(v.parse()?),
        };
        MethodSpec::new(estimator, separation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub frame_index: usize,
    pub noise_est_mw: f64,
    pub noise_true_mw: f64,
    pub snr_est_db: f64,
    pub snr_true_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSeries {
    pub scenario_id: String,
    pub seed: u64,
    pub method: MethodSpec,
    pub points: Vec<SeriesPoint>,
}

impl EstimateSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn snr_est_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.snr_est_db).collect()
    }

    pub fn noise_est_mw(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.noise_est_mw).collect()
    }
}

/// Per-frame inputs shared by all methods of one realisation. Without
/// ground truth, ideal separation is unavailable and CBE needs an explicit
/// occupancy.
pub(crate) struct Observation<'a> {
    pub block: &'a ResourceBlock,
    pub truth: Option<&'a GroundTruth>,
    pub powers: Vec<PowerSpectrum>,
}

impl<'a> Observation<'a> {
    pub fn new(block: &'a ResourceBlock, truth: Option<&'a GroundTruth>) -> Self {
        Observation {
            block,
            truth,
            powers: block.power_spectra(),
        }
    }

    pub fn window_len(&self, opts: &RunOptions) -> usize {
        opts.window_frames.min(self.block.n_frames())
    }

    pub fn separate(
        &self,
        kind: SeparationKind,
        frame: usize,
        opts: &RunOptions,
        tally: &mut impl Tally,
    ) -> Result<SeparationMask> {
        match kind {
            SeparationKind::Ideal => match self.truth {
                Some(t) => ideal_separate(t, frame),
                None => Err(Error::InvalidParameter(
                    "ideal separation needs ground truth".into(),
                )),
            },
            SeparationKind::Fisher => fisher_separate_with(&self.powers[frame], tally),
            SeparationKind::Rof => rof_separate_with(&self.powers[frame], &opts.rof, tally),
        }
    }

    fn occupancy(&self, start: usize, end: usize, opts: &RunOptions) -> Result<f64> {
        if let Some(o) = opts.cbe_occupancy {
            return Ok(o);
        }
        let truth = self.truth.ok_or_else(|| {
            Error::InvalidParameter(
                "CBE without ground truth needs run.cbe_occupancy or run.cbe_signal_count".into(),
            )
        })?;
        let masks = &truth.signal_mask[start..end];
        let n = self.block.n_bins() as f64;
        Ok(masks
            .iter()
            .map(|m| m.iter().filter(|s| **s).count() as f64 / n)
            .sum::<f64>()
            / masks.len() as f64)
    }

    /// Estimate for the window ending at `frame` (the frame itself for ML).
    /// `masks` holds the separation masks of the window's frames.
    pub fn estimate(
        &self,
        method: MethodSpec,
        frame: usize,
        masks: &[SeparationMask],
        opts: &RunOptions,
        tally: &mut impl Tally,
    ) -> Result<NoisePowerEstimate> {
        let w = self.window_len(opts);
        let start = (frame + 1).saturating_sub(w);
        match method.estimator {
            EstimatorKind::Ml => {
                ml_estimate_with(&self.powers[frame], masks.last().expect("mask"), tally)
            }
            EstimatorKind::Mvu => mvu_estimate_with(&self.powers[start..=frame], masks, tally),
            EstimatorKind::Aic => {
                let block = self.block.window(start, frame + 1)?;
                let mut p = averaged_periodogram_with(&block, tally);
                p.frame_index = frame;
                aic_estimate_with(&p, w, opts.aic_penalty, tally)
            }
            EstimatorKind::Cbe => {
                let s = match opts.cbe_signal_count {
                    Some(s) => s,
                    None => signal_count(w, self.occupancy(start, frame + 1, opts)?)?,
                };
                let block = self.block.window(start, frame + 1)?;
                cbe_estimate_with(&block, s, opts.cbe_grid_points, tally)
            }
            EstimatorKind::Mmse => {
                let block = self.block.window(start, frame + 1)?;
                mmse_estimate_with(&block, opts.mmse_blind, tally)
            }
        }
        .map(|mut e| {
            e.frame_index = frame;
            e
        })
    }
}

/// Estimates of every method at every frame with a full window, each with
/// the SNR against the frame's whole-band mean power.
fn estimate_all(
    obs: &Observation<'_>,
    methods: &[MethodSpec],
    opts: &RunOptions,
) -> Result<Vec<Vec<(NoisePowerEstimate, Snr)>>> {
    let m = obs.block.n_frames();
    let w = obs.window_len(opts);

    let mut seps: Vec<SeparationKind> = methods.iter().filter_map(|x| x.separation).collect();
    seps.sort();
    seps.dedup();
    let mut masks: Vec<(SeparationKind, Vec<SeparationMask>)> = Vec::new();
    for kind in seps {
        let v = (0..m)
            .map(|f| obs.separate(kind, f, opts, &mut crate::ops::NoTally))
            .collect::<Result<Vec<_>>>()?;
        masks.push((kind, v));
    }
    let masks_for = |kind: Option<SeparationKind>| -> &[SeparationMask] {
        kind.and_then(|k| masks.iter().find(|(kk, _)| *kk == k))
            .map_or(&[][..], |(_, v)| v.as_slice())
    };

    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let first = if method.is_windowed() { w - 1 } else { 0 };
        let all = masks_for(method.separation);
        let mut ests = Vec::with_capacity(m - first);
        for frame in first..m {
            let win: &[SeparationMask] = if all.is_empty() {
                &[]
            } else if method.is_windowed() {
                &all[frame + 1 - w..=frame]
            } else {
                &all[frame..=frame]
            };
            let est = obs.estimate(method, frame, win, opts, &mut crate::ops::NoTally)?;
            let snr = snr_from_powers(obs.powers[frame].mean(), est.value_mw)?;
            ests.push((est, snr));
        }
        out.push(ests);
    }
    Ok(out)
}

/// Runs methods on an observed block with no ground truth, e.g. a recorded
/// trace. Ideal separation is rejected; CBE takes `opts.cbe_occupancy`
/// (required). The result holds one list per method, in the given order.
pub fn estimate_block(
    block: &ResourceBlock,
    methods: &[MethodSpec],
    opts: &RunOptions,
) -> Result<Vec<Vec<(NoisePowerEstimate, Snr)>>> {
    opts.validate()?;
    estimate_all(&Observation::new(block, None), methods, opts)
}

fn run_seed(
    config: &ScenarioConfig,
    methods: &[MethodSpec],
    seed: u64,
) -> Result<Vec<EstimateSeries>> {
    let cfg = config.with_seed(seed);
    let opts = &cfg.run;
    let (block, truth) = build_scenario(&cfg)?;
    let obs = Observation::new(&block, Some(&truth));
    let estimates = estimate_all(&obs, methods, opts)?;
    let mut out = Vec::with_capacity(methods.len());
    for (&method, ests) in methods.iter().zip(estimates) {
        let mut points = Vec::with_capacity(ests.len());
        for (est, snr) in ests {
            let frame = est.frame_index;
            points.push(SeriesPoint {
                frame_index: frame,
                noise_est_mw: est.value_mw,
                noise_true_mw: truth.noise_power_mw[frame],
                snr_est_db: snr.db,
                snr_true_db: truth.true_snr_db[frame],
            });
        }
        out.push(EstimateSeries {
            scenario_id: cfg.scenario_id.clone(),
            seed,
            method,
            points,
        });
    }
    Ok(out)
}

/// Runs every method on every seed. The result is ordered by method (as
/// given), then seed (as given).
pub fn run_scenario(
    config: &ScenarioConfig,
    methods: &[MethodSpec],
    seeds: &[u64],
) -> Result<Vec<EstimateSeries>> {
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods given".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no seeds given".into()));
    }
    config.validate()?;
    let per_seed = seeds
        .par_iter()
        .map(|&s| run_seed(config, methods, s))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(methods.len() * seeds.len());
    for mi in 0..methods.len() {
        for series in &per_seed {
            out.push(series[mi].clone());
        }
    }
    Ok(out)
}
