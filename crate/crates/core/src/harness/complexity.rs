//! Operation counts of one estimation pass.
//!
//! A pass processes one new frame: its transform, power spectrum and (for
//! ML/MVU) separation, then the estimator over the current block. Masks of
//! earlier frames are assumed cached. Scenario construction is not counted.

use super::{MethodSpec, Observation, RunOptions};
use crate::estimators::EstimatorKind;
use crate::ops::OpCounter;
use crate::scenario::{build_scenario, GroundTruth, ScenarioConfig};
use crate::separation::SeparationKind;
use crate::spectral::{dft_with, idft, power_spectrum_with, ResourceBlock};
use crate::Result;

/// Stage holding the leading-order cost of a method.
pub fn dominant_stage(method: MethodSpec) -> &'static str {
    match (method.estimator, method.separation) {
        (EstimatorKind::Ml | EstimatorKind::Mvu, Some(SeparationKind::Rof)) => "erosion",
        (EstimatorKind::Ml | EstimatorKind::Mvu, Some(SeparationKind::Fisher)) => "fisher_scan",
        (EstimatorKind::Ml, _) => "mean",
        (EstimatorKind::Mvu, _) => "mean",
        (EstimatorKind::Aic, _) => "alpha",
        (EstimatorKind::Cbe, _) => "covariance",
        (EstimatorKind::Mmse, _) => "weights",
    }
}

/// Counts one pass ending at the block's last frame.
pub fn count_ops_on_block(
    method: MethodSpec,
    block: &ResourceBlock,
    truth: &GroundTruth,
    opts: &RunOptions,
) -> Result<OpCounter> {
    let mut tally = OpCounter::new();
    let obs = Observation::new(block, Some(truth));
    let m = block.n_frames();
    let last = m - 1;
    let w = obs.window_len(opts);

    let time = idft(&block.frames()[last]);
    let frame = dft_with(&time, last, &mut tally)?;
    power_spectrum_with(&frame, &mut tally);

    let mut masks = Vec::new();
    if let Some(kind) = method.separation {
        let first = if method.is_windowed() { m - w } else { last };
        for f in first..last {
            masks.push(obs.separate(kind, f, opts, &mut crate::ops::NoTally)?);
        }
        masks.push(obs.separate(kind, last, opts, &mut tally)?);
    }
    obs.estimate(method, last, &masks, opts, &mut tally)?;
    Ok(tally)
}

/// Counts one pass on a deterministic `n`-bin, `n`-frame block with one
/// occupied subband at 0 dB.
///
/// CBE needs more bins than frames, so it runs on an `n × n/2` window.
pub fn count_ops(method: MethodSpec, n: usize) -> Result<OpCounter> {
    let mut cfg = ScenarioConfig::ism_single_band(n, n, 0.0, 1);
    cfg.run.window_frames = if method.estimator == EstimatorKind::Cbe {
        (n / 2).max(1)
    } else {
        n
    };
    let (block, truth) = build_scenario(&cfg)?;
    count_ops_on_block(method, &block, &truth, &cfg.run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_grow_with_size() {
        for method in MethodSpec::all() {
            let a = count_ops(method, 16).unwrap();
            let b = count_ops(method, 32).unwrap();
            assert!(b.total().total() >= a.total().total(), "{method}");
            assert!(
                a.stage_counts(dominant_stage(method)).total() > 0,
                "{method}"
            );
            assert!(a.stage_counts("fft").total() > 0);
        }
    }

    #[test]
    fn quadratic_methods_double_to_four() {
        for m in ["ml:rof", "ml:fisher", "aic", "mmse"] {
            let method: MethodSpec = m.parse().unwrap();
            let s = dominant_stage(method);
            let a = count_ops(method, 64).unwrap().stage_counts(s).total() as f64;
            let b = count_ops(method, 128).unwrap().stage_counts(s).total() as f64;
            let r = b / a;
            assert!((3.5..=4.5).contains(&r), "{m}: {r}");
        }
    }
}
