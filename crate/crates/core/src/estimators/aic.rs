//! Model-order selection on the sorted averaged periodogram.

use serde::{Deserialize, Serialize};

use super::{EstimateDiagnostics, EstimatorKind, NoisePowerEstimate, POWER_FLOOR};
use crate::ops::{NoTally, Tally};
use crate::spectral::PowerSpectrum;
use crate::{Error, Result};

/// Complexity penalty of a model with `n` signal bins out of `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AicPenalty {
    /// `n(2N − n)`: free eigenvectors of an `N × N` covariance.
    Eigen,
    /// `2n`: the basis is fixed to the DFT bins, so a signal bin only adds
    /// its complex coefficient.
    #[default]
    FixedBasis,
}

impl AicPenalty {
    pub fn value(self, n: usize, n_total: usize) -> f64 {
        let (n, t) = (n as f64, n_total as f64);
        match self {
            AicPenalty::Eigen => n * (2.0 * t - n),
            AicPenalty::FixedBasis => 2.0 * n,
        }
    }
}

fn sorted_floored(periodogram: &PowerSpectrum, tally: &mut impl Tally) -> Vec<f64> {
    let mut lambda = periodogram.power.clone();
    let zeros = lambda.iter().filter(|v| **v < POWER_FLOOR).count();
    if zeros > 0 {
        log::warn!("aic: {zeros} bins below {POWER_FLOOR:e} floored");
        lambda.iter_mut().for_each(|v| *v = v.max(POWER_FLOOR));
    }
    lambda.sort_by(|a, b| b.total_cmp(a));
    let n = lambda.len() as f64;
    tally.cmp((n * n.log2()).ceil() as u64 + lambda.len() as u64);
    lambda
}

/// `AIC(n) = (N − n)·M·ln α(n) + penalty(n)` for `n = 0..N` on descending
/// values `lambda_desc`, where `α(n)` is the ratio of arithmetic to geometric
/// mean of `λ_{n+1..N}` and `m` frames were averaged.
pub fn aic_curve(lambda_desc: &[f64], m: usize, penalty: AicPenalty) -> Vec<f64> {
    curve(lambda_desc, m, penalty, &mut NoTally)
}

fn curve(lambda: &[f64], m: usize, penalty: AicPenalty, tally: &mut impl Tally) -> Vec<f64> {
    let n_total = lambda.len();
    tally.stage("log");
    let logs: Vec<f64> = lambda.iter().map(|v| v.ln()).collect();
    tally.transcendental(n_total as u64);

    tally.stage("alpha");
    let mut out = Vec::with_capacity(n_total);
    for n in 0..n_total {
        let tail = &lambda[n..];
        let k = tail.len() as f64;
        let mean: f64 = tail.iter().sum::<f64>() / k;
        let mean_log: f64 = logs[n..].iter().sum::<f64>() / k;
        // ln(arithmetic mean / geometric mean)
        let log_alpha = mean.ln() - mean_log;
        out.push(k * m as f64 * log_alpha + penalty.value(n, n_total));
        tally.add(2 * tail.len() as u64 + 4);
        tally.mul(6);
        tally.transcendental(1);
    }
    out
}

/// Noise power as the mean of the bins left after removing the `n_min`
/// strongest ones.
pub fn aic_estimate(
    periodogram: &PowerSpectrum,
    m: usize,
    penalty: AicPenalty,
) -> Result<NoisePowerEstimate> {
    aic_estimate_with(periodogram, m, penalty, &mut NoTally)
}

pub(crate) fn aic_estimate_with(
    periodogram: &PowerSpectrum,
    m: usize,
    penalty: AicPenalty,
    tally: &mut impl Tally,
) -> Result<NoisePowerEstimate> {
    let n = periodogram.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "AIC needs N >= 2, got {n}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("AIC needs M >= 1".into()));
    }
    tally.stage("sort");
    let lambda = sorted_floored(periodogram, tally);
    let aic = curve(&lambda, m, penalty, tally);
    tally.stage("select");
    let mut n_min = 0;
    for (i, v) in aic.iter().enumerate() {
        if *v < aic[n_min] {
            n_min = i;
        }
    }
    let tail = &lambda[n_min..];
    let value = tail.iter().sum::<f64>() / tail.len() as f64;
    tally.cmp(n as u64);
    tally.add(tail.len() as u64);
    tally.mul(1);
    NoisePowerEstimate::new(
        value,
        periodogram.frame_index,
        EstimatorKind::Aic,
        EstimateDiagnostics::Aic { n_min },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_scenario, ScenarioConfig};
    use crate::spectral::averaged_periodogram;
    use proptest::prelude::*;

    fn n_min(e: &NoisePowerEstimate) -> usize {
        match e.diagnostics {
            EstimateDiagnostics::Aic { n_min } => n_min,
            _ => unreachable!(),
        }
    }

    /// Direct evaluation with geometric means taken as products.
    fn oracle_n_min(values: &[f64], m: usize, penalty: AicPenalty) -> usize {
        let mut l = values.to_vec();
        l.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let nt = l.len();
        let mut best = (0, f64::INFINITY);
        for n in 0..nt {
            let tail = &l[n..];
            let k = tail.len() as f64;
            let am = tail.iter().sum::<f64>() / k;
            let gm = tail.iter().map(|v| v.powf(1.0 / k)).product::<f64>();
            let pen = match penalty {
                AicPenalty::Eigen => (n * (2 * nt - n)) as f64,
                AicPenalty::FixedBasis => 2.0 * n as f64,
            };
            let aic = k * m as f64 * (am / gm).ln() + pen;
            if best.1.is_infinite() || aic < best.1 - 1e-9 * best.1.abs().max(1.0) {
                best = (n, aic);
            }
        }
        best.0
    }

    #[test]
    fn equal_bins_select_zero() {
        for pen in [AicPenalty::Eigen, AicPenalty::FixedBasis] {
            let e = aic_estimate(&PowerSpectrum::new(vec![2.5; 32], 0).unwrap(), 10, pen).unwrap();
            assert_eq!(n_min(&e), 0);
            assert!((e.value_mw - 2.5).abs() < 1e-15);
        }
        let c = aic_curve(&[2.5; 4], 10, AicPenalty::Eigen);
        assert!(c[0].abs() < 1e-12);
        assert_eq!(&c[1..], &[7.0, 12.0, 15.0]);
        let c = aic_curve(&[2.5; 4], 10, AicPenalty::FixedBasis);
        assert_eq!(&c[1..], &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn single_strong_bin() {
        let mut v = vec![1.0; 16];
        v[5] = 100.0;
        for pen in [AicPenalty::Eigen, AicPenalty::FixedBasis] {
            let e = aic_estimate(&PowerSpectrum::new(v.clone(), 0).unwrap(), 10, pen).unwrap();
            assert_eq!(n_min(&e), 1);
            assert_eq!(e.value_mw, 1.0);
            assert_eq!(oracle_n_min(&v, 10, pen), 1);
        }
    }

    #[test]
    fn zero_bins_are_floored() {
        let e = aic_estimate(
            &PowerSpectrum::new(vec![1.0, 1.0, 0.0, 1.0], 0).unwrap(),
            5,
            AicPenalty::Eigen,
        )
        .unwrap();
        assert!(e.value_mw > 0.0);
    }

    #[test]
    fn order_tracks_occupied_bins() {
        let (block, _) =
            build_scenario(&ScenarioConfig::ism_single_band(512, 100, 0.0, 4)).unwrap();
        let p = averaged_periodogram(&block);
        let e = aic_estimate(&p, 100, AicPenalty::FixedBasis).unwrap();
        let n = n_min(&e) as f64;
        assert!((n - 128.0).abs() <= 12.8, "n_min {n}");
        assert!((e.value_mw - 1.0).abs() < 0.05, "{}", e.value_mw);
        // The eigenvector penalty outweighs the likelihood gain at this size.
        let e = aic_estimate(&p, 100, AicPenalty::Eigen).unwrap();
        assert_eq!(n_min(&e), 0);
    }

    proptest! {
        #[test]
        fn n_min_matches_direct_evaluation(
            v in prop::collection::vec(0.1f64..10.0, 2..40),
            m in 1usize..50,
            eigen in any::<bool>(),
        ) {
            let pen = if eigen { AicPenalty::Eigen } else { AicPenalty::FixedBasis };
            let e = aic_estimate(&PowerSpectrum::new(v.clone(), 0).unwrap(), m, pen).unwrap();
            prop_assert_eq!(n_min(&e), oracle_n_min(&v, m, pen));
        }

        #[test]
        fn n_min_is_scale_invariant(v in prop::collection::vec(0.1f64..10.0, 2..40), e in -8i32..8) {
            let p = PowerSpectrum::new(v, 0).unwrap();
            let g = 2f64.powi(e);
            let a = aic_estimate(&p, 10, AicPenalty::default()).unwrap();
            let b = aic_estimate(&p.scaled(g), 10, AicPenalty::default()).unwrap();
            prop_assert_eq!(n_min(&a), n_min(&b));
            prop_assert!((b.value_mw - g * a.value_mw).abs() <= 1e-12 * b.value_mw);
        }
    }
}
