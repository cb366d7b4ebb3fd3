//! Two-class split of bin amplitudes maximising Fisher's criterion.

use super::{SeparationDiagnostics, SeparationKind, SeparationMask};
use crate::ops::{NoTally, Tally};
use crate::spectral::PowerSpectrum;
use crate::{Error, Result};

/// Ratio of between-class to within-class variance,
/// `J = w_l·w_h·(μ_l − μ_h)² / (w_l·σ²_l + w_h·σ²_h)`, where `w` are the
/// class proportions and `σ²` the class variances. `None` when both
/// variances and the mean difference vanish.
pub fn fisher_criterion(low: &[f64], high: &[f64]) -> Option<f64> {
    criterion(low, high, &mut NoTally)
}

fn mean_var(x: &[f64], tally: &mut impl Tally) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    tally.add(3 * x.len() as u64);
    tally.mul(x.len() as u64 + 2);
    (mean, var)
}

fn criterion(low: &[f64], high: &[f64], tally: &mut impl Tally) -> Option<f64> {
    let (ml, vl) = mean_var(low, tally);
    let (mh, vh) = mean_var(high, tally);
    let total = (low.len() + high.len()) as f64;
    let (wl, wh) = (low.len() as f64 / total, high.len() as f64 / total);
    let num = wl * wh * (ml - mh) * (ml - mh);
    let den = wl * vl + wh * vh;
    tally.add(2);
    tally.mul(7);
    if den > 0.0 {
        Some(num / den)
    } else if num > 0.0 {
        Some(f64::INFINITY)
    } else {
        None
    }
}

/// Splits the ascending amplitudes `√P` at the point maximising Fisher's
/// criterion; the upper group is signal. Ties go to the smaller signal group.
pub fn fisher_separate(power: &PowerSpectrum) -> Result<SeparationMask> {
    fisher_separate_with(power, &mut NoTally)
}

pub(crate) fn fisher_separate_with(
    power: &PowerSpectrum,
    tally: &mut impl Tally,
) -> Result<SeparationMask> {
    let n = power.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "Fisher split needs N >= 4, got {n}"
        )));
    }
    tally.stage("fisher_sort");
    let amp: Vec<f64> = power.power.iter().map(|p| p.sqrt()).collect();
    tally.transcendental(n as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| amp[a].total_cmp(&amp[b]));
    tally.cmp((n as f64 * (n as f64).log2()).ceil() as u64);
    let sorted: Vec<f64> = order.iter().map(|&i| amp[i]).collect();

    tally.stage("fisher_scan");
    let mut best: Option<(usize, f64)> = None;
    for t in 2..=n - 2 {
        let Some(j) = criterion(&sorted[..t], &sorted[t..], tally) else {
            continue;
        };
        tally.cmp(1);
        if best.is_none_or(|(_, b)| j >= b) {
            best = Some((t, j));
        }
    }

    let mut is_signal = vec![false; n];
    if let Some((t, _)) = best {
        for &i in &order[t..] {
            is_signal[i] = true;
        }
    }
    Ok(SeparationMask {
        is_signal,
        method: SeparationKind::Fisher,
        aux: SeparationDiagnostics {
            fisher_split: best.map(|b| b.0),
            fisher_criterion: best.map(|b| b.1),
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spectrum(amplitudes: &[f64]) -> PowerSpectrum {
        PowerSpectrum::new(amplitudes.iter().map(|a| a * a).collect(), 0).unwrap()
    }

    /// Exhaustive scan with prefix sums, independent of the code above.
    fn oracle_split(amplitudes: &[f64]) -> Option<usize> {
        let mut s = amplitudes.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let mut c1 = vec![0.0; n + 1];
        let mut c2 = vec![0.0; n + 1];
        for i in 0..n {
            c1[i + 1] = c1[i] + s[i];
            c2[i + 1] = c2[i] + s[i] * s[i];
        }
        // Within-class scatter plus between-class scatter is the total.
        let total = c2[n] - c1[n] * c1[n] / n as f64;
        let mut best: Option<(usize, f64)> = None;
        for t in 2..=n - 2 {
            let (a, b) = (t as f64, (n - t) as f64);
            let ml = c1[t] / a;
            let mh = (c1[n] - c1[t]) / b;
            let num = a * b / n as f64 * (ml - mh).powi(2);
            let den = (total - num).max(0.0);
            let j = if den > 1e-12 * (1.0 + num) {
                num / den
            } else if num > 0.0 {
                f64::INFINITY
            } else {
                continue;
            };
            if best.is_none_or(|(_, b)| j >= b * (1.0 - 1e-12)) {
                best = Some((t, j));
            }
        }
        best.map(|b| b.0)
    }

    #[test]
    fn isolates_two_strong_bins() {
        let m = fisher_separate(&spectrum(&[1.0, 10.0, 1.0, 10.0, 1.0])).unwrap();
        assert_eq!(m.is_signal, vec![false, true, false, true, false]);
        assert_eq!(m.aux.fisher_split, Some(3));
    }

    #[test]
    fn constant_spectrum_is_all_noise() {
        let m = fisher_separate(&spectrum(&[2.0; 16])).unwrap();
        assert_eq!(m.signal_count(), 0);
        assert_eq!(m.aux.fisher_split, None);
    }

    #[test]
    fn rejects_tiny_spectra() {
        assert!(fisher_separate(&spectrum(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn criterion_matches_hand_value() {
        // means 1.5 and 3.5, variances 0.5 and 0.5
        let j = fisher_criterion(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert!((j - 4.0).abs() < 1e-12);
        assert_eq!(fisher_criterion(&[1.0, 1.0], &[1.0, 1.0]), None);
        assert_eq!(
            fisher_criterion(&[1.0, 1.0], &[2.0, 2.0]),
            Some(f64::INFINITY)
        );
    }

    proptest! {
        #[test]
        fn split_matches_exhaustive_scan(amps in prop::collection::vec(0.01f64..10.0, 4..=64)) {
            let m = fisher_separate(&spectrum(&amps)).unwrap();
            prop_assert_eq!(m.aux.fisher_split, oracle_split(&amps));
        }
    }
}
