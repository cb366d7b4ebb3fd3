//! Rank-order filtering separation.
//!
//! The spectrum is eroded with growing minimum windows. The window width at
//! which the eroded energy drops fastest estimates the width `K` of the
//! widest band. A `K`-point moving average then exposes the bands: runs that
//! stand above the smoothed floor and are wider than `λ2·N` are kept, and
//! their edges are placed where the smoothed curve crosses half the band's
//! height above the floor.

use serde::{Deserialize, Serialize};

use super::{runs_of, SeparationDiagnostics, SeparationKind, SeparationMask};
use crate::ops::{NoTally, Tally};
use crate::spectral::PowerSpectrum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RofParams {
    /// Energy drop (percent) that keeps widening `K`.
    pub lambda1: f64,
    /// Minimum band width as a fraction of `N`.
    pub lambda2: f64,
    /// Level above the median of the smoothed spectrum that a band must reach, in dB.
    pub gate_db: f64,
}

impl Default for RofParams {
    fn default() -> Self {
        RofParams {
            lambda1: 5.0,
            lambda2: 0.05,
            gate_db: 3.0,
        }
    }
}

impl RofParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 > 0.0 && self.lambda1 < 100.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda1 must be in (0, 100), got {}",
                self.lambda1
            )));
        }
        if !(self.lambda2 > 0.0 && self.lambda2 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda2 must be in (0, 1), got {}",
                self.lambda2
            )));
        }
        if !(self.gate_db.is_finite() && self.gate_db >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gate_db must be finite and >= 0, got {}",
                self.gate_db
            )));
        }
        Ok(())
    }
}

/// Half-widths of a centred `k`-bin window: `n - left ..= n + right`.
fn half_widths(k: usize) -> (usize, usize) {
    ((k - 1) / 2, k / 2)
}

/// Minimum over a centred `k`-bin window, edges replicated.
pub fn rof_erode(power: &PowerSpectrum, k: usize) -> Result<PowerSpectrum> {
    let n = power.len();
    if k < 2 || k > n {
        return Err(Error::OutOfRange(format!(
            "erosion width {k} outside 2..={n}"
        )));
    }
    let (l, r) = half_widths(k);
    let p = &power.power;
    let out = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(l);
            let hi = (i + r).min(n - 1);
            p[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(PowerSpectrum {
        power: out,
        frame_index: power.frame_index,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandWidth {
    pub k: usize,
    /// Eroded energy for `k = 1..=N` (entry 0 is the input energy).
    pub energy: Vec<f64>,
    /// Percentage drop for `k = 2..=N` (entry 0 is `k = 2`).
    pub drop: Vec<f64>,
}

impl BandWidth {
    /// Drop at erosion width `k`.
    pub fn drop_at(&self, k: usize) -> f64 {
        self.drop[k - 2]
    }
}

pub fn rof_find_band_width(power: &PowerSpectrum, lambda1: f64) -> Result<BandWidth> {
    find_band_width(power, lambda1, &mut NoTally)
}

fn find_band_width(
    power: &PowerSpectrum,
    lambda1: f64,
    tally: &mut impl Tally,
) -> Result<BandWidth> {
    let n = power.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "band width search needs N >= 4, got {n}"
        )));
    }
    let p = &power.power;
    let e1: f64 = p.iter().sum();
    if e1 <= 0.0 {
        return Err(Error::DegenerateSpectrum("all-zero power spectrum".into()));
    }

    tally.stage("erosion");
    // Growing k by one widens the window on one side, so each step is one
    // more comparison per bin.
    let mut f = p.clone();
    let mut energy = Vec::with_capacity(n);
    let mut drop = Vec::with_capacity(n - 1);
    energy.push(e1);
    for k in 2..=n {
        let (l, r) = half_widths(k);
        if k % 2 == 0 {
            for (i, v) in f.iter_mut().enumerate() {
                *v = v.min(p[(i + r).min(n - 1)]);
            }
        } else {
            for (i, v) in f.iter_mut().enumerate() {
                *v = v.min(p[i.saturating_sub(l)]);
            }
        }
        let e: f64 = f.iter().sum();
        let prev = energy[k - 2];
        drop.push(if prev > 0.0 {
            100.0 * (prev - e) / prev
        } else {
            0.0
        });
        energy.push(e);
        tally.cmp(n as u64);
        tally.add(n as u64 + 1);
        tally.mul(2);
    }

    tally.stage("band_width");
    let mut k = 2;
    for (j, &d) in drop.iter().enumerate() {
        if d > drop[k - 2] {
            k = j + 2;
        }
    }
    tally.cmp(drop.len() as u64);
    while k < n && drop[k - 1] >= lambda1 {
        k += 1;
        tally.cmp(1);
    }
    Ok(BandWidth { k, energy, drop })
}

/// Centred `k`-point moving average with replicated edges.
fn moving_average(p: &[f64], k: usize, tally: &mut impl Tally) -> Vec<f64> {
    let n = p.len();
    let (l, r) = half_widths(k);
    let at = |j: isize| p[j.clamp(0, n as isize - 1) as usize];
    let mut sum: f64 = (-(l as isize)..=r as isize).map(at).sum();
    let mut out = Vec::with_capacity(n);
    for i in 0..n as isize {
        out.push(sum / k as f64);
        sum += at(i + r as isize + 1) - at(i - l as isize);
    }
    tally.add(2 * n as u64 + k as u64);
    tally.mul(n as u64);
    out
}

fn median(x: &[f64], tally: &mut impl Tally) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    tally.cmp((x.len() as f64 * (x.len() as f64).log2()).ceil() as u64);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

pub fn rof_separate(power: &PowerSpectrum, params: &RofParams) -> Result<SeparationMask> {
    rof_separate_with(power, params, &mut NoTally)
}

pub(crate) fn rof_separate_with(
    power: &PowerSpectrum,
    params: &RofParams,
    tally: &mut impl Tally,
) -> Result<SeparationMask> {
    params.validate()?;
    let n = power.len();
    let bw = find_band_width(power, params.lambda1, tally)?;

    tally.stage("smoothing");
    let smooth = moving_average(&power.power, bw.k, tally);
    let floor = median(&smooth, tally);
    let level = floor * 10f64.powf(params.gate_db / 10.0);
    let above: Vec<bool> = smooth.iter().map(|&v| v > level).collect();
    let min_width = params.lambda2 * n as f64;
    let gated: Vec<(usize, usize)> = runs_of(&above)
        .into_iter()
        .filter(|(s, e)| (e - s) as f64 > min_width)
        .collect();
    tally.cmp(2 * n as u64);

    // A rectangular band smoothed by a K-point average becomes a trapezoid
    // whose ramps cross half the band's height at the band edges. The gated
    // run spans about K/2 beyond the band on each side, so its core gives
    // the band's height.
    let (l, r) = half_widths(bw.k);
    let mut runs = Vec::with_capacity(gated.len());
    for &(mut s, mut e) in &gated {
        let core = &power.power[(s + r).min(e)..e.saturating_sub(l).max(s + r).min(e)];
        let top = if core.is_empty() {
            smooth[s..e]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            core.iter().sum::<f64>() / core.len() as f64
        };
        tally.add(core.len() as u64);
        let half = 0.5 * (top + floor);
        while s > 0 && smooth[s - 1] >= half {
            s -= 1;
        }
        while s + 1 < e && smooth[s] < half {
            s += 1;
        }
        while e < n && smooth[e] >= half {
            e += 1;
        }
        while e > s + 1 && smooth[e - 1] < half {
            e -= 1;
        }
        runs.push((s, e));
    }
    tally.cmp(2 * n as u64);
    tally.add(gated.len() as u64);
    tally.mul(gated.len() as u64);

    let mut is_signal = mark(n, &runs);
    if !is_signal.is_empty() && is_signal.iter().all(|s| *s) {
        log::debug!("rof: extended runs cover every bin, using gated runs");
        runs = gated;
        is_signal = mark(n, &runs);
        if is_signal.iter().all(|s| *s) {
            return Err(Error::DegenerateSpectrum(
                "every bin classified as signal".into(),
            ));
        }
    }
    Ok(SeparationMask {
        is_signal,
        method: SeparationKind::Rof,
        aux: SeparationDiagnostics {
            band_width: Some(bw.k),
            energy_drop: bw.drop,
            smoothed: smooth,
            runs: runs_of(&mark(n, &runs)),
            ..Default::default()
        },
    })
}

fn mark(n: usize, runs: &[(usize, usize)]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &(s, e) in runs {
        m[s..e].iter_mut().for_each(|v| *v = true);
    }
    m
}
