//! Framing, transforms and periodograms.
//!
//! Conventions: frames are rectangular and non-overlapping; the forward DFT
//! is unnormalised, and power bins are `|X(n)|² / N` so that the mean of a
//! power spectrum equals the mean time-domain power of its frame.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::ops::{NoTally, Tally};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl ComplexSeries {
    /// Validates that every sample is finite. An empty series is allowed so
    /// that empty captures fail later with a sample-count error.
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        check_finite(&samples)?;
        Ok(ComplexSeries {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of `|s|²`.
    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }
}

pub(crate) fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

fn check_finite(samples: &[Complex64]) -> Result<()> {
    match samples
        .iter()
        .position(|s| !s.re.is_finite() || !s.im.is_finite())
    {
        Some(index) => Err(Error::NonFiniteSample { index }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame {
    pub bins: Vec<Complex64>,
    pub frame_index: usize,
}

impl SpectralFrame {
    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub power: Vec<f64>,
    pub frame_index: usize,
}

impl PowerSpectrum {
    /// Checks that every entry is finite and non-negative.
    pub fn new(power: Vec<f64>, frame_index: usize) -> Result<Self> {
        if let Some(i) = power.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "power bin {i} is {} (must be finite and non-negative)",
                power[i]
            )));
        }
        Ok(PowerSpectrum { power, frame_index })
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.power.is_empty() {
            return 0.0;
        }
        self.power.iter().sum::<f64>() / self.power.len() as f64
    }

    pub fn scaled(&self, gain: f64) -> PowerSpectrum {
        PowerSpectrum {
            power: self.power.iter().map(|p| p * gain).collect(),
            frame_index: self.frame_index,
        }
    }
}

/// `M` frames of `N` bins, frame indices `0..M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceBlock {
    frames: Vec<SpectralFrame>,
    n_bins: usize,
}

impl ResourceBlock {
    pub fn new(mut frames: Vec<SpectralFrame>) -> Result<Self> {
        let n_bins = frames.first().map(SpectralFrame::n_bins).ok_or_else(|| {
            Error::InvalidParameter("resource block needs at least one frame".into())
        })?;
        if n_bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "frames need N >= 2 bins, got {n_bins}"
            )));
        }
        for (i, f) in frames.iter_mut().enumerate() {
            if f.n_bins() != n_bins {
                return Err(Error::InvalidParameter(format!(
                    "frame {i} has {} bins, expected {n_bins}",
                    f.n_bins()
                )));
            }
            f.frame_index = i;
        }
        Ok(ResourceBlock { frames, n_bins })
    }

    pub fn frames(&self) -> &[SpectralFrame] {
        &self.frames
    }

    pub fn frames_mut(&mut self) -> &mut [SpectralFrame] {
        &mut self.frames
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    /// Frames `start..end` re-indexed from zero.
    pub fn window(&self, start: usize, end: usize) -> Result<ResourceBlock> {
        if start >= end || end > self.frames.len() {
            return Err(Error::OutOfRange(format!(
                "window {start}..{end} of a {}-frame block",
                self.frames.len()
            )));
        }
        ResourceBlock::new(self.frames[start..end].to_vec())
    }

    pub fn scaled(&self, amplitude_gain: f64) -> ResourceBlock {
        let frames = self
            .frames
            .iter()
            .map(|f| SpectralFrame {
                bins: f.bins.iter().map(|b| b * amplitude_gain).collect(),
                frame_index: f.frame_index,
            })
            .collect();
        ResourceBlock {
            frames,
            n_bins: self.n_bins,
        }
    }

    pub fn power_spectra(&self) -> Vec<PowerSpectrum> {
        self.frames.iter().map(power_spectrum).collect()
    }
}

/// Splits the first `frame_len * frame_count` samples into consecutive
/// frames. Trailing samples are dropped.
pub fn frame_signal(
    series: &ComplexSeries,
    frame_len: usize,
    frame_count: usize,
) -> Result<Vec<Vec<Complex64>>> {
    if frame_len == 0 || frame_count == 0 {
        return Err(Error::InvalidParameter(
            "frame length and frame count must be at least 1".into(),
        ));
    }
    let needed = frame_len * frame_count;
    let available = series.len();
    if available < needed {
        return Err(Error::InsufficientSamples { needed, available });
    }
    if available > needed {
        log::debug!(
            "frame_signal: discarding {} trailing samples",
            available - needed
        );
    }
    Ok(series.samples()[..needed]
        .chunks_exact(frame_len)
        .map(<[Complex64]>::to_vec)
        .collect())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn transform(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let fft = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// Unnormalised forward DFT of one time-domain frame.
pub fn dft(frame: &[Complex64], frame_index: usize) -> Result<SpectralFrame> {
    dft_with(frame, frame_index, &mut NoTally)
}

pub(crate) fn dft_with(
    frame: &[Complex64],
    frame_index: usize,
    tally: &mut impl Tally,
) -> Result<SpectralFrame> {
    if frame.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "DFT needs at least 2 samples, got {}",
            frame.len()
        )));
    }
    check_finite(frame)?;
    let mut bins = frame.to_vec();
    transform(&mut bins, false);
    // Nominal radix-2 cost: N/2·log2 N butterflies, 6 adds and 4 muls each.
    let n = frame.len() as f64;
    let butterflies = (n / 2.0 * n.log2()).ceil() as u64;
    tally.stage("fft");
    tally.add(6 * butterflies);
    tally.mul(4 * butterflies);
    Ok(SpectralFrame { bins, frame_index })
}

/// Inverse of [`dft`]: returns the time-domain samples of a spectral frame.
pub fn idft(frame: &SpectralFrame) -> Vec<Complex64> {
    let mut buf = frame.bins.clone();
    transform(&mut buf, true);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|s| *s *= scale);
    buf
}

/// `power(n) = |X(n)|² / N`.
pub fn power_spectrum(frame: &SpectralFrame) -> PowerSpectrum {
    power_spectrum_with(frame, &mut NoTally)
}

pub(crate) fn power_spectrum_with(frame: &SpectralFrame, tally: &mut impl Tally) -> PowerSpectrum {
    let n = frame.bins.len();
    let scale = 1.0 / n as f64;
    tally.stage("power");
    tally.mul(3 * n as u64);
    tally.add(n as u64);
    PowerSpectrum {
        power: frame.bins.iter().map(|b| b.norm_sqr() * scale).collect(),
        frame_index: frame.frame_index,
    }
}

/// Bin-wise mean of the block's per-frame power spectra. The output frame
/// index is the index of the block's last frame.
pub fn averaged_periodogram(block: &ResourceBlock) -> PowerSpectrum {
    averaged_periodogram_with(block, &mut NoTally)
}

pub(crate) fn averaged_periodogram_with(
    block: &ResourceBlock,
    tally: &mut impl Tally,
) -> PowerSpectrum {
    let n = block.n_bins();
    let m = block.n_frames();
    let scale = 1.0 / (n as f64 * m as f64);
    let mut acc = vec![0.0; n];
    for f in block.frames() {
        for (a, b) in acc.iter_mut().zip(&f.bins) {
            *a += b.norm_sqr();
        }
    }
    acc.iter_mut().for_each(|a| *a *= scale);
    tally.stage("periodogram");
    tally.mul(2 * (n * m) as u64 + n as u64);
    tally.add(2 * (n * m) as u64);
    PowerSpectrum {
        power: acc,
        frame_index: m - 1,
    }
}
