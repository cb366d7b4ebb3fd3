//! Simulated ISM-band observations.
//!
//! Noise is generated (or loaded from an I/Q trace), rescaled to the
//! reference power, framed and transformed. Rectangular signals are then
//! added directly to the spectral bins, so the ground truth is exact.
//!
//! Amplitudes are in mV with `A² / 1000` giving mW: a signal of amplitude
//! `A` adds `A² / 1000` mW to each occupied power bin.

mod config;
mod iq;
mod noise;

pub use config::{
    apply_override, BinRange, NoiseKind, NoiseSource, NoiseStep, ScenarioConfig, SignalLevel,
    SubbandSignal,
};
pub use iq::{decode_iq, load_iq_trace, write_iq_trace};
pub use noise::{rescale_to_power, synth_industrial_noise, synth_white_noise, IndustrialParams};

use num_complex::Complex64;

use crate::spectral::{dft, frame_signal, idft, ComplexSeries, ResourceBlock, SpectralFrame};
use crate::{Error, Result};

/// Per-frame truth of a built scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub noise_power_mw: Vec<f64>,
    pub signal_power_mw: Vec<f64>,
    /// Whole-band SNR; `-inf` on frames without signal.
    pub true_snr_db: Vec<f64>,
    pub signal_mask: Vec<Vec<bool>>,
}

impl GroundTruth {
    pub fn n_frames(&self) -> usize {
        self.noise_power_mw.len()
    }

    pub fn mask(&self, frame_index: usize) -> Result<&[bool]> {
        self.signal_mask
            .get(frame_index)
            .map(Vec::as_slice)
            .ok_or_else(|| {
                Error::OutOfRange(format!(
                    "frame {frame_index} of a {}-frame scenario",
                    self.n_frames()
                ))
            })
    }
}

/// Amplitude (mV) of a rectangular signal covering `occupied_fraction` of
/// the band that gives a whole-band SNR of `target_snr_db`.
pub fn amplitude_for_snr(
    target_snr_db: f64,
    noise_power_mw: f64,
    occupied_fraction: f64,
) -> Result<f64> {
    if !(occupied_fraction > 0.0 && occupied_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "occupied fraction must be in (0, 1], got {occupied_fraction}"
        )));
    }
    if !(noise_power_mw > 0.0 && noise_power_mw.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise power must be positive, got {noise_power_mw}"
        )));
    }
    Ok((1000.0 * noise_power_mw * 10f64.powf(target_snr_db / 10.0) / occupied_fraction).sqrt())
}

/// Spectral-bin value of amplitude `amplitude_mv` in an `n_bins` frame.
fn bin_value(amplitude_mv: f64, n_bins: usize) -> f64 {
    amplitude_mv * (n_bins as f64 / 1000.0).sqrt()
}

/// Adds a rectangular spectrum of amplitude `amplitude_mv` to `band`.
pub fn inject_rect_signal(
    frame: &mut SpectralFrame,
    band: BinRange,
    amplitude_mv: f64,
) -> Result<()> {
    let n = frame.n_bins();
    if band.start >= band.end || band.end > n {
        return Err(Error::OutOfRange(format!(
            "band {}..{} in a {n}-bin frame",
            band.start, band.end
        )));
    }
    if !(amplitude_mv.is_finite() && amplitude_mv >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "amplitude must be finite and >= 0, got {amplitude_mv}"
        )));
    }
    let c = bin_value(amplitude_mv, n);
    for b in &mut frame.bins[band.start..band.end] {
        *b += c;
    }
    Ok(())
}

fn noise_series(config: &ScenarioConfig) -> Result<ComplexSeries> {
    let len = config.n_bins * config.n_frames;
    let p = config.reference_noise_power_mw;
    let src = &config.noise;
    match src.kind {
        NoiseKind::WhiteGaussian => synth_white_noise(len, p, src.seed, config.sample_rate_hz),
        NoiseKind::SurrogateIndustrial => synth_industrial_noise(
            len,
            &src.industrial_params(),
            p,
            src.seed,
            config.sample_rate_hz,
        ),
        NoiseKind::TraceFile => {
            let path = src
                .path
                .as_ref()
                .ok_or_else(|| Error::Config("trace-file noise needs a path".into()))?;
            let trace = load_iq_trace(path, config.sample_rate_hz)?;
            if trace.len() < len {
                return Err(Error::InsufficientSamples {
                    needed: len,
                    available: trace.len(),
                });
            }
            let head = ComplexSeries::new(trace.samples()[..len].to_vec(), config.sample_rate_hz)?;
            rescale_to_power(&head, p)
        }
    }
}

/// Builds the observed block and its ground truth.
pub fn build_scenario(config: &ScenarioConfig) -> Result<(ResourceBlock, GroundTruth)> {
    config.validate()?;
    let n = config.n_bins;
    let m = config.n_frames;
    let noise = noise_series(config)?;
    let mut frames = frame_signal(&noise, n, m)?
        .iter()
        .enumerate()
        .map(|(i, f)| dft(f, i))
        .collect::<Result<Vec<_>>>()?;

    let mut noise_power = Vec::with_capacity(m);
    for (i, f) in frames.iter_mut().enumerate() {
        let gain = config.noise_gain(i);
        if gain != 1.0 {
            let g = gain.sqrt();
            f.bins.iter_mut().for_each(|b| *b *= g);
        }
        noise_power.push(config.reference_noise_power_mw * gain);
    }

    // Signal bin values per frame, accumulated so overlapping signals add.
    let mut added = vec![vec![0.0f64; n]; m];
    for s in &config.signals {
        let band = config.occupied_range(s);
        let amplitude = match s.level()? {
            SignalLevel::AmplitudeMv(a) => a,
            SignalLevel::TargetSnrDb(snr) => amplitude_for_snr(
                snr,
                config.reference_noise_power_mw,
                band.width() as f64 / n as f64,
            )?,
        };
        for i in config.signal_frames(s) {
            inject_rect_signal(&mut frames[i], band, amplitude)?;
            let c = bin_value(amplitude, n);
            added[i][band.start..band.end]
                .iter_mut()
                .for_each(|v| *v += c);
        }
    }

    let mut signal_power = Vec::with_capacity(m);
    let mut snr = Vec::with_capacity(m);
    let mut masks = Vec::with_capacity(m);
    for (i, a) in added.iter().enumerate() {
        let ps = a.iter().map(|c| c * c).sum::<f64>() / (n * n) as f64;
        signal_power.push(ps);
        snr.push(if ps > 0.0 {
            10.0 * (ps / noise_power[i]).log10()
        } else {
            f64::NEG_INFINITY
        });
        masks.push(a.iter().map(|&c| c != 0.0).collect());
    }

    let block = ResourceBlock::new(frames)?;
    Ok((
        block,
        GroundTruth {
            noise_power_mw: noise_power,
            signal_power_mw: signal_power,
            true_snr_db: snr,
            signal_mask: masks,
        },
    ))
}

/// Time-domain samples of a block, frames concatenated.
pub fn block_to_samples(block: &ResourceBlock) -> Vec<Complex64> {
    block.frames().iter().flat_map(idft).collect()
}
