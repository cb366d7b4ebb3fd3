//! Noise generation and power rescaling.
//!
//! Random draws come from ChaCha streams keyed by `(seed, block)`, so any
//! block of samples can be regenerated without producing the ones before it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::spectral::{mean_power, ComplexSeries};
use crate::{Error, Result};

const BLOCK: usize = 4096;
const IMPULSE_STREAM: u64 = 1 << 63;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Parameters of the surrogate industrial noise model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndustrialParams {
    /// Probability that a sample carries an impulse, in `[0, 1)`.
    pub impulse_rate: f64,
    /// Impulse magnitude relative to the RMS of the Gaussian base.
    pub impulse_factor: f64,
    /// Spectral slope of the shaping filter; negative values attenuate
    /// high frequencies.
    pub tilt_db_per_decade: f64,
}

impl Default for IndustrialParams {
    fn default() -> Self {
        IndustrialParams {
            impulse_rate: 1e-3,
            impulse_factor: 10.0,
            tilt_db_per_decade: -3.0,
        }
    }
}

impl IndustrialParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.impulse_rate) {
            return Err(Error::InvalidParameter(format!(
                "impulse rate must be in [0, 1), got {}",
                self.impulse_rate
            )));
        }
        if !(self.impulse_factor.is_finite() && self.impulse_factor >= 0.0) {
            return Err(Error::InvalidParameter(
                "impulse factor must be finite and >= 0".into(),
            ));
        }
        if !self.tilt_db_per_decade.is_finite() {
            return Err(Error::InvalidParameter("tilt must be finite".into()));
        }
        Ok(())
    }

    /// Pole of the one-pole shaping filter `y[n] = x[n] + ρ·y[n-1]`.
    fn pole(&self) -> f64 {
        (-self.tilt_db_per_decade / 20.0).tanh().clamp(-0.99, 0.99)
    }
}

fn white_block(seed: u64, block: usize, len: usize, sigma: f64) -> Vec<Complex64> {
    let mut rng = stream(seed, block as u64);
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * sigma, im * sigma)
        })
        .collect()
}

/// Circularly-symmetric complex Gaussian noise with `E|w|² = power_mw`.
pub fn synth_white_noise(
    length: usize,
    power_mw: f64,
    seed: u64,
    sample_rate_hz: f64,
) -> Result<ComplexSeries> {
    if length == 0 {
        return Err(Error::InvalidParameter(
            "noise length must be at least 1".into(),
        ));
    }
    if !(power_mw > 0.0 && power_mw.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise power must be positive, got {power_mw}"
        )));
    }
    let sigma = (power_mw / 2.0).sqrt();
    let samples = (0..length.div_ceil(BLOCK))
        .flat_map(|b| white_block(seed, b, BLOCK.min(length - b * BLOCK), sigma))
        .collect();
    ComplexSeries::new(samples, sample_rate_hz)
}

/// Surrogate for measured industrial noise: a Gaussian base with sparse
/// complex impulses, shaped by a one-pole filter, rescaled to `power_mw`.
pub fn synth_industrial_noise(
    length: usize,
    params: &IndustrialParams,
    power_mw: f64,
    seed: u64,
    sample_rate_hz: f64,
) -> Result<ComplexSeries> {
    params.validate()?;
    let base = synth_white_noise(length, 1.0, seed, sample_rate_hz)?.into_samples();
    let rho = params.pole();
    let mut out = Vec::with_capacity(length);
    let mut prev = Complex64::new(0.0, 0.0);
    for (b, chunk) in base.chunks(BLOCK).enumerate() {
        let mut rng = stream(seed, IMPULSE_STREAM | b as u64);
        for &x in chunk {
            let mut v = x;
            if params.impulse_rate > 0.0 && rng.random::<f64>() < params.impulse_rate {
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                v += Complex64::from_polar(params.impulse_factor, phase);
            }
            prev = v + prev * rho;
            out.push(prev);
        }
    }
    rescale_to_power(&ComplexSeries::new(out, sample_rate_hz)?, power_mw)
}

/// Multiplies the series by one real factor so its mean power is `target_mw`.
pub fn rescale_to_power(series: &ComplexSeries, target_mw: f64) -> Result<ComplexSeries> {
    if !(target_mw > 0.0 && target_mw.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target power must be positive, got {target_mw}"
        )));
    }
    let current = mean_power(series.samples());
    if current <= 0.0 {
        return Err(Error::ZeroPowerInput);
    }
    let gain = (target_mw / current).sqrt();
    ComplexSeries::new(
        series.samples().iter().map(|s| s * gain).collect(),
        series.sample_rate_hz(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_by_two() {
        let s = ComplexSeries::new(vec![Complex64::new(1.0, 0.0); 2], 1.0).unwrap();
        let r = rescale_to_power(&s, 4.0).unwrap();
        assert_eq!(r.samples(), &[Complex64::new(2.0, 0.0); 2]);
    }

    #[test]
    fn rescale_at_current_power_is_identity() {
        let s = synth_white_noise(1000, 2.5, 3, 1.0).unwrap();
        let r = rescale_to_power(&s, s.mean_power()).unwrap();
        for (a, b) in s.samples().iter().zip(r.samples()) {
            assert!((a - b).norm() <= 1e-15 * a.norm().max(1.0));
        }
    }

    #[test]
    fn rescale_rejects_zero_power() {
        let s = ComplexSeries::new(vec![Complex64::new(0.0, 0.0); 3], 1.0).unwrap();
        assert!(matches!(
            rescale_to_power(&s, 1.0),
            Err(Error::ZeroPowerInput)
        ));
    }

    #[test]
    fn rescaled_megasample_hits_target() {
        let s = synth_white_noise(1_000_000, 0.3, 11, 1.0).unwrap();
        let r = rescale_to_power(&s, 1.0).unwrap();
        assert!((r.mean_power() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn white_noise_is_deterministic_per_seed() {
        let a = synth_white_noise(5000, 1.0, 42, 1.0).unwrap();
        let b = synth_white_noise(5000, 1.0, 42, 1.0).unwrap();
        let c = synth_white_noise(5000, 1.0, 43, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn prefix_is_independent_of_length() {
        let short = synth_white_noise(5000, 1.0, 7, 1.0).unwrap();
        let long = synth_white_noise(20000, 1.0, 7, 1.0).unwrap();
        assert_eq!(short.samples(), &long.samples()[..5000]);
    }

    #[test]
    fn white_noise_moments() {
        let s = synth_white_noise(1_000_000, 1.0, 1, 1.0).unwrap();
        let n = s.len() as f64;
        let p = s.mean_power();
        assert!((p - 1.0).abs() < 0.005, "power {p}");
        let var_re = s.samples().iter().map(|v| v.re * v.re).sum::<f64>() / n;
        let var_im = s.samples().iter().map(|v| v.im * v.im).sum::<f64>() / n;
        assert!((var_re - 0.5).abs() < 0.005, "re variance {var_re}");
        assert!((var_im - 0.5).abs() < 0.005, "im variance {var_im}");
    }

    #[test]
    fn industrial_noise_is_deterministic_and_scaled() {
        let p = IndustrialParams::default();
        let a = synth_industrial_noise(10_000, &p, 1.0, 5, 1.0).unwrap();
        let b = synth_industrial_noise(10_000, &p, 1.0, 5, 1.0).unwrap();
        assert_eq!(a, b);
        assert!((a.mean_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn industrial_params_are_validated() {
        let mut p = IndustrialParams {
            impulse_rate: 1.0,
            ..Default::default()
        };
        assert!(synth_industrial_noise(10, &p, 1.0, 0, 1.0).is_err());
        p.impulse_rate = 0.0;
        p.tilt_db_per_decade = f64::NAN;
        assert!(p.validate().is_err());
    }

    /// One-sample Kolmogorov–Smirnov p-value against `cdf`.
    fn ks_p_value(mut x: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        x.sort_by(f64::total_cmp);
        let n = x.len() as f64;
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = cdf(v);
                (f - i as f64 / n).max((i + 1) as f64 / n - f)
            })
            .fold(0.0, f64::max);
        let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
        let q: f64 = (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u64 % 2 == 1 { 2.0 } else { -2.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum();
        q.clamp(0.0, 1.0)
    }

    #[test]
    fn plain_surrogate_is_gaussian() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let p = IndustrialParams {
            impulse_rate: 0.0,
            impulse_factor: 10.0,
            tilt_db_per_decade: 0.0,
        };
        let s = synth_industrial_noise(100_000, &p, 1.0, 21, 1.0).unwrap();
        let normal = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
        let re: Vec<f64> = s.samples().iter().map(|v| v.re).collect();
        let im: Vec<f64> = s.samples().iter().map(|v| v.im).collect();
        assert!(ks_p_value(re, |x| normal.cdf(x)) > 0.01);
        assert!(ks_p_value(im, |x| normal.cdf(x)) > 0.01);
    }

    #[test]
    fn ks_rejects_wrong_scale() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let s = synth_white_noise(100_000, 1.0, 21, 1.0).unwrap();
        let wrong = Normal::new(0.0, 0.8).unwrap();
        let re: Vec<f64> = s.samples().iter().map(|v| v.re).collect();
        assert!(ks_p_value(re, |x| wrong.cdf(x)) < 1e-6);
    }

    fn kurtosis_of_power(s: &ComplexSeries) -> f64 {
        let p: Vec<f64> = s.samples().iter().map(|v| v.norm_sqr()).collect();
        let n = p.len() as f64;
        let mean = p.iter().sum::<f64>() / n;
        let m2 = p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m4 = p.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        m4 / (m2 * m2)
    }

    #[test]
    fn impulses_raise_kurtosis() {
        let p = IndustrialParams {
            impulse_rate: 1e-3,
            impulse_factor: 10.0,
            tilt_db_per_decade: 0.0,
        };
        let imp = synth_industrial_noise(200_000, &p, 1.0, 4, 1.0).unwrap();
        let base = synth_white_noise(200_000, 1.0, 4, 1.0).unwrap();
        // |w|² of complex Gaussian noise is exponential, kurtosis 9.
        let kb = kurtosis_of_power(&base);
        assert!((kb - 9.0).abs() < 1.0, "{kb}");
        assert!(kurtosis_of_power(&imp) > kb + 5.0);
    }
}
