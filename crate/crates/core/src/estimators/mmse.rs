//! Blind MMSE noise power prediction.
//!
//! Each subcarrier's time-mean is removed, the per-subcarrier variances of
//! the first `M − 1` frames give the circular variance autocorrelation
//! `r(Δ)`, and the weights `w = (C + r(0)·I)⁻¹ r` with `C(n, m) = r(|n − m|)`
//! combine the last frame's bin powers.

use num_complex::Complex64;

use super::{EstimateDiagnostics, EstimatorKind, NoisePowerEstimate};
use crate::ops::{NoTally, Tally};
use crate::spectral::{transform, ResourceBlock};
use crate::{Error, Result};

/// Solves `T·x = b` for the symmetric Toeplitz matrix with first row `t`
/// (Levinson recursion, `O(n²)`). Fails with [`Error::SingularSystem`] when
/// a leading minor is not positive.
pub fn levinson_solve(t: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    levinson(t, b, &mut NoTally)
}

fn levinson(t: &[f64], b: &[f64], tally: &mut impl Tally) -> Result<Vec<f64>> {
    let n = t.len();
    if n == 0 || b.len() != n {
        return Err(Error::InvalidParameter(format!(
            "Toeplitz row of {n} with right-hand side of {}",
            b.len()
        )));
    }
    let t0 = t[0];
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let r: Vec<f64> = t[1..].iter().map(|v| v / t0).collect();
    let rhs: Vec<f64> = b.iter().map(|v| v / t0).collect();
    let mut x = vec![0.0; n];
    x[0] = rhs[0];
    if n == 1 {
        return Ok(x);
    }
    let mut y = vec![0.0; n];
    y[0] = -r[0];
    let mut alpha = -r[0];
    let mut beta = 1.0;
    let mut scratch = vec![0.0; n];
    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::SingularSystem);
        }
        let dot: f64 = (0..k).map(|i| r[i] * x[k - 1 - i]).sum();
        let mu = (rhs[k] - dot) / beta;
        for i in 0..k {
            scratch[i] = x[i] + mu * y[k - 1 - i];
        }
        x[..k].copy_from_slice(&scratch[..k]);
        x[k] = mu;
        tally.add(3 * k as u64 + 2);
        tally.mul(2 * k as u64 + 3);
        if k < n - 1 {
            let dot: f64 = (0..k).map(|i| r[i] * y[k - 1 - i]).sum();
            alpha = (-r[k] - dot) / beta;
            for i in 0..k {
                scratch[i] = y[i] + alpha * y[k - 1 - i];
            }
            y[..k].copy_from_slice(&scratch[..k]);
            y[k] = alpha;
            tally.add(2 * k as u64 + 1);
            tally.mul(2 * k as u64 + 1);
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(x)
}

struct Prepared {
    /// Bin powers of the last frame.
    last: Vec<f64>,
    /// `r(0..N)`.
    r: Vec<f64>,
}

fn prepare(block: &ResourceBlock, blind: bool, tally: &mut impl Tally) -> Result<Prepared> {
    let m = block.n_frames();
    let n = block.n_bins();
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "MMSE needs M >= 3 frames, got {m}"
        )));
    }
    let frames = block.frames();
    tally.stage("centering");
    let mean: Vec<Complex64> = if blind {
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for f in frames {
            for (a, b) in acc.iter_mut().zip(&f.bins) {
                *a += b;
            }
        }
        tally.add(2 * (m * n) as u64);
        tally.mul(2 * n as u64);
        acc.into_iter().map(|a| a / m as f64).collect()
    } else {
        vec![Complex64::new(0.0, 0.0); n]
    };
    // Centering removes 1/M of each bin's expected power.
    let inv_n = if blind {
        m as f64 / ((m - 1) * n) as f64
    } else {
        1.0 / n as f64
    };
    let power = |f: &[Complex64], i: usize| (f[i] - mean[i]).norm_sqr() * inv_n;

    tally.stage("variance");
    let mut var = vec![0.0; n];
    for f in &frames[..m - 1] {
        for (i, v) in var.iter_mut().enumerate() {
            *v += power(&f.bins, i);
        }
    }
    var.iter_mut().for_each(|v| *v /= (m - 1) as f64);
    let last: Vec<f64> = (0..n).map(|i| power(&frames[m - 1].bins, i)).collect();
    tally.add(4 * (m * n) as u64);
    tally.mul(3 * (m * n) as u64);

    // Circular autocorrelation through the FFT: every lag averages N
    // products, and the resulting Toeplitz matrix is circulant, hence
    // positive semidefinite.
    tally.stage("autocorrelation");
    let mut spec: Vec<Complex64> = var.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    transform(&mut spec, false);
    spec.iter_mut()
        .for_each(|s| *s = Complex64::new(s.norm_sqr(), 0.0));
    transform(&mut spec, true);
    let scale = 1.0 / (n as f64 * n as f64);
    let r: Vec<f64> = spec.iter().map(|s| s.re * scale).collect();
    let butterflies = (n as f64 / 2.0 * (n as f64).log2()).ceil() as u64;
    tally.add(12 * butterflies + n as u64);
    tally.mul(8 * butterflies + 4 * n as u64);
    Ok(Prepared { last, r })
}

/// Weights solving `(C + r(0)·I)·w = r`, with one ridge retry.
fn weights(r: &[f64], tally: &mut impl Tally) -> Result<Vec<f64>> {
    tally.stage("weights");
    let mut t = r.to_vec();
    t[0] = 2.0 * r[0];
    match levinson(&t, r, tally) {
        Ok(w) => Ok(w),
        Err(Error::SingularSystem) => {
            log::warn!("mmse: weight system singular, retrying with ridge");
            t[0] += 1e-6 * r[0];
            levinson(&t, r, tally)
        }
        Err(e) => Err(e),
    }
}

/// Weights of the MMSE predictor for a block, exposed for inspection.
pub fn mmse_weights(block: &ResourceBlock, blind: bool) -> Result<Vec<f64>> {
    let p = prepare(block, blind, &mut NoTally)?;
    if p.r[0] <= 0.0 {
        return Err(Error::ZeroPowerInput);
    }
    weights(&p.r, &mut NoTally)
}

pub fn mmse_estimate(block: &ResourceBlock, blind: bool) -> Result<NoisePowerEstimate> {
    mmse_estimate_with(block, blind, &mut NoTally)
}

pub(crate) fn mmse_estimate_with(
    block: &ResourceBlock,
    blind: bool,
    tally: &mut impl Tally,
) -> Result<NoisePowerEstimate> {
    let p = prepare(block, blind, tally)?;
    if p.r[0] <= 0.0 {
        return Err(Error::ZeroPowerInput);
    }
    let w = weights(&p.r, tally)?;
    tally.stage("combine");
    let value: f64 = w.iter().zip(&p.last).map(|(a, b)| a * b).sum();
    tally.add(w.len() as u64);
    tally.mul(w.len() as u64);
    let (lo, hi) = w
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
            (l.min(*v), h.max(*v))
        });
    NoisePowerEstimate::new(
        value,
        block.frames().last().map_or(0, |f| f.frame_index),
        EstimatorKind::Mmse,
        EstimateDiagnostics::Mmse {
            weight_sum: w.iter().sum(),
            weight_min: lo,
            weight_max: hi,
        },
    )
}
