//! Covariance-based estimation: fit a Marchenko–Pastur law to the noise
//! eigenvalues of the frame covariance matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::mp::mp_cdf;
use super::{EstimateDiagnostics, EstimatorKind, NoisePowerEstimate};
use crate::ops::{NoTally, Tally};
use crate::spectral::ResourceBlock;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    pub n_frames: usize,
    pub n_bins: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpFitRange {
    pub sigma_min_sq: f64,
    pub sigma_max_sq: f64,
    pub grid: Vec<f64>,
}

/// Eigenvalues of `C = (1/N)·Y·Yᴴ`, `Y = X/√N` with one row per frame.
pub fn covariance_eigenvalues(block: &ResourceBlock) -> Result<EigenSpectrum> {
    covariance_eigenvalues_with(block, &mut NoTally)
}

fn covariance_eigenvalues_with(
    block: &ResourceBlock,
    tally: &mut impl Tally,
) -> Result<EigenSpectrum> {
    let m = block.n_frames();
    let n = block.n_bins();
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "covariance needs M >= 2 frames, got {m}"
        )));
    }
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "covariance needs N >= M, got N={n}, M={m}"
        )));
    }
    tally.stage("covariance");
    let scale = 1.0 / (n as f64 * n as f64);
    let frames = block.frames();
    let mut c = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in frames[i].bins.iter().zip(&frames[j].bins) {
                acc += a * b.conj();
            }
            let v = acc * scale;
            c[(i, j)] = v;
            c[(j, i)] = v.conj();
        }
    }
    let pairs = (m * (m + 1) / 2 * n) as u64;
    tally.mul(4 * pairs);
    tally.add(4 * pairs);

    // Nominal cost of a dense Hermitian eigensolver.
    tally.stage("eigen");
    let m3 = (m * m * m) as u64;
    tally.mul(9 * m3);
    tally.add(9 * m3);
    let eig = c.symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(EigenSpectrum {
        eigenvalues: values,
        n_frames: m,
        n_bins: n,
    })
}

pub(crate) fn signal_count(m: usize, occupied_fraction: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&occupied_fraction) {
        return Err(Error::InvalidParameter(format!(
            "occupied fraction must be in [0, 1), got {occupied_fraction}"
        )));
    }
    let s = (m as f64 * occupied_fraction).round() as usize;
    if s >= m {
        return Err(Error::NoNoiseEigenvalues {
            signal: s,
            total: m,
        });
    }
    Ok(s)
}

/// Candidate noise variances between `λ_M / d` and `λ_{S+1} / d`,
/// `d = (1 − √(M/N))²`.
pub fn mp_fit_range(eig: &EigenSpectrum, signal: usize, l: usize) -> Result<MpFitRange> {
    let m = eig.n_frames;
    if l < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be >= 2, got {l}"
        )));
    }
    if signal >= m {
        return Err(Error::NoNoiseEigenvalues { signal, total: m });
    }
    let d = (1.0 - (m as f64 / eig.n_bins as f64).sqrt()).powi(2);
    if d <= 0.0 {
        return Err(Error::InvalidParameter("CBE needs N > M".into()));
    }
    let lo = eig.eigenvalues[m - 1] / d;
    let hi = eig.eigenvalues[signal] / d;
    let grid = if hi > lo {
        (0..l)
            .map(|i| lo + (hi - lo) * i as f64 / (l - 1) as f64)
            .collect()
    } else {
        vec![lo]
    };
    Ok(MpFitRange {
        sigma_min_sq: lo,
        sigma_max_sq: hi,
        grid,
    })
}

/// Root-sum-square gap between the empirical CDF of `noise` (ascending)
/// and the MP CDF at the same points.
fn distance(noise: &[f64], c: f64, sigma_sq: f64, tally: &mut impl Tally) -> f64 {
    let k = noise.len() as f64;
    let mut sum = 0.0;
    for (i, &x) in noise.iter().enumerate() {
        let e = (i as f64 + 0.5) / k;
        let d = e - mp_cdf(x, c, sigma_sq);
        sum += d * d;
    }
    tally.transcendental(noise.len() as u64 + 1);
    tally.add(3 * noise.len() as u64);
    tally.mul(2 * noise.len() as u64);
    sum.sqrt()
}

/// `S = round(M·ρ)` eigenvalues are treated as signal; the noise variance
/// is the grid point whose MP law best matches the rest.
pub fn cbe_estimate(
    block: &ResourceBlock,
    occupied_fraction: f64,
    l: usize,
) -> Result<NoisePowerEstimate> {
    let s = signal_count(block.n_frames(), occupied_fraction)?;
    cbe_estimate_with(block, s, l, &mut NoTally)
}

/// As [`cbe_estimate`] with the number of signal eigenvalues given directly.
pub fn cbe_estimate_with_count(
    block: &ResourceBlock,
    signal_eigenvalues: usize,
    l: usize,
) -> Result<NoisePowerEstimate> {
    cbe_estimate_with(block, signal_eigenvalues, l, &mut NoTally)
}

pub(crate) fn cbe_estimate_with(
    block: &ResourceBlock,
    s: usize,
    l: usize,
    tally: &mut impl Tally,
) -> Result<NoisePowerEstimate> {
    let eig = covariance_eigenvalues_with(block, tally)?;
    let range = mp_fit_range(&eig, s, l)?;
    if range.sigma_max_sq <= 0.0 {
        return Err(Error::ZeroPowerInput);
    }

    tally.stage("mp_fit");
    let mut noise: Vec<f64> = eig.eigenvalues[s..].to_vec();
    noise.reverse();
    let c = noise.len() as f64 / eig.n_bins as f64;
    let mut grid = range.grid.clone();
    let mut dist: Vec<f64> = grid
        .iter()
        .map(|&g| distance(&noise, c, g, tally))
        .collect();

    // A minimum on the lower edge means the range starts too high; extend
    // it downwards with the same spacing.
    if grid.len() > 1 && argmin(&dist) == 0 {
        let step = grid[1] - grid[0];
        let mut extra = Vec::new();
        let mut g = grid[0] - step;
        while g > 0.0 && extra.len() < l {
            extra.push(g);
            g -= step;
        }
        extra.reverse();
        let extra_d: Vec<f64> = extra
            .iter()
            .map(|&g| distance(&noise, c, g, tally))
            .collect();
        grid.splice(0..0, extra);
        dist.splice(0..0, extra_d);
    }
    let best = argmin(&dist);
    tally.cmp(dist.len() as u64);
    NoisePowerEstimate::new(
        grid[best],
        block.frames().last().map_or(0, |f| f.frame_index),
        EstimatorKind::Cbe,
        EstimateDiagnostics::Cbe {
            signal_eigenvalues: s,
            best_index: best,
            grid,
            distance: dist,
        },
    )
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::mp_support;
    use crate::scenario::{build_scenario, ScenarioConfig};
    use crate::spectral::SpectralFrame;

    fn block(rows: Vec<Vec<Complex64>>) -> ResourceBlock {
        ResourceBlock::new(
            rows.into_iter()
                .map(|bins| SpectralFrame {
                    bins,
                    frame_index: 0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn orthogonal_rows_give_equal_eigenvalues() {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(2.0, 0.0);
        let b = block(vec![vec![o, z, z, z], vec![z, o, z, z], vec![z, z, o, z]]);
        let e = covariance_eigenvalues(&b).unwrap();
        for v in &e.eigenvalues {
            assert!((v - 4.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_block() {
        let row: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let b = block(vec![row.clone(), vec![Complex64::new(0.0, 0.0); 8]]);
        let e = covariance_eigenvalues(&b).unwrap();
        let row_power: f64 = row.iter().map(|v| v.norm_sqr()).sum::<f64>() / 8.0;
        assert!((e.eigenvalues[0] - row_power / 8.0).abs() < 1e-12);
        assert!(e.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn trace_is_preserved() {
        let (b, _) = build_scenario(&ScenarioConfig::ism_single_band(128, 16, 3.0, 2)).unwrap();
        let e = covariance_eigenvalues(&b).unwrap();
        let n = b.n_bins() as f64;
        let frob: f64 = b
            .frames()
            .iter()
            .flat_map(|f| &f.bins)
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            / n;
        let sum: f64 = e.eigenvalues.iter().sum();
        assert!((sum - frob / n).abs() <= 1e-9 * sum);
    }

    #[test]
    fn white_noise_spread_matches_support() {
        let (b, _) = build_scenario(&ScenarioConfig::white(512, 64, 8)).unwrap();
        let e = covariance_eigenvalues(&b).unwrap();
        let (a, top) = mp_support(64.0 / 512.0, 1.0);
        let hi = e.eigenvalues[0];
        let lo = *e.eigenvalues.last().unwrap();
        assert!((hi - top).abs() / top < 0.05, "{hi} vs {top}");
        assert!((lo - a).abs() / a < 0.1, "{lo} vs {a}");
    }

    #[test]
    fn pure_noise_estimate_is_close() {
        let (b, _) = build_scenario(&ScenarioConfig::white(512, 64, 12)).unwrap();
        let e = cbe_estimate(&b, 0.0, 100).unwrap();
        assert!((e.value_mw - 1.0).abs() < 0.1, "{}", e.value_mw);
    }

    #[test]
    fn estimate_is_homogeneous() {
        let (b, _) = build_scenario(&ScenarioConfig::white(128, 16, 3)).unwrap();
        let a = cbe_estimate(&b, 0.0, 50).unwrap().value_mw;
        let g: f64 = 3.0;
        let s = cbe_estimate(&b.scaled(g.sqrt()), 0.0, 50).unwrap().value_mw;
        assert!((s - g * a).abs() <= 1e-9 * s, "{s} vs {}", g * a);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (b, _) = build_scenario(&ScenarioConfig::white(64, 8, 1)).unwrap();
        assert!(matches!(
            cbe_estimate(&b, 0.99, 10),
            Err(Error::NoNoiseEigenvalues { .. })
        ));
        assert!(cbe_estimate(&b, 1.0, 10).is_err());
        assert!(cbe_estimate(&b, 0.0, 1).is_err());
        let (one, _) = build_scenario(&ScenarioConfig::white(64, 1, 1)).unwrap();
        assert!(cbe_estimate(&one, 0.0, 10).is_err());
    }

    #[test]
    fn range_follows_eigenvalues() {
        let e = EigenSpectrum {
            eigenvalues: vec![8.0, 4.0, 2.0, 1.0],
            n_frames: 4,
            n_bins: 16,
        };
        let r = mp_fit_range(&e, 1, 5).unwrap();
        assert!((r.sigma_min_sq - 4.0).abs() < 1e-12);
        assert!((r.sigma_max_sq - 16.0).abs() < 1e-12);
        assert_eq!(r.grid.len(), 5);
        assert!((r.grid[1] - 7.0).abs() < 1e-12);
    }
}
