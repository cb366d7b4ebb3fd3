//! Fixtures shared by the criterion benchmarks in `benches/`.

use npe_core::scenario::build_scenario;
use npe_core::separation::ideal_separate;
use npe_core::{PowerSpectrum, ResourceBlock, ScenarioConfig, SeparationMask};

/// One realisation of the benchmark scenario: `n_bins` bins over `n_frames`
/// frames, one subband occupied at 0 dB.
pub struct Fixture {
    pub block: ResourceBlock,
    pub powers: Vec<PowerSpectrum>,
    pub ideal: Vec<SeparationMask>,
}

impl Fixture {
    pub fn new(n_bins: usize, n_frames: usize) -> Self {
        let cfg = ScenarioConfig::ism_single_band(n_bins, n_frames, 0.0, 1);
        let (block, truth) = build_scenario(&cfg).expect("valid scenario");
        let powers = block.power_spectra();
        let ideal = (0..n_frames)
            .map(|f| ideal_separate(&truth, f).expect("mask"))
            .collect();
        Fixture {
            block,
            powers,
            ideal,
        }
    }
}
