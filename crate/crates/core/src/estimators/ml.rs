use super::{EstimateDiagnostics, EstimatorKind, NoisePowerEstimate};
use crate::ops::{NoTally, Tally};
use crate::separation::SeparationMask;
use crate::spectral::PowerSpectrum;
use crate::{Error, Result};

fn check(power: &PowerSpectrum, mask: &SeparationMask) -> Result<()> {
    if power.len() != mask.len() {
        return Err(Error::InvalidParameter(format!(
            "mask has {} bins, spectrum has {}",
            mask.len(),
            power.len()
        )));
    }
    Ok(())
}

/// Mean power of the noise bins of one frame.
pub fn ml_estimate(power: &PowerSpectrum, mask: &SeparationMask) -> Result<NoisePowerEstimate> {
    ml_estimate_with(power, mask, &mut NoTally)
}

pub(crate) fn ml_estimate_with(
    power: &PowerSpectrum,
    mask: &SeparationMask,
    tally: &mut impl Tally,
) -> Result<NoisePowerEstimate> {
    mvu_estimate_with(
        std::slice::from_ref(power),
        std::slice::from_ref(mask),
        tally,
    )
    .map(|e| NoisePowerEstimate {
        method: EstimatorKind::Ml,
        ..e
    })
}

/// Mean power of all noise bins over a block of frames.
pub fn mvu_estimate(
    powers: &[PowerSpectrum],
    masks: &[SeparationMask],
) -> Result<NoisePowerEstimate> {
    mvu_estimate_with(powers, masks, &mut NoTally)
}

pub(crate) fn mvu_estimate_with(
    powers: &[PowerSpectrum],
    masks: &[SeparationMask],
    tally: &mut impl Tally,
) -> Result<NoisePowerEstimate> {
    if powers.is_empty() || powers.len() != masks.len() {
        return Err(Error::InvalidParameter(format!(
            "{} spectra and {} masks",
            powers.len(),
            masks.len()
        )));
    }
    tally.stage("mean");
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, m) in powers.iter().zip(masks) {
        check(p, m)?;
        for (v, s) in p.power.iter().zip(&m.is_signal) {
            if !s {
                sum += v;
                count += 1;
            }
        }
        tally.cmp(p.len() as u64);
        tally.add(p.len() as u64);
    }
    if count == 0 {
        return Err(Error::EmptyNoiseGroup);
    }
    tally.mul(1);
    let last = powers.last().expect("non-empty").frame_index;
    NoisePowerEstimate::new(
        sum / count as f64,
        last,
        EstimatorKind::Mvu,
        EstimateDiagnostics::Separated { noise_bins: count },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_scenario, ScenarioConfig};
    use crate::separation::{fisher_separate, SeparationDiagnostics, SeparationKind};
    use proptest::prelude::*;

    fn ps(v: &[f64]) -> PowerSpectrum {
        PowerSpectrum::new(v.to_vec(), 0).unwrap()
    }

    fn mask(s: &[bool]) -> SeparationMask {
        SeparationMask {
            is_signal: s.to_vec(),
            method: SeparationKind::Ideal,
            aux: SeparationDiagnostics::default(),
        }
    }

    #[test]
    fn examples() {
        let e = ml_estimate(&ps(&[1.0; 4]), &mask(&[false; 4])).unwrap();
        assert_eq!(e.value_mw, 1.0);
        assert_eq!(e.method, EstimatorKind::Ml);
        let e = ml_estimate(
            &ps(&[2.0, 4.0, 100.0, 100.0]),
            &mask(&[false, false, true, true]),
        )
        .unwrap();
        assert_eq!(e.value_mw, 3.0);
        assert!(matches!(
            ml_estimate(&ps(&[1.0, 2.0]), &mask(&[true, true])),
            Err(Error::EmptyNoiseGroup)
        ));
        assert!(ml_estimate(&ps(&[1.0, 2.0]), &mask(&[true])).is_err());
    }

    #[test]
    fn mvu_balances_frames() {
        let p = [ps(&[1.0, 1.0, 9.0]), ps(&[3.0, 3.0, 9.0])];
        let m = [mask(&[false, false, true]), mask(&[false, false, true])];
        assert_eq!(mvu_estimate(&p, &m).unwrap().value_mw, 2.0);
        let one = mvu_estimate(&p[..1], &m[..1]).unwrap().value_mw;
        assert_eq!(one, ml_estimate(&p[0], &m[0]).unwrap().value_mw);
    }

    #[test]
    fn fisher_split_biases_noise_low() {
        let (block, _) = build_scenario(&ScenarioConfig::white(512, 20, 3)).unwrap();
        let mean: f64 = block
            .power_spectra()
            .iter()
            .map(|p| {
                ml_estimate(p, &fisher_separate(p).unwrap())
                    .unwrap()
                    .value_mw
            })
            .sum::<f64>()
            / 20.0;
        assert!(mean < 1.0, "{mean}");
    }

    proptest! {
        #[test]
        fn mvu_is_count_weighted_ml(
            rows in prop::collection::vec(prop::collection::vec((0.0f64..10.0, any::<bool>()), 6), 1..6)
        ) {
            prop_assume!(rows.iter().all(|r| r.iter().any(|(_, s)| !s)));
            let p: Vec<_> = rows.iter().map(|r| ps(&r.iter().map(|x| x.0).collect::<Vec<_>>())).collect();
            let m: Vec<_> = rows.iter().map(|r| mask(&r.iter().map(|x| x.1).collect::<Vec<_>>())).collect();
            let mut num = 0.0;
            let mut den = 0.0;
            for (pp, mm) in p.iter().zip(&m) {
                let c = mm.noise_count() as f64;
                num += c * ml_estimate(pp, mm).map(|e| e.value_mw).unwrap_or(0.0);
                den += c;
            }
            match mvu_estimate(&p, &m) {
                Ok(e) => prop_assert!((e.value_mw - num / den).abs() <= 1e-9 * (1.0 + e.value_mw)),
                Err(Error::NonPositiveEstimate(_)) => prop_assert_eq!(num, 0.0),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn all_noise_ml_is_frame_mean(v in prop::collection::vec(0.01f64..10.0, 2..64)) {
            let p = ps(&v);
            let e = ml_estimate(&p, &mask(&vec![false; v.len()])).unwrap();
            prop_assert_eq!(e.value_mw, p.mean());
        }
    }
}
