use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr {
    pub linear: f64,
    /// `-inf` when the linear SNR is not positive.
    pub db: f64,
}

/// `(σx² − σw²) / σw²`.
pub fn snr_from_powers(sigma_x_sq: f64, sigma_w_sq: f64) -> Result<Snr> {
    if !(sigma_w_sq > 0.0 && sigma_w_sq.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise power must be positive, got {sigma_w_sq}"
        )));
    }
    if !(sigma_x_sq >= 0.0 && sigma_x_sq.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "received power must be >= 0, got {sigma_x_sq}"
        )));
    }
    let linear = (sigma_x_sq - sigma_w_sq) / sigma_w_sq;
    let db = if linear > 0.0 {
        10.0 * linear.log10()
    } else {
        f64::NEG_INFINITY
    };
    Ok(Snr { linear, db })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = snr_from_powers(2.0, 1.0).unwrap();
        assert_eq!(s.linear, 1.0);
        assert_eq!(s.db, 0.0);
        assert_eq!(snr_from_powers(1.0, 1.0).unwrap().db, f64::NEG_INFINITY);
        assert_eq!(snr_from_powers(0.5, 1.0).unwrap().db, f64::NEG_INFINITY);
        let s = snr_from_powers(1.501, 1.0).unwrap();
        assert!((s.db - 10.0 * 0.501f64.log10()).abs() < 1e-12);
        assert!((s.db + 3.0).abs() < 0.01);
        assert!(snr_from_powers(1.0, 0.0).is_err());
        assert!(snr_from_powers(-1.0, 1.0).is_err());
    }
}
