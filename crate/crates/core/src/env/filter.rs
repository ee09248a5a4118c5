//! Piecewise-linear receive filter: flat passband of the configured width,
//! then a linear 60 dB rolloff over one more half-bandwidth, then nothing.

/// Attenuation across the rolloff skirt.
pub const ROLLOFF_DB: f64 = 60.0;

/// Width of the rolloff skirt on each side of the passband.
pub fn rolloff_width(bandwidth_hz: f64) -> f64 {
    bandwidth_hz / 2.0
}

/// Attenuation in dB of a signal `offset_hz` away from the tuned frequency.
///
/// `None` means the signal is past the skirt and contributes no power at all.
pub fn attenuation_db(offset_hz: f64, bandwidth_hz: f64) -> Option<f64> {
    let offset = offset_hz.abs();
    let half = bandwidth_hz / 2.0;
    if offset <= half {
        return Some(0.0);
    }
    let beyond = offset - half;
    let skirt = rolloff_width(bandwidth_hz);
    if beyond <= skirt {
        Some(ROLLOFF_DB * beyond / skirt)
    } else {
        None
    }
}

/// Power seen through the filter, or `None` when fully rejected.
pub fn in_band_power(power_dbm: f64, carrier_hz: f64, tuned_hz: f64, bandwidth_hz: f64) -> Option<f64> {
    attenuation_db(carrier_hz - tuned_hz, bandwidth_hz).map(|a| power_dbm - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passband_is_flat() {
        assert_eq!(attenuation_db(0.0, 812e3), Some(0.0));
        assert_eq!(attenuation_db(406e3, 812e3), Some(0.0));
        assert_eq!(attenuation_db(-406e3, 812e3), Some(0.0));
    }

    #[test]
    fn rolloff_example() {
        // 610 kHz off an 812 kHz filter: 204 kHz into a 406 kHz skirt.
        let a = attenuation_db(610e3, 812e3).unwrap();
        assert!((a - 60.0 * 204.0 / 406.0).abs() < 1e-9);
    }

    #[test]
    fn past_skirt_is_rejected() {
        assert_eq!(attenuation_db(812e3 + 1.0, 812e3), None);
        assert!(attenuation_db(812e3, 812e3).is_some());
    }

    #[test]
    fn monotone_in_offset_and_bandwidth() {
        let bws = [58e3, 102e3, 203e3, 406e3, 812e3];
        let att = |o: f64, b: f64| attenuation_db(o, b).unwrap_or(f64::INFINITY);
        for &b in &bws {
            let mut last = 0.0;
            for k in 0..2000 {
                let a = att(k as f64 * 500.0, b);
                assert!(a >= last);
                last = a;
            }
        }
        for k in 0..2000 {
            let o = k as f64 * 500.0;
            for w in bws.windows(2) {
                assert!(att(o, w[1]) <= att(o, w[0]));
            }
        }
    }
}
