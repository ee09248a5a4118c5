use rfq_core::env::{Emission, EnvScenario, Environment, Micros, Modulation};
use rfq_core::hal::{FrontendProfile, RadioHal, RadioId};

pub fn hal_with_sigma(seed: u64, sigma: f64) -> (RadioHal, RadioId) {
    let mut s = EnvScenario::quiet(seed);
    s.rssi_noise_sigma_db = sigma;
    let mut hal = RadioHal::new(Environment::new(&s).unwrap());
    let id = hal.attach(FrontendProfile::vc1101());
    (hal, id)
}

/// Long-preamble OOK burst like a car key fob.
pub fn fob_burst(carrier_hz: f64, bitrate: f64, start_us: Micros) -> Emission {
    Emission {
        source: "fob".into(),
        carrier_hz,
        bitrate,
        power_dbm: -40.0,
        modulation: Modulation::Ook,
        preamble_len: 526,
        sync_word: vec![0xd3, 0x91],
        payload: vec![0x12, 0x34, 0x56, 0x78, 0x01, 0xa5, 0xc3, 0xf0, 0xbe, 0xef],
        start_us,
        repeat_count: 1,
        inter_repeat_gap_us: 0,
    }
}
