use rfq_core::env::{EnvScenario, Environment};
use rfq_core::hal::{FrontendProfile, HalError, PacketLen, PartialModemConfig, RadioHal, RadioMode, TX_REPEAT_GAP_US};

fn two_radios() -> RadioHal {
    let env = Environment::new(&EnvScenario::quiet(7)).unwrap();
    let mut hal = RadioHal::new(env);
    hal.attach(FrontendProfile::vc1101());
    hal.attach(FrontendProfile::vc1101());
    hal
}

fn run_for(hal: &mut RadioHal, us: u64, id: rfq_core::hal::RadioId) -> Vec<rfq_core::hal::Packet> {
    let mut got = Vec::new();
    let end = hal.now() + us;
    while hal.now() < end {
        hal.advance(1000);
        got.extend(hal.poll_reception(id).unwrap());
    }
    got
}

#[test]
fn radio_names_round_trip() {
    let hal = two_radios();
    let b = hal.lookup("radioB").unwrap();
    assert_eq!(b.0, 1);
    assert_eq!(b.to_string(), "radioB");
    assert!(matches!(hal.lookup("radioC"), Err(HalError::UnknownRadio(_))));
    assert!(hal.lookup("radio").is_err());
}

#[test]
fn transmit_a_receive_b() {
    let mut hal = two_radios();
    let a = hal.lookup("radioA").unwrap();
    let b = hal.lookup("radioB").unwrap();
    hal.set_mode(b, RadioMode::Rx).unwrap();
    let payload = [0xde, 0xad, 0xbe, 0xef, 0x01, 0x02, 0x03, 0x04];
    hal.transmit(a, &payload, 1).unwrap();
    let got = run_for(&mut hal, 200_000, b);
    assert_eq!(got.len(), 1, "{got:?}");
    assert_eq!(got[0].data, payload);
    assert_eq!(got[0].rx_radio, "radioB");
    assert!(got[0].rssi > -60.0);
    assert_eq!(hal.status(b).unwrap().counters.rx_packets, 1);
    assert_eq!(hal.status(a).unwrap().counters.tx_packets, 1);
}

#[test]
fn repeats_are_received_individually() {
    let mut hal = two_radios();
    let (a, b) = (hal.lookup("radioA").unwrap(), hal.lookup("radioB").unwrap());
    hal.set_mode(b, RadioMode::Rx).unwrap();
    hal.transmit(a, &[1, 2, 3, 4, 5, 6, 7, 8], 3).unwrap();
    let got = run_for(&mut hal, 400_000, b);
    assert_eq!(got.len(), 3);
}

#[test]
fn mismatched_bitrate_is_not_decoded() {
    let mut hal = two_radios();
    let (a, b) = (hal.lookup("radioA").unwrap(), hal.lookup("radioB").unwrap());
    hal.set_modem_config(b, &PartialModemConfig::bitrate(2400.0)).unwrap();
    hal.set_mode(b, RadioMode::Rx).unwrap();
    hal.transmit(a, &[9; 8], 1).unwrap();
    assert!(run_for(&mut hal, 200_000, b).is_empty());
}

#[test]
fn emission_duration_matches_frame() {
    let mut hal = two_radios();
    let a = hal.lookup("radioA").unwrap();
    let cfg = hal.modem_config(a).unwrap().clone();
    hal.transmit(a, &[0; 8], 2).unwrap();
    let e = hal.env().emissions().last().unwrap().clone();
    let bits = cfg.preamble_len as usize + 8 * (cfg.sync_word.len() + cfg.frame_len(8));
    assert_eq!(e.frame_bits(), bits);
    let one = bits as f64 * 1e6 / cfg.bit_rate;
    assert!((e.frame_duration_us() - one).abs() < 1e-6);
    let total = e.end_us() - e.start_us as f64;
    assert!((total - (2.0 * one + TX_REPEAT_GAP_US as f64)).abs() < 1e-6);
}

#[test]
fn oversize_rejected() {
    let mut hal = two_radios();
    let a = hal.lookup("radioA").unwrap();
    let err = hal.transmit(a, &[0; 9], 1).unwrap_err();
    assert_eq!(err, HalError::Oversize { len: 9, max: 8 });
    let p = PartialModemConfig { is_fixed_packet_len: Some(false), packet_len: Some(200), ..Default::default() };
    hal.set_modem_config(a, &p).unwrap_err();
}

#[test]
fn variable_length_round_trip() {
    let mut hal = two_radios();
    let (a, b) = (hal.lookup("radioA").unwrap(), hal.lookup("radioB").unwrap());
    let p = PartialModemConfig { is_fixed_packet_len: Some(false), packet_len: Some(20), ..Default::default() };
    hal.set_modem_config(a, &p).unwrap();
    hal.set_modem_config(b, &p).unwrap();
    assert_eq!(hal.modem_config(b).unwrap().packet_len, PacketLen::Variable(20));
    hal.set_mode(b, RadioMode::Rx).unwrap();
    hal.transmit(a, b"hi", 1).unwrap();
    let got = run_for(&mut hal, 200_000, b);
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].data, b"hi");
}

#[test]
fn register_read_back() {
    let mut hal = two_radios();
    let a = hal.lookup("radioA").unwrap();
    hal.set_modem_config(a, &PartialModemConfig::carrier(868.3e6)).unwrap();
    let before: Vec<u8> = (0..0x30).map(|r| hal.get_register(a, r).unwrap()).collect();
    let b = hal.lookup("radioB").unwrap();
    for (r, v) in before.iter().enumerate() {
        hal.set_register(b, r as u8, *v).unwrap();
    }
    let ca = hal.modem_config(a).unwrap();
    let cb = hal.modem_config(b).unwrap();
    assert!((ca.carrier_freq - cb.carrier_freq).abs() < 400.0);
    assert_eq!(ca.sync_word, cb.sync_word);
    assert_eq!(ca.rx_bandwidth, cb.rx_bandwidth);
    assert!(matches!(hal.get_register(a, 0x30), Err(HalError::RegisterOutOfRange(0x30))));
}

#[test]
fn calibration_is_cached() {
    let mut hal = two_radios();
    let a = hal.lookup("radioA").unwrap();
    let t = FrontendProfile::vc1101().timing;
    let t0 = hal.now();
    hal.set_modem_config(a, &PartialModemConfig::carrier(434e6)).unwrap();
    assert_eq!(hal.now() - t0, t.t_hop + t.t_driver + t.t_cal);
    hal.set_modem_config(a, &PartialModemConfig::carrier(433.92e6)).unwrap();
    let t1 = hal.now();
    hal.set_modem_config(a, &PartialModemConfig::carrier(434e6)).unwrap();
    assert_eq!(hal.now() - t1, t.t_hop + t.t_driver);

    let added = hal.precalibrate(a, 432e6, 437e6).unwrap();
    assert!(added > 490 && added <= 501);
    let t2 = hal.now();
    hal.set_modem_config(a, &PartialModemConfig::carrier(435.123e6)).unwrap();
    assert_eq!(hal.now() - t2, t.t_hop + t.t_driver);
}

#[test]
fn vnrf24_constraints() {
    let env = Environment::new(&EnvScenario::quiet(1)).unwrap();
    let mut hal = RadioHal::new(env);
    let n = hal.attach(FrontendProfile::vnrf24());
    assert!(matches!(hal.set_modem_config(n, &PartialModemConfig::bitrate(500_000.0)), Err(HalError::Unsupported(_))));
    assert!(matches!(hal.set_modem_config(n, &PartialModemConfig::carrier(2405.5e6)), Err(HalError::Unsupported(_))));
    assert!(matches!(hal.set_modem_config(n, &PartialModemConfig::carrier(433e6)), Err(HalError::OutOfBand { .. })));
    hal.set_modem_config(n, &PartialModemConfig::bitrate(250_000.0)).unwrap();
    hal.set_modem_config(n, &PartialModemConfig::carrier(2480e6)).unwrap();
}

#[test]
fn jam_mode_keys_a_carrier() {
    let mut hal = two_radios();
    let a = hal.lookup("radioA").unwrap();
    hal.set_mode(a, RadioMode::Jam).unwrap();
    assert_eq!(hal.env().active_carriers().count(), 1);
    hal.set_mode(a, RadioMode::Idle).unwrap();
    assert_eq!(hal.env().active_carriers().count(), 0);
}
