use rfq_core::attacks::{MouseJack, RollJam};
use rfq_core::checksum::with_crc;
use rfq_core::env::{ActorSpec, CarReceiverSpec, Decision, EnvScenario, Environment, KeyFobSpec, MouseSpec};
use rfq_core::hal::{FrontendProfile, RadioHal, RadioId, RadioMode};
use rfq_core::modules::RadioModule;
use rfq_core::pipeline::Node;
use serde_json::{json, Value};

const CARRIER: f64 = 433.92e6;

fn car_scenario() -> EnvScenario {
    let mut s = EnvScenario::quiet(21);
    s.actors.push(ActorSpec::KeyFob(KeyFobSpec {
        id: "fob".into(),
        carrier_hz: CARRIER,
        bitrate: 4800.0,
        power_dbm: -40.0,
        preamble_len: 32,
        sync_word: vec![0xd3, 0x91],
        first_code: 100,
        tail: vec![0xca, 0xfe],
        presses: vec![],
        repeat_count: 1,
        inter_repeat_gap_us: 0,
    }));
    s.actors.push(ActorSpec::CarReceiver(CarReceiverSpec {
        id: "car".into(),
        carrier_hz: CARRIER,
        bandwidth_hz: 300e3,
        bitrate: 4800.0,
        sync_word: vec![0xd3, 0x91],
        next_code: 100,
        window: 16,
        code_offset: 0,
    }));
    s
}

fn rolljam_node() -> Node {
    let mut hal = RadioHal::new(Environment::new(&car_scenario()).unwrap());
    hal.attach(FrontendProfile::vc1101());
    hal.attach(FrontendProfile::vc1101());
    let mut node = Node::new(hal);
    node.register(Box::new(RadioModule::new(RadioId(0))), 0).unwrap();
    node.register(Box::new(RadioModule::new(RadioId(1))), 1).unwrap();
    node.register(Box::new(RollJam::default()), 5).unwrap();
    let cfg = json!({"carrierFreq": CARRIER, "bitRate": 4800.0, "packetLen": 6, "isFixedPacketLen": true});
    node.handle_user_command("radioA/set_modem_config", &cfg).unwrap();
    node.set_loop_step(100);
    node
}

fn decisions(node: &Node) -> Vec<Decision> {
    node.hal().env().reception_log().iter().filter(|e| e.receiver == "car").map(|e| e.decision).collect()
}

fn press(node: &mut Node) {
    let at = node.now() + 1000;
    node.hal_mut().env_mut().press_fob("fob", at).unwrap();
    node.run_for(100_000);
}

#[test]
fn rolljam_captures_two_and_replays_one() {
    let mut node = rolljam_node();
    node.handle_user_command("rolljam/start", &Value::Null).unwrap();

    press(&mut node);
    assert_eq!(decisions(&node), vec![Decision::Jammed]);
    press(&mut node);

    let d = decisions(&node);
    assert_eq!(d.len(), 3, "{d:?}");
    assert_eq!(d[..2], [Decision::Jammed, Decision::Jammed]);
    assert_eq!(d[2], Decision::Accepted { code: 100 });

    let status = node.handle_user_command("rolljam/status", &Value::Null).unwrap();
    assert_eq!(status["phase"], "replayed");
    let captured: Vec<String> = serde_json::from_value(status["captured"].clone()).unwrap();
    assert_eq!(captured, ["00000064cafe", "00000065cafe"]);
    // Code 101 is still fresh for the attacker.
    assert_eq!(node.hal().env().receiver("car").unwrap().next_code, 101);

    let kinds: Vec<String> = node.drain_host().into_iter().map(|m| m.topic).collect();
    assert!(kinds.contains(&"rfquack/out/rolljam/captured".to_string()));
    assert!(kinds.contains(&"rfquack/out/rolljam/replayed".to_string()));
}

#[test]
fn rolljam_replay_is_not_accepted_twice() {
    let mut node = rolljam_node();
    node.handle_user_command("rolljam/set", &json!({"repeats": 1})).unwrap();
    node.handle_user_command("rolljam/start", &Value::Null).unwrap();
    press(&mut node);
    let accepted = decisions(&node).iter().filter(|d| d.accepted()).count();
    assert_eq!(accepted, 1);
    node.hal_mut().transmit(RadioId(0), &[0, 0, 0, 100, 0xca, 0xfe], 1).unwrap();
    node.run_for(100_000);
    assert_eq!(decisions(&node).last(), Some(&Decision::Replayed { code: 100 }));
}

#[test]
fn rolljam_rejects_same_radio() {
    let mut node = rolljam_node();
    node.handle_user_command("rolljam/set", &json!({"jam_radio": "radioA"})).unwrap();
    assert!(node.handle_user_command("rolljam/start", &Value::Null).is_err());
    node.handle_user_command("rolljam/set", &json!({"jam_radio": "radioB", "repeats": 0})).unwrap();
    assert!(node.handle_user_command("rolljam/start", &Value::Null).is_err());
}

#[test]
fn rolljam_stop_idles_both_radios() {
    let mut node = rolljam_node();
    node.handle_user_command("rolljam/start", &Value::Null).unwrap();
    assert_eq!(node.hal().status(RadioId(1)).unwrap().mode, RadioMode::Jam);
    node.handle_user_command("rolljam/stop", &Value::Null).unwrap();
    for id in [RadioId(0), RadioId(1)] {
        assert_eq!(node.hal().status(id).unwrap().mode, RadioMode::Idle);
    }
    assert_eq!(node.hal().env().active_carriers().count(), 0);
}

fn mouse(id: &str, address: [u8; 5], channel: u32, count: u32) -> ActorSpec {
    ActorSpec::Mouse(MouseSpec {
        id: id.into(),
        carrier_hz: 2400e6 + channel as f64 * 1e6,
        bitrate: 2e6,
        power_dbm: -50.0,
        address: address.to_vec(),
        payload: vec![0x00, 0xc2, 0x01, 0x00, 0xff, 0x00, 0x00, 0x00, 0x00, 0x3e],
        preamble_len: 8,
        start_us: 0,
        period_us: 2_000,
        count,
    })
}

fn mouse_node(actors: Vec<ActorSpec>) -> Node {
    let mut s = EnvScenario::quiet(5);
    s.actors = actors;
    let mut hal = RadioHal::new(Environment::new(&s).unwrap());
    hal.attach(FrontendProfile::vc1101());
    hal.attach(FrontendProfile::vnrf24());
    let mut node = Node::new(hal);
    node.register(Box::new(MouseJack::default()), 5).unwrap();
    node.set_loop_step(50);
    node
}

#[test]
fn mousejack_ranks_the_mouse_first() {
    let mut node = mouse_node(vec![mouse("m", [0xa5, 0xc3, 0x11, 0x22, 0x33], 10, 2000)]);
    node.handle_user_command("mousejack/set", &json!({"dwell_ms": 4, "first_channel": 5, "last_channel": 14})).unwrap();
    node.handle_user_command("mousejack/start", &Value::Null).unwrap();
    node.run_for(400_000);
    let r = node.handle_user_command("mousejack/report", &Value::Null).unwrap();
    let top = &r["ranking"][0];
    assert_eq!(top["prefix"], "a5c3112233", "{r}");
    // A 2 MHz filter also hears the neighbouring 1 MHz channels.
    let channels: Vec<u32> = serde_json::from_value(top["channels"].clone()).unwrap();
    assert!(channels.contains(&10) && channels.iter().all(|c| c.abs_diff(10) <= 1), "{channels:?}");
    assert_eq!(top["payloadLen"], 10);
    assert_eq!(r["devices"][0]["vendor"], "microsoft-class mouse");
    let reports: Vec<_> = node.drain_host().into_iter().filter(|m| m.topic == "rfquack/out/mousejack/report").collect();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].payload["address"], "a5c3112233");
}

#[test]
fn mousejack_silent_band_reports_nothing() {
    let mut node = mouse_node(vec![]);
    node.handle_user_command("mousejack/start", &Value::Null).unwrap();
    node.run_for(200_000);
    let r = node.handle_user_command("mousejack/report", &Value::Null).unwrap();
    assert_eq!(r["ranking"], json!([]));
    assert_eq!(r["devices"], json!([]));
}

#[test]
fn mousejack_inject_is_disarmed() {
    let mut node = mouse_node(vec![]);
    let err = node
        .handle_user_command("mousejack/inject", &json!({"address": "a5c3112233", "payload": "00"}))
        .unwrap_err();
    assert!(err.to_lowercase().contains("not implemented"), "{err}");
}

#[test]
fn mouse_frame_checks_out() {
    let mut raw = vec![0xa5, 0xc3, 0x11, 0x22, 0x33];
    raw.extend(with_crc(&[1, 2, 3]));
    raw.resize(32, 0x55);
    assert_eq!(rfq_core::attacks::validate_capture(&raw), Some(3));
}
