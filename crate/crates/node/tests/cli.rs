use std::io::Write;
use std::process::{Command, Stdio};

use rfq_core::rpc::{encode, FrameDecoder};
use serde_json::Value;

fn run(args: &[&str], frames: &[(&str, Value)]) -> Vec<(String, Value)> {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rfq-node"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    for (t, p) in frames {
        stdin.write_all(&encode(t, p).unwrap()).unwrap();
    }
    drop(stdin);
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let mut d = FrameDecoder::new();
    d.push(&out.stdout);
    std::iter::from_fn(|| d.next_frame()).map(|f| f.unwrap()).map(|f| (f.topic, f.payload)).collect()
}

#[test]
fn stdio_session_with_scenario_and_module_override() {
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/rolljam.toml");
    let got = run(
        &["--scenario", scenario, "--modules", "packet_filter", "--speed", "0"],
        &[("rfquack/in/node/list", Value::Null), ("rfquack/in/rolljam/start", Value::Null)],
    );
    assert_eq!(got.len(), 2);
    let names: Vec<&str> = got[0].1["result"].as_array().unwrap().iter().map(|m| m["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["radioA", "radioB", "packet_filter"]);
    assert_eq!(got[1].0, "rfquack/out/rolljam/error");
}

#[test]
fn bad_flags_fail() {
    let st = Command::new(env!("CARGO_BIN_EXE_rfq-node")).args(["--transport", "mqtt"]).stderr(Stdio::null()).status().unwrap();
    assert!(!st.success());
    let st = Command::new(env!("CARGO_BIN_EXE_rfq-node"))
        .args(["--modules", "nope"])
        .stdin(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert!(!st.success());
}
