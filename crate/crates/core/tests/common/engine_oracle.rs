//! Naive filter/rewrite reference, written without the library's helpers.

use rand::Rng;
use regex::Regex;
use rfq_core::modules::{Op, PacketModification};

pub fn hex_text(data: &[u8]) -> String {
    data.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn oracle_filter(rules: &[(String, bool)], data: &[u8]) -> bool {
    let text = hex_text(data);
    for (p, negate) in rules {
        let hit = Regex::new(p).unwrap().is_match(&text);
        if hit == *negate {
            return false;
        }
    }
    true
}

fn bitwise(a: u8, b: u8, f: fn(bool, bool) -> bool) -> u8 {
    let mut out = 0u8;
    for k in 0..8 {
        if f(a >> k & 1 == 1, b >> k & 1 == 1) {
            out |= 1 << k;
        }
    }
    out
}

fn oracle_byte(op: Op, b: u8, operand: u8) -> u8 {
    match op {
        Op::And => bitwise(b, operand, |x, y| x && y),
        Op::Or => bitwise(b, operand, |x, y| x || y),
        Op::Xor => bitwise(b, operand, |x, y| x != y),
        Op::Not => 255 - b,
        Op::ShiftLeft => {
            if operand >= 8 { 0 } else { ((b as u32 * 2u32.pow(operand as u32)) % 256) as u8 }
        }
        Op::ShiftRight => {
            if operand >= 8 { 0 } else { (b as u32 / 2u32.pow(operand as u32)) as u8 }
        }
        _ => unreachable!(),
    }
}

pub fn oracle_modify(mods: &[PacketModification], data: &[u8]) -> Vec<u8> {
    let mut pkt = data.to_vec();
    for m in mods {
        if let Some(p) = &m.pattern {
            if !Regex::new(p).unwrap().is_match(&hex_text(&pkt)) {
                continue;
            }
        }
        let payload = m.payload.clone().unwrap_or_default();
        match m.operation {
            Op::Prepend => pkt = [payload.as_slice(), pkt.as_slice()].concat(),
            Op::Append => pkt = [pkt.as_slice(), payload.as_slice()].concat(),
            Op::Insert => {
                let pos = m.position.unwrap();
                if pos <= pkt.len() {
                    pkt = [&pkt[0..pos], payload.as_slice(), &pkt[pos..]].concat();
                }
            }
            op => {
                let targets: Vec<usize> = match (m.position, m.content) {
                    (Some(p), None) => if p < pkt.len() { vec![p] } else { vec![] },
                    (None, Some(c)) => (0..pkt.len()).filter(|&i| pkt[i] == c).collect(),
                    _ => unreachable!(),
                };
                for i in targets {
                    pkt[i] = oracle_byte(op, pkt[i], m.operand.unwrap_or(0));
                }
            }
        }
    }
    pkt
}

const PATTERNS: [&str; 6] = ["^aa", "ff", "0", "^.{4}00", "(12|34)$", "^$"];
const OPS: [Op; 9] = [Op::And, Op::Or, Op::Xor, Op::Not, Op::ShiftLeft, Op::ShiftRight, Op::Prepend, Op::Append, Op::Insert];

pub fn random_packet(rng: &mut impl Rng) -> Vec<u8> {
    let len = rng.random_range(0..=64);
    (0..len)
        .map(|_| if rng.random_bool(0.2) { [0xaa, 0x00, 0xff][rng.random_range(0..3)] } else { rng.random() })
        .collect()
}

pub fn random_mod(rng: &mut impl Rng) -> PacketModification {
    let operation = OPS[rng.random_range(0..OPS.len())];
    let pattern = rng.random_bool(0.25).then(|| PATTERNS[rng.random_range(0..PATTERNS.len())].to_string());
    let payload_len = rng.random_range(0..=4);
    let payload = (0..payload_len).map(|_| rng.random()).collect();
    let (position, content) = match operation {
        Op::Prepend | Op::Append => (None, None),
        Op::Insert => (Some(rng.random_range(0..70)), None),
        _ if rng.random_bool(0.7) => (Some(rng.random_range(0..70)), None),
        _ => (None, Some([0xaa, 0x00, 0xff, rng.random()][rng.random_range(0..4)])),
    };
    PacketModification {
        position,
        content,
        operation,
        operand: operation.takes_operand().then(|| if rng.random_bool(0.8) { rng.random() } else { rng.random_range(0..10) }),
        pattern,
        payload: operation.is_splice().then_some(payload),
    }
}

pub fn random_filter(rng: &mut impl Rng) -> Vec<(String, bool)> {
    let n = rng.random_range(0..=2);
    (0..n).map(|_| (PATTERNS[rng.random_range(0..PATTERNS.len())].to_string(), rng.random_bool(0.3))).collect()
}

pub fn random_case(rng: &mut impl Rng) -> (Vec<u8>, Vec<(String, bool)>, Vec<PacketModification>) {
    let n = rng.random_range(0..=8);
    (random_packet(rng), random_filter(rng), (0..n).map(|_| random_mod(rng)).collect())
}
