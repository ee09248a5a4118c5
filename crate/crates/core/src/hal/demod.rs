//! OOK bit recovery from hard symbol samples.
//!
//! The packet demodulator slices oversampled symbols into runs and turns each
//! run into `round(len / samples_per_bit)` bits, which re-aligns the bit clock
//! on every edge. Frames are located by sync word after a short alternating
//! preamble tail.

use super::config::PacketLen;
use crate::checksum::strip_crc;

/// Alternating bits required immediately before the sync word.
const PREAMBLE_TAIL: usize = 4;
/// Silence (in bit times) after which the bit buffer is flushed and reset.
const IDLE_BITS: usize = 64;
/// Zero samples required before promiscuous capture re-arms.
const REARM_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameFormat {
    pub sync_word: Vec<u8>,
    pub packet_len: PacketLen,
    pub crc_enabled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DemodEvent {
    Frame { data: Vec<u8>, sync_at_us: f64, end_us: f64 },
    CrcError,
}

pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i))))
        .collect()
}

fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes.iter().flat_map(|&b| (0..8).map(move |i| b & (0x80 >> i) != 0)).collect()
}

#[derive(Debug, Clone)]
pub struct PacketDemod {
    samples_per_bit: f64,
    sample_period_us: f64,
    level: bool,
    run: usize,
    run_start_us: f64,
    idle: bool,
    bits: Vec<bool>,
    times: Vec<f64>,
    scan_from: usize,
}

impl PacketDemod {
    pub fn new(samples_per_bit: f64, sample_period_us: f64) -> Self {
        Self {
            samples_per_bit,
            sample_period_us,
            level: false,
            run: 0,
            run_start_us: 0.0,
            idle: true,
            bits: Vec::new(),
            times: Vec::new(),
            scan_from: 0,
        }
    }

    fn emit_run(&mut self, level: bool, nbits: usize, start_us: f64) {
        let bit_us = self.samples_per_bit * self.sample_period_us;
        for j in 0..nbits {
            self.bits.push(level);
            self.times.push(start_us + j as f64 * bit_us);
        }
    }

    fn reset_bits(&mut self) {
        self.bits.clear();
        self.times.clear();
        self.scan_from = 0;
    }

    pub fn feed(&mut self, samples: &[bool], t0_us: f64, fmt: &FrameFormat) -> Vec<DemodEvent> {
        let mut events = Vec::new();
        let idle_samples = (IDLE_BITS as f64 * self.samples_per_bit).ceil() as usize;
        for (i, &s) in samples.iter().enumerate() {
            let t = t0_us + i as f64 * self.sample_period_us;
            if s == self.level {
                self.run += 1;
                if !s && !self.idle && self.run > idle_samples {
                    self.emit_run(false, IDLE_BITS, self.run_start_us);
                    self.extract(fmt, &mut events);
                    self.reset_bits();
                    self.idle = true;
                }
                continue;
            }
            if !self.idle {
                let n = ((self.run as f64 / self.samples_per_bit).round() as usize).max(1);
                self.emit_run(self.level, n, self.run_start_us);
                self.extract(fmt, &mut events);
            }
            self.idle = false;
            self.level = s;
            self.run = 1;
            self.run_start_us = t;
        }
        events
    }

    fn extract(&mut self, fmt: &FrameFormat, events: &mut Vec<DemodEvent>) {
        let sync = bytes_to_bits(&fmt.sync_word);
        loop {
            let found = (self.scan_from.max(PREAMBLE_TAIL)..=self.bits.len().saturating_sub(sync.len()))
                .take_while(|&p| p + sync.len() <= self.bits.len())
                .find(|&p| {
                    self.bits[p..p + sync.len()] == sync[..]
                        && (p - PREAMBLE_TAIL..p - 1).all(|k| self.bits[k] != self.bits[k + 1])
                });
            let Some(p) = found else {
                let keep = sync.len() + PREAMBLE_TAIL;
                if self.bits.len() > keep {
                    let cut = self.bits.len() - keep;
                    self.bits.drain(..cut);
                    self.times.drain(..cut);
                }
                self.scan_from = 0;
                return;
            };
            let header = p + sync.len();
            let (len_byte, payload_len) = match fmt.packet_len {
                PacketLen::Fixed(n) => (0, n),
                PacketLen::Variable(max) => {
                    if self.bits.len() < header + 8 {
                        self.scan_from = p;
                        return;
                    }
                    let l = bits_to_bytes(&self.bits[header..header + 8])[0] as usize;
                    if l > max {
                        self.scan_from = p + 1;
                        continue;
                    }
                    (1, l)
                }
            };
            let total = 8 * (len_byte + payload_len + if fmt.crc_enabled { 2 } else { 0 });
            if self.bits.len() < header + total {
                self.scan_from = p;
                return;
            }
            let bytes = bits_to_bytes(&self.bits[header..header + total]);
            let body = if fmt.crc_enabled { strip_crc(&bytes) } else { Some(&bytes[..]) };
            match body {
                Some(body) => {
                    events.push(DemodEvent::Frame {
                        data: body[len_byte..].to_vec(),
                        sync_at_us: self.times[p],
                        end_us: self.times[header + total - 1],
                    });
                    let end = header + total;
                    self.bits.drain(..end);
                    self.times.drain(..end);
                    self.scan_from = 0;
                }
                None => {
                    events.push(DemodEvent::CrcError);
                    self.scan_from = p + 1;
                }
            }
        }
    }
}

/// Raw capture of anything above the slicer threshold, one sample per bit.
#[derive(Debug, Clone, Default)]
pub struct PromiscuousCapture {
    current: Option<(Vec<bool>, f64)>,
    zeros: usize,
    disarmed: bool,
}

impl PromiscuousCapture {
    /// Returns completed captures of `nbits` bits with their start time.
    pub fn feed(&mut self, samples: &[bool], t0_us: f64, period_us: f64, nbits: usize) -> Vec<(Vec<bool>, f64)> {
        let mut out = Vec::new();
        for (i, &s) in samples.iter().enumerate() {
            if let Some((bits, start)) = &mut self.current {
                bits.push(s);
                if bits.len() == nbits {
                    out.push((std::mem::take(bits), *start));
                    self.current = None;
                    self.disarmed = true;
                    self.zeros = 0;
                }
                continue;
            }
            if s {
                self.zeros = 0;
                if !self.disarmed {
                    self.current = Some((vec![true], t0_us + i as f64 * period_us));
                }
            } else {
                self.zeros += 1;
                if self.zeros >= REARM_SAMPLES {
                    self.disarmed = false;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oversample(bits: &[bool], k: usize) -> Vec<bool> {
        bits.iter().flat_map(|&b| std::iter::repeat_n(b, k)).collect()
    }

    fn frame(pre: usize, sync: &[u8], body: &[u8]) -> Vec<bool> {
        let mut b: Vec<bool> = (0..pre).map(|i| i % 2 == 0).collect();
        b.extend(bytes_to_bits(sync));
        b.extend(bytes_to_bits(body));
        b
    }

    fn fmt(len: PacketLen, crc: bool) -> FrameFormat {
        FrameFormat { sync_word: vec![0xd3, 0x91], packet_len: len, crc_enabled: crc }
    }

    #[test]
    fn bytes_bits_round_trip() {
        assert_eq!(bits_to_bytes(&bytes_to_bits(&[0xa5, 0x01])), vec![0xa5, 0x01]);
    }

    #[test]
    fn decodes_fixed_frame_with_crc() {
        let body = crate::checksum::with_crc(&[1, 2, 3, 4]);
        let mut s = vec![false; 40];
        s.extend(oversample(&frame(32, &[0xd3, 0x91], &body), 8));
        s.extend(vec![false; 8 * 80]);
        let mut d = PacketDemod::new(8.0, 1.0);
        let ev = d.feed(&s, 0.0, &fmt(PacketLen::Fixed(4), true));
        assert_eq!(ev.len(), 1);
        match &ev[0] {
            DemodEvent::Frame { data, .. } => assert_eq!(data, &vec![1, 2, 3, 4]),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn tolerates_rate_mismatch_and_split_feeds() {
        let body = crate::checksum::with_crc(&[0x00, 0xff, 0x0f, 0xaa, 0x55]);
        let bits = frame(40, &[0xd3, 0x91], &body);
        // 3% slow clock: 8.24 samples per bit against an 8x demodulator.
        let n = (bits.len() as f64 * 8.24) as usize;
        let mut s: Vec<bool> = (0..n).map(|i| bits[(i as f64 / 8.24) as usize]).collect();
        s.extend(vec![false; 1000]);
        let mut d = PacketDemod::new(8.0, 1.0);
        let f = fmt(PacketLen::Fixed(5), true);
        let mut ev = Vec::new();
        for (i, chunk) in s.chunks(37).enumerate() {
            ev.extend(d.feed(chunk, (i * 37) as f64, &f));
        }
        assert_eq!(ev.len(), 1, "{ev:?}");
    }

    #[test]
    fn crc_mismatch_yields_no_frame() {
        let mut body = crate::checksum::with_crc(&[1, 2, 3, 4]);
        body[5] ^= 0x40;
        let mut s = oversample(&frame(32, &[0xd3, 0x91], &body), 4);
        s.extend(vec![false; 4 * 80]);
        let mut d = PacketDemod::new(4.0, 1.0);
        let ev = d.feed(&s, 0.0, &fmt(PacketLen::Fixed(4), true));
        assert!(ev.iter().all(|e| *e == DemodEvent::CrcError));
    }

    #[test]
    fn variable_length() {
        let body = crate::checksum::with_crc(&[3, 9, 8, 7]);
        let mut s = oversample(&frame(16, &[0xd3, 0x91], &body), 4);
        s.extend(vec![false; 4 * 80]);
        let mut d = PacketDemod::new(4.0, 1.0);
        let ev = d.feed(&s, 0.0, &fmt(PacketLen::Variable(20), true));
        assert!(matches!(&ev[..], [DemodEvent::Frame { data, .. }] if data == &vec![9, 8, 7]));
    }

    #[test]
    fn promiscuous_chunks_and_rearms() {
        let mut c = PromiscuousCapture::default();
        let mut s = vec![false; 4];
        s.extend(bytes_to_bits(&[0xaa, 0x12, 0x34]));
        s.extend(vec![false; 20]);
        s.extend(bytes_to_bits(&[0xff, 0x00]));
        let got = c.feed(&s, 0.0, 1.0, 16);
        assert_eq!(got.len(), 2);
        assert_eq!(bits_to_bytes(&got[0].0), vec![0xaa, 0x12]);
        assert_eq!(got[0].1, 4.0);
        assert_eq!(bits_to_bytes(&got[1].0), vec![0xff, 0x00]);
    }
}
