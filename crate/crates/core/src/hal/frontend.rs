use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::config::{ModemConfig, PacketLen, PartialModemConfig, RadioMode};
use super::demod::{bits_to_bytes, DemodEvent, FrameFormat, PacketDemod, PromiscuousCapture};
use super::profile::{FrontendKind, FrontendProfile};
use super::registers::RegisterFile;
use super::{HalError, Packet};
use crate::checksum::with_crc;
use crate::env::{Emission, EmissionId, Environment, Micros};

/// Demodulator oversampling in packet mode.
const RX_OVERSAMPLE: f64 = 8.0;
/// Calibration results are cached per bin of this width.
pub const CAL_BIN_HZ: f64 = 10e3;
/// Gap between repeated transmissions of one `transmit` call.
pub const TX_REPEAT_GAP_US: Micros = 10_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RadioCounters {
    pub rx_packets: u64,
    pub tx_packets: u64,
    pub crc_errors: u64,
    pub tunings: u64,
    pub rssi_samples: u64,
    pub calibrations: u64,
}

#[derive(Debug, Clone)]
enum RxKind {
    Packet(PacketDemod, FrameFormat),
    Promiscuous(PromiscuousCapture, usize),
}

#[derive(Debug, Clone)]
struct RxState {
    cursor_us: f64,
    period_us: f64,
    kind: RxKind,
}

#[derive(Debug, Clone)]
pub struct Frontend {
    name: String,
    profile: FrontendProfile,
    config: ModemConfig,
    mode: RadioMode,
    registers: RegisterFile,
    calibrated: BTreeSet<i64>,
    rx: Option<RxState>,
    jam: Option<EmissionId>,
    tx_busy_until: f64,
    last_rssi: Option<f64>,
    counters: RadioCounters,
}

fn cal_key(hz: f64) -> i64 {
    (hz / CAL_BIN_HZ).round() as i64
}

impl Frontend {
    pub fn new(name: String, profile: FrontendProfile) -> Self {
        let config = ModemConfig::default_for(&profile);
        let mut registers = RegisterFile::for_kind(profile.kind);
        registers.encode(&config, &profile);
        Self {
            name,
            profile,
            config,
            mode: RadioMode::Idle,
            registers,
            calibrated: BTreeSet::new(),
            rx: None,
            jam: None,
            tx_busy_until: 0.0,
            last_rssi: None,
            counters: RadioCounters::default(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn profile(&self) -> &FrontendProfile {
        &self.profile
    }

    pub fn config(&self) -> &ModemConfig {
        &self.config
    }

    pub fn mode(&self) -> RadioMode {
        self.mode
    }

    pub fn counters(&self) -> RadioCounters {
        self.counters
    }

    pub fn last_rssi(&self) -> Option<f64> {
        self.last_rssi
    }

    pub fn is_promiscuous(&self) -> bool {
        self.mode == RadioMode::Promiscuous || (self.mode == RadioMode::Rx && self.config.is_promiscuous)
    }

    pub fn is_receiving(&self) -> bool {
        matches!(self.mode, RadioMode::Rx | RadioMode::Promiscuous)
    }

    fn rebuild_rx(&mut self, now: Micros) {
        if !self.is_receiving() {
            self.rx = None;
            return;
        }
        let cfg = &self.config;
        let state = if self.is_promiscuous() {
            let extra = if self.profile.kind == FrontendKind::Vnrf24 { 1 } else { 0 };
            RxState {
                cursor_us: now as f64,
                period_us: 1e6 / cfg.bit_rate,
                kind: RxKind::Promiscuous(PromiscuousCapture::default(), 8 * (cfg.packet_len.max() + extra)),
            }
        } else {
            let period = 1e6 / (cfg.bit_rate * RX_OVERSAMPLE);
            RxState {
                cursor_us: now as f64,
                period_us: period,
                kind: RxKind::Packet(
                    PacketDemod::new(RX_OVERSAMPLE, period),
                    FrameFormat {
                        sync_word: cfg.sync_word.clone(),
                        packet_len: cfg.packet_len,
                        crc_enabled: cfg.crc_enabled,
                    },
                ),
            }
        };
        self.rx = Some(state);
    }

    fn stop_jam(&mut self, env: &mut Environment) {
        if let Some(id) = self.jam.take() {
            env.stop_carrier(id);
        }
    }

    fn start_jam(&mut self, env: &mut Environment) {
        self.stop_jam(env);
        self.jam = Some(env.start_carrier(&self.name, self.config.carrier_freq, self.config.tx_power));
    }

    pub fn set_mode(&mut self, mode: RadioMode, env: &mut Environment) {
        if mode != RadioMode::Jam {
            self.stop_jam(env);
        }
        self.mode = mode;
        if mode == RadioMode::Jam {
            self.start_jam(env);
        }
        self.rebuild_rx(env.now());
    }

    /// Applies a partial config, charging retune costs to the virtual clock.
    pub fn set_modem_config(&mut self, partial: &PartialModemConfig, env: &mut Environment) -> Result<Vec<&'static str>, HalError> {
        let (next, applied) = partial.apply_to(&self.config, &self.profile)?;
        self.commit(next, env);
        Ok(applied)
    }

    fn commit(&mut self, next: ModemConfig, env: &mut Environment) {
        let t = self.profile.timing;
        let retune = next.carrier_freq != self.config.carrier_freq;
        let refilter = next.rx_bandwidth != self.config.rx_bandwidth || next.bit_rate != self.config.bit_rate;
        let mut cost = 0;
        if retune {
            cost += t.t_hop + t.t_driver;
            if self.calibrated.insert(cal_key(next.carrier_freq)) {
                cost += t.t_cal;
                self.counters.calibrations += 1;
            }
        } else if refilter || next != self.config {
            cost += t.t_driver;
        }
        if retune || next.rx_bandwidth != self.config.rx_bandwidth {
            self.counters.tunings += 1;
        }
        let changed = next != self.config;
        self.config = next;
        self.registers.encode(&self.config, &self.profile);
        if cost > 0 {
            env.advance(cost);
        }
        if changed {
            if self.mode == RadioMode::Jam && retune {
                self.start_jam(env);
            }
            self.rebuild_rx(env.now());
        }
    }

    /// Precomputes calibration for every bin in `[from, to]`.
    pub fn precalibrate(&mut self, from: f64, to: f64, env: &mut Environment) -> usize {
        let mut added = 0;
        for k in cal_key(from)..=cal_key(to) {
            if self.calibrated.insert(k) {
                added += 1;
            }
        }
        self.counters.calibrations += added as u64;
        env.advance(added as u64 * self.profile.timing.t_cal);
        added
    }

    pub fn get_register(&self, addr: u8) -> Result<u8, HalError> {
        self.registers.read(addr)
    }

    pub fn set_register(&mut self, addr: u8, value: u8, env: &mut Environment) -> Result<(), HalError> {
        let mut regs = self.registers.clone();
        regs.write(addr, value)?;
        let mapped = regs.decode(&self.profile)?;
        let (next, _) = mapped.apply_to(&self.config, &self.profile)?;
        self.commit(next, env);
        self.registers = regs;
        Ok(())
    }

    pub fn transmit(&mut self, data: &[u8], repeat: u32, env: &mut Environment) -> Result<(), HalError> {
        let max = match self.config.packet_len {
            PacketLen::Fixed(n) => n,
            PacketLen::Variable(n) => n,
        }
        .min(self.profile.max_packet_len());
        if data.len() > max {
            return Err(HalError::Oversize { len: data.len(), max });
        }
        if self.mode != RadioMode::Tx {
            self.set_mode(RadioMode::Tx, env);
        }
        if repeat == 0 {
            return Ok(());
        }
        let mut body = Vec::with_capacity(data.len() + 3);
        if matches!(self.config.packet_len, PacketLen::Variable(_)) {
            body.push(data.len() as u8);
        }
        body.extend_from_slice(data);
        let payload = if self.config.crc_enabled { with_crc(&body) } else { body };
        let start = (env.now() as f64).max(self.tx_busy_until).ceil() as Micros;
        let e = Emission {
            source: self.name.clone(),
            carrier_hz: self.config.carrier_freq,
            bitrate: self.config.bit_rate,
            power_dbm: self.config.tx_power,
            modulation: self.config.modulation,
            preamble_len: self.config.preamble_len,
            sync_word: self.config.sync_word.clone(),
            payload,
            start_us: start,
            repeat_count: repeat,
            inter_repeat_gap_us: TX_REPEAT_GAP_US,
        };
        self.tx_busy_until = e.end_us();
        env.schedule(e);
        self.counters.tx_packets += repeat as u64;
        Ok(())
    }

    /// One RSSI reading at the current tuning, after the settling time.
    pub fn sample_rssi(&mut self, env: &mut Environment) -> f64 {
        env.advance(self.profile.timing.t_rssi);
        let v = env.observe_rssi(self.config.carrier_freq, self.config.rx_bandwidth, env.now()).value;
        self.counters.rssi_samples += 1;
        self.last_rssi = Some(v);
        v
    }

    /// `n` raw symbols at the configured bitrate, starting now.
    pub fn capture_symbols(&mut self, n: usize, env: &mut Environment) -> Vec<bool> {
        let cfg = &self.config;
        let from = env.now() as f64;
        let samples = env.observe_symbols(cfg.carrier_freq, cfg.rx_bandwidth, cfg.bit_rate, from, n);
        env.advance((n as f64 * 1e6 / cfg.bit_rate).ceil() as Micros);
        self.rebuild_rx(env.now());
        samples
    }

    pub fn poll_reception(&mut self, env: &Environment) -> Vec<Packet> {
        let Some(rx) = self.rx.as_mut() else {
            return Vec::new();
        };
        let now = env.now() as f64;
        let n = ((now - rx.cursor_us) / rx.period_us).floor().max(0.0) as usize;
        if n == 0 {
            return Vec::new();
        }
        let cfg = &self.config;
        let t0 = rx.cursor_us;
        let samples = env.observe_symbols(cfg.carrier_freq, cfg.rx_bandwidth, 1e6 / rx.period_us, t0, n);
        rx.cursor_us += n as f64 * rx.period_us;
        let stamp = |data: Vec<u8>, at_us: f64, end_us: f64| Packet {
            data,
            rx_radio: self.name.clone(),
            carrier_freq: cfg.carrier_freq,
            bit_rate: cfg.bit_rate,
            rssi: env.observe_rssi(cfg.carrier_freq, cfg.rx_bandwidth, at_us as Micros).value,
            millis: (end_us / 1000.0) as u64,
        };
        let mut out = Vec::new();
        match &mut rx.kind {
            RxKind::Packet(demod, fmt) => {
                for ev in demod.feed(&samples, t0, fmt) {
                    match ev {
                        DemodEvent::Frame { data, sync_at_us, end_us } => out.push(stamp(data, sync_at_us, end_us)),
                        DemodEvent::CrcError => self.counters.crc_errors += 1,
                    }
                }
            }
            RxKind::Promiscuous(cap, nbits) => {
                let period = rx.period_us;
                for (bits, start) in cap.feed(&samples, t0, period, *nbits) {
                    let mut bytes = bits_to_bytes(&bits);
                    if self.profile.kind == FrontendKind::Vnrf24 {
                        if matches!(bytes[0], 0xaa | 0x55) {
                            bytes.remove(0);
                        } else {
                            bytes.pop();
                        }
                    }
                    let end = start + period * bits.len() as f64;
                    out.push(stamp(bytes, start, end));
                }
            }
        }
        self.counters.rx_packets += out.len() as u64;
        out
    }
}
