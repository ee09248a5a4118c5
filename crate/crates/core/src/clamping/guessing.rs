use serde::Deserialize;
use serde_json::{json, Value};

use super::scan::{probe, strongest, Refiner, RegionHit, RegionSpacing, ScanConfig};
use super::{estimate_bitrate, BitrateEstimatorConfig, ClampError, ClampResult};
use crate::env::Micros;
use crate::hal::{Packet, PacketLen, PartialModemConfig, RadioId, RadioMode};
use crate::pipeline::{args, CommandSpec, Ctx, FieldSpec, FieldType, Module, ModuleError, Verdict};

/// Receive filter used once the carrier is known.
const RX_BANDWIDTH: f64 = 102e3;

#[derive(Debug, Clone)]
enum State {
    Stopped,
    Scanning { pass_start: Micros, next: usize },
    Neighbors { pass_start: Micros, pending: Vec<usize>, hits: Vec<RegionHit>, tunings: usize },
    Refining { pass_start: Micros, refiner: Refiner, tunings: usize },
    Sampling { freq: f64, tunings: usize, t_freq: Micros },
    Listening { until: Micros },
}

impl State {
    fn name(&self) -> &'static str {
        match self {
            State::Stopped => "stopped",
            State::Scanning { .. } => "scanning",
            State::Neighbors { .. } | State::Refining { .. } => "refining",
            State::Sampling { .. } => "sampling",
            State::Listening { .. } => "listening",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
struct Settings {
    radio: Option<String>,
    start_freq: Option<f64>,
    end_freq: Option<f64>,
    sampling_bitrate: Option<f64>,
    overlap: Option<f64>,
    min_rssi_delta: Option<f64>,
    max_buffer: Option<usize>,
    spacing: Option<RegionSpacing>,
    listen_timeout_ms: Option<u64>,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counters {
    passes: u64,
    found: u64,
    lost: u64,
    estimates_failed: u64,
    packets: u64,
}

/// Scans for activity, refines the carrier, estimates the bitrate and then
/// receives at the recovered parameters. One radio operation per loop call.
pub struct GuessingModule {
    radio_name: String,
    radio: Option<RadioId>,
    scan: ScanConfig,
    br: BitrateEstimatorConfig,
    listen_timeout_us: Micros,
    state: State,
    template: PartialModemConfig,
    last: Option<ClampResult>,
    counters: Counters,
}

impl Default for GuessingModule {
    fn default() -> Self {
        Self {
            radio_name: "radioA".into(),
            radio: None,
            scan: ScanConfig::new(432e6, 437e6, 812e3),
            br: BitrateEstimatorConfig::default(),
            listen_timeout_us: 500_000,
            state: State::Stopped,
            template: PartialModemConfig::default(),
            last: None,
            counters: Counters::default(),
        }
    }
}

impl GuessingModule {
    pub const NAME: &'static str = "guessing";

    pub fn new(radio: &str, scan: ScanConfig, br: BitrateEstimatorConfig) -> Self {
        Self { radio_name: radio.into(), scan, br, ..Self::default() }
    }

    pub fn is_running(&self) -> bool {
        !matches!(self.state, State::Stopped)
    }

    fn threshold(&self, ctx: &Ctx) -> f64 {
        ctx.hal.env().noise_floor_dbm() + self.scan.min_rssi_delta
    }

    fn status(&self) -> Value {
        json!({
            "state": self.state.name(),
            "radio": self.radio_name,
            "startFreq": self.scan.f_o,
            "endFreq": self.scan.f_end,
            "samplingBitrate": self.br.r_o,
            "regions": self.scan.region_count(),
            "last": self.last,
            "passes": self.counters.passes,
            "found": self.counters.found,
            "lost": self.counters.lost,
            "estimatesFailed": self.counters.estimates_failed,
            "packets": self.counters.packets,
        })
    }

    fn start(&mut self, ctx: &mut Ctx) -> Result<(), ModuleError> {
        let id = ctx.hal.lookup(&self.radio_name)?;
        let profile = ctx.hal.radio(id)?.profile().clone();
        if self.br.r_o > profile.max_bitrate {
            return Err(ModuleError::Invalid(format!("sampling bitrate above {} bps", profile.max_bitrate)));
        }
        self.scan.b_max = profile.widest_filter();
        self.scan.validate().map_err(|e| ModuleError::Invalid(e.to_string()))?;
        let cfg = ctx.hal.modem_config(id)?;
        self.template = PartialModemConfig {
            sync_word: Some(cfg.sync_word.clone()),
            is_fixed_packet_len: Some(matches!(cfg.packet_len, PacketLen::Fixed(_))),
            packet_len: Some(cfg.packet_len.max()),
            crc_enabled: Some(cfg.crc_enabled),
            ..Default::default()
        };
        let half = self.scan.b_max / 2.0;
        ctx.hal.precalibrate(id, self.scan.f_o - half, self.scan.f_end + half)?;
        ctx.hal.set_modem_config(id, &PartialModemConfig { is_promiscuous: Some(false), ..Default::default() })?;
        ctx.hal.set_mode(id, RadioMode::Rx)?;
        self.radio = Some(id);
        self.rescan(ctx.now());
        Ok(())
    }

    fn stop(&mut self, ctx: &mut Ctx) -> Result<(), ModuleError> {
        if let Some(id) = self.radio {
            ctx.hal.set_mode(id, RadioMode::Idle)?;
        }
        self.state = State::Stopped;
        Ok(())
    }

    fn rescan(&mut self, now: Micros) {
        self.counters.passes += 1;
        self.state = State::Scanning { pass_start: now, next: 0 };
    }

    /// Advances the search by one radio operation.
    fn step(&mut self, ctx: &mut Ctx, id: RadioId) -> Result<(), ClampError> {
        let threshold = self.threshold(ctx);
        let centers = self.scan.region_centers();
        let state = std::mem::replace(&mut self.state, State::Stopped);
        self.state = match state {
            State::Stopped => State::Stopped,
            State::Scanning { pass_start, next } => {
                let rssi = probe(ctx.hal, id, centers[next], self.scan.b_max)?;
                if rssi > threshold {
                    let hit = RegionHit { index: next, center: centers[next], rssi };
                    let pending = [next.checked_sub(1), Some(next + 1)]
                        .into_iter()
                        .flatten()
                        .filter(|&i| i < centers.len())
                        .collect();
                    State::Neighbors { pass_start, pending, hits: vec![hit], tunings: next + 1 }
                } else if next + 1 < centers.len() {
                    State::Scanning { pass_start, next: next + 1 }
                } else {
                    self.counters.passes += 1;
                    State::Scanning { pass_start: ctx.now(), next: 0 }
                }
            }
            State::Neighbors { pass_start, mut pending, mut hits, tunings } => {
                if let Some(i) = pending.pop() {
                    let rssi = probe(ctx.hal, id, centers[i], self.scan.b_max)?;
                    hits.push(RegionHit { index: i, center: centers[i], rssi });
                    State::Neighbors { pass_start, pending, hits, tunings: tunings + 1 }
                } else {
                    let best = strongest(&hits).expect("detection recorded");
                    let refiner = Refiner::new(best.center, self.scan.b_max, self.scan.c, threshold);
                    State::Refining { pass_start, refiner, tunings }
                }
            }
            State::Refining { pass_start, mut refiner, tunings } => {
                let profile = ctx.hal.radio(id)?.profile().clone();
                match refiner.next(&profile) {
                    Some((f, bw)) => {
                        let rssi = probe(ctx.hal, id, f, bw)?;
                        refiner.record(rssi)?;
                        State::Refining { pass_start, refiner, tunings: tunings + 1 }
                    }
                    None => State::Sampling {
                        freq: refiner.center(),
                        tunings,
                        t_freq: ctx.now() - pass_start,
                    },
                }
            }
            State::Sampling { freq, tunings, t_freq, .. } => {
                let t0 = ctx.now();
                let bw = ctx.hal.radio(id)?.profile().nearest_filter(RX_BANDWIDTH);
                let p = PartialModemConfig {
                    carrier_freq: Some(freq.round()),
                    rx_bandwidth: Some(bw),
                    bit_rate: Some(self.br.r_o),
                    is_promiscuous: Some(true),
                    ..Default::default()
                };
                ctx.hal.set_modem_config(id, &p)?;
                let samples = ctx.hal.capture_symbols(id, self.br.samples())?;
                let r_hat = estimate_bitrate(&samples, self.br.r_o, self.br.min_preamble_symbols).ok_or(ClampError::TooFewRuns)?;
                let t_br = ctx.now() - t0;
                let rx = PartialModemConfig {
                    bit_rate: Some(r_hat),
                    is_promiscuous: Some(false),
                    ..self.template.clone()
                };
                ctx.hal.set_modem_config(id, &rx)?;
                ctx.hal.set_mode(id, RadioMode::Rx)?;
                let result = ClampResult { freq_hat: freq, bitrate_hat: r_hat, t_freq, t_br, tunings, at: ctx.now() };
                self.last = Some(result);
                self.counters.found += 1;
                ctx.emit("result", serde_json::to_value(result).expect("result serializes"));
                State::Listening { until: ctx.now() + self.listen_timeout_us }
            }
            State::Listening { until } => {
                if ctx.now() >= until {
                    self.rescan(ctx.now());
                    self.state.clone()
                } else {
                    State::Listening { until }
                }
            }
        };
        Ok(())
    }
}

impl Module for GuessingModule {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn commands(&self) -> Vec<CommandSpec> {
        vec![
            CommandSpec::bare("start"),
            CommandSpec::bare("stop"),
            CommandSpec::bare("status"),
            CommandSpec::new(
                "set",
                vec![
                    FieldSpec::optional("radio", FieldType::Text),
                    FieldSpec::optional("start_freq", FieldType::Float),
                    FieldSpec::optional("end_freq", FieldType::Float),
                    FieldSpec::optional("sampling_bitrate", FieldType::Float),
                    FieldSpec::optional("overlap", FieldType::Float),
                    FieldSpec::optional("min_rssi_delta", FieldType::Float),
                    FieldSpec::optional("max_buffer", FieldType::uint(4096)),
                    FieldSpec::optional("spacing", FieldType::one_of(&["overlap", "halfStep"])),
                    FieldSpec::optional("listen_timeout_ms", FieldType::uint(60_000)),
                ],
            ),
        ]
    }

    fn on_user_command(&mut self, verb: &str, a: &Value, ctx: &mut Ctx) -> Result<Value, ModuleError> {
        match verb {
            "start" => self.start(ctx)?,
            "stop" => self.stop(ctx)?,
            "status" => {}
            "set" => {
                let s: Settings = args(a)?;
                let mut scan = self.scan;
                let mut br = self.br;
                scan.f_o = s.start_freq.unwrap_or(scan.f_o);
                scan.f_end = s.end_freq.unwrap_or(scan.f_end);
                scan.c = s.overlap.unwrap_or(scan.c);
                scan.min_rssi_delta = s.min_rssi_delta.unwrap_or(scan.min_rssi_delta);
                scan.spacing = s.spacing.unwrap_or(scan.spacing);
                br.r_o = s.sampling_bitrate.unwrap_or(br.r_o);
                br.max_buffer = s.max_buffer.unwrap_or(br.max_buffer);
                scan.validate().map_err(|e| ModuleError::Invalid(e.to_string()))?;
                if !(br.r_o > 0.0) || br.max_buffer == 0 {
                    return Err(ModuleError::Invalid("sampling bitrate and buffer must be positive".into()));
                }
                let running = self.is_running();
                if running {
                    self.stop(ctx)?;
                }
                if let Some(r) = s.radio {
                    ctx.hal.lookup(&r)?;
                    self.radio_name = r;
                }
                self.scan = scan;
                self.br = br;
                self.listen_timeout_us = s.listen_timeout_ms.map_or(self.listen_timeout_us, |ms| ms * 1000);
                if running {
                    self.start(ctx)?;
                }
            }
            other => return Err(ModuleError::UnknownCommand(other.into())),
        }
        Ok(self.status())
    }

    fn on_loop(&mut self, ctx: &mut Ctx) -> Result<(), ModuleError> {
        let Some(id) = self.radio.filter(|_| self.is_running()) else {
            return Ok(());
        };
        match self.step(ctx, id) {
            Ok(()) => Ok(()),
            Err(ClampError::Hal(e)) => {
                self.stop(ctx)?;
                Err(e.into())
            }
            Err(e) => {
                match e {
                    ClampError::TooFewRuns => self.counters.estimates_failed += 1,
                    _ => self.counters.lost += 1,
                }
                log::debug!("guessing: {e}, rescanning");
                ctx.hal.set_modem_config(id, &PartialModemConfig { is_promiscuous: Some(false), ..Default::default() })?;
                self.rescan(ctx.now());
                Ok(())
            }
        }
    }

    fn on_packet_received(&mut self, pkt: &mut Packet, ctx: &mut Ctx) -> Result<Verdict, ModuleError> {
        if matches!(self.state, State::Listening { .. }) && pkt.rx_radio == self.radio_name {
            self.counters.packets += 1;
            self.rescan(ctx.now());
        }
        Ok(Verdict::Continue)
    }
}
