use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::clock::{Micros, VirtualClock};
use super::emission::{CarrierWave, Emission, Modulation};
use super::filter::in_band_power;
use super::receiver::{Decision, RollingCodeReceiver};
use super::scenario::{ActorSpec, EnvScenario, KeyFobSpec};
use super::EnvError;
use crate::checksum::{strip_crc, with_crc};

/// Completed emissions older than this are forgotten.
const RETAIN_US: Micros = 2_000_000;
/// Receivers decode frames whose bitrate is within this relative tolerance.
const RECEIVER_RATE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EmissionId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssiObservation {
    pub value: f64,
    pub at: Micros,
    pub tuned: f64,
    pub bandwidth: f64,
}

/// Log entry for every frame a receiver actor heard (or failed to hear).
#[derive(Debug, Clone, PartialEq)]
pub struct ReceptionEvent {
    pub receiver: String,
    pub source: String,
    pub at: Micros,
    pub decision: Decision,
}

#[derive(Debug, Clone)]
struct Scheduled {
    id: EmissionId,
    emission: Emission,
    delivered: u32,
}

#[derive(Debug, Clone)]
struct FobState {
    spec: KeyFobSpec,
    next_code: u32,
}

#[derive(Debug, Clone)]
pub struct Environment {
    clock: VirtualClock,
    seed: u64,
    noise_floor_dbm: f64,
    rssi_noise_sigma_db: f64,
    squelch_margin_db: f64,
    capture_margin_db: f64,
    emissions: Vec<Scheduled>,
    carriers: BTreeMap<EmissionId, CarrierWave>,
    next_id: u64,
    receivers: BTreeMap<String, RollingCodeReceiver>,
    fobs: BTreeMap<String, FobState>,
    actor_ids: Vec<String>,
    log: Vec<ReceptionEvent>,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Environment {
    pub fn new(scenario: &EnvScenario) -> Result<Self, EnvError> {
        scenario.validate()?;
        let mut env = Self {
            clock: VirtualClock::new(),
            seed: scenario.seed,
            noise_floor_dbm: scenario.noise_floor_dbm,
            rssi_noise_sigma_db: scenario.rssi_noise_sigma_db,
            squelch_margin_db: scenario.squelch_margin_db,
            capture_margin_db: scenario.capture_margin_db,
            emissions: Vec::new(),
            carriers: BTreeMap::new(),
            next_id: 0,
            receivers: BTreeMap::new(),
            fobs: BTreeMap::new(),
            actor_ids: Vec::new(),
            log: Vec::new(),
        };
        for actor in &scenario.actors {
            env.actor_ids.push(actor.id().to_string());
            match actor {
                ActorSpec::KeyFob(f) => {
                    env.fobs.insert(f.id.clone(), FobState { spec: f.clone(), next_code: f.first_code });
                    for &t in &f.presses {
                        env.press_fob(&f.id, t)?;
                    }
                }
                ActorSpec::CarReceiver(r) => {
                    env.receivers.insert(r.id.clone(), RollingCodeReceiver::new(r.clone()));
                }
                ActorSpec::Mouse(m) => {
                    let e = Emission {
                        source: m.id.clone(),
                        carrier_hz: m.carrier_hz,
                        bitrate: m.bitrate,
                        power_dbm: m.power_dbm,
                        modulation: Modulation::Ook,
                        preamble_len: m.preamble_len,
                        sync_word: m.address.clone(),
                        payload: with_crc(&m.payload),
                        start_us: m.start_us,
                        repeat_count: m.count,
                        inter_repeat_gap_us: 0,
                    };
                    let gap = (m.period_us as f64 - e.frame_duration_us()).max(0.0).round() as Micros;
                    env.schedule(Emission { inter_repeat_gap_us: gap, ..e });
                }
                ActorSpec::Beacon(b) => {
                    env.schedule(Emission {
                        source: b.id.clone(),
                        carrier_hz: b.carrier_hz,
                        bitrate: b.bitrate,
                        power_dbm: b.power_dbm,
                        modulation: Modulation::Ook,
                        preamble_len: b.preamble_len,
                        sync_word: b.sync_word.clone(),
                        payload: if b.crc { with_crc(&b.payload) } else { b.payload.clone() },
                        start_us: b.start_us,
                        repeat_count: b.repeat_count,
                        inter_repeat_gap_us: b.inter_repeat_gap_us,
                    });
                }
            }
        }
        Ok(env)
    }

    pub fn now(&self) -> Micros {
        self.clock.now()
    }

    pub fn clock(&self) -> VirtualClock {
        self.clock
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn noise_floor_dbm(&self) -> f64 {
        self.noise_floor_dbm
    }

    pub fn rssi_noise_sigma_db(&self) -> f64 {
        self.rssi_noise_sigma_db
    }

    pub fn set_rssi_noise_sigma_db(&mut self, sigma: f64) {
        self.rssi_noise_sigma_db = sigma.max(0.0);
    }

    /// Fixed OOK decision threshold (noise floor + squelch margin).
    pub fn squelch_dbm(&self) -> f64 {
        self.noise_floor_dbm + self.squelch_margin_db
    }

    pub fn set_squelch_margin_db(&mut self, margin: f64) {
        self.squelch_margin_db = margin;
    }

    pub fn actor_ids(&self) -> &[String] {
        &self.actor_ids
    }

    /// Moves virtual time forward, delivering any frames that completed.
    pub fn advance(&mut self, dt: Micros) -> Micros {
        let now = self.clock.advance(dt);
        self.deliver_completed();
        self.prune();
        now
    }

    /// Advances to `t` if it lies in the future.
    pub fn advance_to(&mut self, t: Micros) -> Micros {
        let now = self.now();
        self.advance(t.saturating_sub(now))
    }

    pub fn schedule(&mut self, emission: Emission) -> EmissionId {
        let id = EmissionId(self.next_id);
        self.next_id += 1;
        self.emissions.push(Scheduled { id, emission, delivered: 0 });
        id
    }

    /// Starts an open-ended carrier at the current time.
    pub fn start_carrier(&mut self, source: &str, carrier_hz: f64, power_dbm: f64) -> EmissionId {
        let id = EmissionId(self.next_id);
        self.next_id += 1;
        self.carriers.insert(
            id,
            CarrierWave {
                source: source.to_string(),
                carrier_hz,
                power_dbm,
                start_us: self.now(),
                end_us: None,
            },
        );
        id
    }

    pub fn stop_carrier(&mut self, id: EmissionId) {
        let now = self.now();
        if let Some(c) = self.carriers.get_mut(&id) {
            if c.end_us.is_none() {
                c.end_us = Some(now);
            }
        }
    }

    pub fn emission(&self, id: EmissionId) -> Option<&Emission> {
        self.emissions.iter().find(|s| s.id == id).map(|s| &s.emission)
    }

    pub fn emissions(&self) -> impl Iterator<Item = &Emission> {
        self.emissions.iter().map(|s| &s.emission)
    }

    /// Emissions on air at `t`, continuous carriers included as `true`.
    pub fn active_sources(&self, t: Micros) -> Vec<String> {
        let t = t as f64;
        let mut out: Vec<String> = self
            .emissions
            .iter()
            .filter(|s| s.emission.on_air(t))
            .map(|s| s.emission.source.clone())
            .collect();
        out.extend(self.carriers.values().filter(|c| c.active_at(t)).map(|c| c.source.clone()));
        out
    }

    pub fn active_carriers(&self) -> impl Iterator<Item = &CarrierWave> {
        let now = self.now() as f64;
        self.carriers.values().filter(move |c| c.active_at(now))
    }

    /// Schedules the next rolling code of a key fob at `at`. Returns the code sent.
    pub fn press_fob(&mut self, fob_id: &str, at: Micros) -> Result<u32, EnvError> {
        let fob = self.fobs.get_mut(fob_id).ok_or_else(|| {
            if self.actor_ids.iter().any(|a| a == fob_id) {
                EnvError::NotAKeyFob(fob_id.to_string())
            } else {
                EnvError::UnknownActor(fob_id.to_string())
            }
        })?;
        let code = fob.next_code;
        fob.next_code += 1;
        let spec = fob.spec.clone();
        let mut data = code.to_be_bytes().to_vec();
        data.extend_from_slice(&spec.tail);
        self.schedule(Emission {
            source: spec.id.clone(),
            carrier_hz: spec.carrier_hz,
            bitrate: spec.bitrate,
            power_dbm: spec.power_dbm,
            modulation: Modulation::Ook,
            preamble_len: spec.preamble_len,
            sync_word: spec.sync_word.clone(),
            payload: with_crc(&data),
            start_us: at,
            repeat_count: spec.repeat_count,
            inter_repeat_gap_us: spec.inter_repeat_gap_us,
        });
        Ok(code)
    }

    fn noise_db(&self, at: Micros, tuned: f64) -> f64 {
        if self.rssi_noise_sigma_db == 0.0 {
            return 0.0;
        }
        let key = splitmix(self.seed ^ splitmix(at ^ splitmix(tuned.to_bits())));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let z: f64 = StandardNormal.sample(&mut rng);
        z * self.rssi_noise_sigma_db
    }

    /// Strongest in-band power at `t` (noise floor if nothing is audible).
    fn in_band_signal(&self, tuned: f64, bandwidth: f64, t: f64) -> f64 {
        let bursts = self
            .emissions
            .iter()
            .filter(|s| s.emission.on_air(t))
            .filter_map(|s| in_band_power(s.emission.power_dbm, s.emission.carrier_hz, tuned, bandwidth));
        let cws = self
            .carriers
            .values()
            .filter(|c| c.active_at(t))
            .filter_map(|c| in_band_power(c.power_dbm, c.carrier_hz, tuned, bandwidth));
        bursts.chain(cws).fold(self.noise_floor_dbm, f64::max)
    }

    pub fn observe_rssi(&self, tuned: f64, bandwidth: f64, at: Micros) -> RssiObservation {
        let signal = self.in_band_signal(tuned, bandwidth, at as f64);
        let sigma = self.rssi_noise_sigma_db;
        let value = (signal + self.noise_db(at, tuned)).max(self.noise_floor_dbm - 3.0 * sigma);
        RssiObservation { value, at, tuned, bandwidth }
    }

    /// Hard OOK decisions at `sample_rate`, starting at `from_us`.
    ///
    /// A sample is 1 when some modulated emission is on a 1-symbol with in-band
    /// power above the slicer threshold. The threshold is the squelch level,
    /// raised to (steady carrier + capture margin) when a carrier is in band.
    pub fn observe_symbols(&self, tuned: f64, bandwidth: f64, sample_rate: f64, from_us: f64, n: usize) -> Vec<bool> {
        let mut out = vec![false; n];
        if n == 0 || !(sample_rate > 0.0) {
            return out;
        }
        let period = 1e6 / sample_rate;
        let to_us = from_us + period * n as f64;
        let bursts: Vec<(&Emission, f64)> = self
            .emissions
            .iter()
            .filter(|s| s.emission.overlaps(from_us, to_us))
            .filter_map(|s| {
                in_band_power(s.emission.power_dbm, s.emission.carrier_hz, tuned, bandwidth).map(|p| (&s.emission, p))
            })
            .filter(|&(_, p)| p > self.squelch_dbm())
            .collect();
        if bursts.is_empty() {
            return out;
        }
        let cws: Vec<(&CarrierWave, f64)> = self
            .carriers
            .values()
            .filter(|c| c.overlaps(from_us, to_us))
            .filter_map(|c| in_band_power(c.power_dbm, c.carrier_hz, tuned, bandwidth).map(|p| (c, p)))
            .collect();
        let squelch = self.squelch_dbm();
        for (i, slot) in out.iter_mut().enumerate() {
            let t = from_us + i as f64 * period;
            let threshold = cws
                .iter()
                .filter(|(c, _)| c.active_at(t))
                .map(|&(_, p)| p + self.capture_margin_db)
                .fold(squelch, f64::max);
            *slot = bursts.iter().any(|&(e, p)| p > threshold && e.bit_at(t) == Some(true));
        }
        out
    }

    fn receiver_jammed(&self, rx: &RollingCodeReceiver, from_us: f64, to_us: f64) -> bool {
        let squelch = self.squelch_dbm();
        self.carriers.values().filter(|c| c.overlaps(from_us, to_us)).any(|c| {
            in_band_power(c.power_dbm, c.carrier_hz, rx.spec.carrier_hz, rx.spec.bandwidth_hz)
                .is_some_and(|p| p > squelch)
        })
    }

    /// Presents `payload` to a receiver actor at time `at`.
    pub fn receiver_accepts(&mut self, actor_id: &str, payload: &[u8], at: Micros) -> Result<Decision, EnvError> {
        let rx = self.receivers.get(actor_id).ok_or_else(|| {
            if self.actor_ids.iter().any(|a| a == actor_id) {
                EnvError::NotAReceiver(actor_id.to_string())
            } else {
                EnvError::UnknownActor(actor_id.to_string())
            }
        })?;
        let t = at as f64;
        if self.receiver_jammed(rx, t, t + 1.0) {
            return Ok(Decision::Jammed);
        }
        let rx = self.receivers.get_mut(actor_id).expect("checked above");
        Ok(rx.offer(payload))
    }

    pub fn receiver(&self, actor_id: &str) -> Option<&RollingCodeReceiver> {
        self.receivers.get(actor_id)
    }

    pub fn reception_log(&self) -> &[ReceptionEvent] {
        &self.log
    }

    fn deliver_completed(&mut self) {
        let now = self.now() as f64;
        let mut frames = Vec::new();
        for s in &mut self.emissions {
            while s.delivered < s.emission.repeat_count && s.emission.frame_end_us(s.delivered) <= now {
                frames.push((s.emission.clone(), s.delivered));
                s.delivered += 1;
            }
        }
        frames.sort_by(|a, b| a.0.frame_end_us(a.1).total_cmp(&b.0.frame_end_us(b.1)));
        for (e, k) in frames {
            self.deliver_frame(&e, k);
        }
    }

    fn deliver_frame(&mut self, e: &Emission, repeat: u32) {
        let (start, end) = (e.frame_start_us(repeat), e.frame_end_us(repeat));
        let squelch = self.squelch_dbm();
        let ids: Vec<String> = self.receivers.keys().cloned().collect();
        for id in ids {
            let rx = &self.receivers[&id];
            let audible = in_band_power(e.power_dbm, e.carrier_hz, rx.spec.carrier_hz, rx.spec.bandwidth_hz)
                .is_some_and(|p| p > squelch);
            let decodable = (e.bitrate - rx.spec.bitrate).abs() <= RECEIVER_RATE_TOLERANCE * rx.spec.bitrate
                && e.sync_word == rx.spec.sync_word;
            if !audible || !decodable {
                continue;
            }
            let decision = if self.receiver_jammed(rx, start, end) {
                Some(Decision::Jammed)
            } else {
                strip_crc(&e.payload).map(|data| self.receivers.get_mut(&id).expect("known").offer(data))
            };
            if let Some(decision) = decision {
                self.log.push(ReceptionEvent {
                    receiver: id.clone(),
                    source: e.source.clone(),
                    at: end.ceil() as Micros,
                    decision,
                });
            }
        }
    }

    fn prune(&mut self) {
        let horizon = self.now().saturating_sub(RETAIN_US) as f64;
        self.emissions
            .retain(|s| s.delivered < s.emission.repeat_count || s.emission.end_us() >= horizon);
        self.carriers.retain(|_, c| c.end_us.is_none_or(|e| e as f64 >= horizon));
    }
}
