use serde::{Deserialize, Serialize};

use super::clock::Micros;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modulation {
    #[default]
    Ook,
}

/// A scheduled OOK burst: alternating preamble (starting with 1), then the
/// sync word and payload bytes MSB first, repeated `repeat_count` times.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub source: String,
    pub carrier_hz: f64,
    pub bitrate: f64,
    pub power_dbm: f64,
    pub modulation: Modulation,
    pub preamble_len: u32,
    pub sync_word: Vec<u8>,
    pub payload: Vec<u8>,
    pub start_us: Micros,
    pub repeat_count: u32,
    pub inter_repeat_gap_us: Micros,
}

impl Emission {
    pub fn frame_bits(&self) -> usize {
        self.preamble_len as usize + 8 * (self.sync_word.len() + self.payload.len())
    }

    /// On-air time of a single repeat, in microseconds.
    pub fn frame_duration_us(&self) -> f64 {
        self.frame_bits() as f64 / self.bitrate * 1e6
    }

    pub fn frame_start_us(&self, repeat: u32) -> f64 {
        self.start_us as f64 + repeat as f64 * (self.frame_duration_us() + self.inter_repeat_gap_us as f64)
    }

    pub fn frame_end_us(&self, repeat: u32) -> f64 {
        self.frame_start_us(repeat) + self.frame_duration_us()
    }

    pub fn end_us(&self) -> f64 {
        self.frame_end_us(self.repeat_count.saturating_sub(1))
    }

    /// Bit `i` of one frame.
    pub fn bit(&self, i: usize) -> bool {
        let pre = self.preamble_len as usize;
        if i < pre {
            return i.is_multiple_of(2);
        }
        let j = i - pre;
        let byte = if j / 8 < self.sync_word.len() {
            self.sync_word[j / 8]
        } else {
            self.payload[j / 8 - self.sync_word.len()]
        };
        byte & (0x80 >> (j % 8)) != 0
    }

    /// Which repeat is on air at `t_us`, if any.
    pub fn repeat_at(&self, t_us: f64) -> Option<u32> {
        if self.repeat_count == 0 || t_us < self.start_us as f64 {
            return None;
        }
        let period = self.frame_duration_us() + self.inter_repeat_gap_us as f64;
        let k = ((t_us - self.start_us as f64) / period).floor() as u64;
        if k >= self.repeat_count as u64 {
            return None;
        }
        let k = k as u32;
        (t_us < self.frame_end_us(k)).then_some(k)
    }

    pub fn on_air(&self, t_us: f64) -> bool {
        self.repeat_at(t_us).is_some()
    }

    /// Symbol on air at `t_us`: `None` when silent.
    pub fn bit_at(&self, t_us: f64) -> Option<bool> {
        let k = self.repeat_at(t_us)?;
        let idx = ((t_us - self.frame_start_us(k)) * self.bitrate / 1e6).floor() as usize;
        Some(self.bit(idx.min(self.frame_bits() - 1)))
    }

    pub fn overlaps(&self, from_us: f64, to_us: f64) -> bool {
        self.repeat_count > 0 && (self.start_us as f64) < to_us && self.end_us() > from_us
    }
}

/// Unmodulated continuous transmission, as produced by a jamming frontend.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierWave {
    pub source: String,
    pub carrier_hz: f64,
    pub power_dbm: f64,
    pub start_us: Micros,
    pub end_us: Option<Micros>,
}

impl CarrierWave {
    pub fn active_at(&self, t_us: f64) -> bool {
        t_us >= self.start_us as f64 && self.end_us.is_none_or(|e| t_us < e as f64)
    }

    pub fn overlaps(&self, from_us: f64, to_us: f64) -> bool {
        (self.start_us as f64) < to_us && self.end_us.is_none_or(|e| e as f64 > from_us)
    }
}
