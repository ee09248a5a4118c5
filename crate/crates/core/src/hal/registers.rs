//! Register files of the virtual frontends.
//!
//! Only carrier, bitrate, receive bandwidth and sync word are mapped; every
//! other address is plain storage.
//!
//! VC1101 (48 registers):
//!
//! | addr      | field                                   |
//! |-----------|-----------------------------------------|
//! | 0x04      | sync word length (1..=4)                |
//! | 0x05-0x08 | sync word bytes, first byte at 0x05     |
//! | 0x0C-0x0F | carrier, Hz, u32 big-endian             |
//! | 0x10      | filter ladder index (0 = widest)        |
//! | 0x11-0x14 | bitrate, centi-bits/s, u32 big-endian   |
//!
//! VNRF24 (30 registers):
//!
//! | addr      | field                                          |
//! |-----------|------------------------------------------------|
//! | 0x03      | address width minus 2 (1..=3)                  |
//! | 0x05      | channel, carrier = 2400 MHz + ch MHz           |
//! | 0x06      | bit 5 set: 250 kbps, bit 3 set: 2 Mbps, else 1 Mbps |
//! | 0x0A-0x0E | address (sync word) bytes                      |
//! | 0x1D      | filter ladder index                            |

use super::config::{ModemConfig, PartialModemConfig};
use super::profile::{FrontendKind, FrontendProfile};
use super::HalError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterFile {
    values: Vec<u8>,
}

impl RegisterFile {
    pub fn for_kind(kind: FrontendKind) -> Self {
        let size = match kind {
            FrontendKind::Vc1101 => 0x30,
            FrontendKind::Vnrf24 => 0x1E,
        };
        Self { values: vec![0; size] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn read(&self, addr: u8) -> Result<u8, HalError> {
        self.values.get(addr as usize).copied().ok_or(HalError::RegisterOutOfRange(addr))
    }

    pub fn write(&mut self, addr: u8, value: u8) -> Result<(), HalError> {
        let slot = self.values.get_mut(addr as usize).ok_or(HalError::RegisterOutOfRange(addr))?;
        *slot = value;
        Ok(())
    }

    fn put_u32(&mut self, addr: usize, v: u32) {
        self.values[addr..addr + 4].copy_from_slice(&v.to_be_bytes());
    }

    fn get_u32(&self, addr: usize) -> u32 {
        let b = &self.values[addr..addr + 4];
        u32::from_be_bytes([b[0], b[1], b[2], b[3]])
    }

    /// Writes the mapped fields of `cfg`.
    pub fn encode(&mut self, cfg: &ModemConfig, profile: &FrontendProfile) {
        let bw_index = profile.filter_widths.iter().position(|&w| w == cfg.rx_bandwidth).unwrap_or(0) as u8;
        match profile.kind {
            FrontendKind::Vc1101 => {
                self.values[0x04] = cfg.sync_word.len() as u8;
                for i in 0..4 {
                    self.values[0x05 + i] = cfg.sync_word.get(i).copied().unwrap_or(0);
                }
                self.put_u32(0x0C, cfg.carrier_freq.round() as u32);
                self.values[0x10] = bw_index;
                self.put_u32(0x11, (cfg.bit_rate * 100.0).round() as u32);
            }
            FrontendKind::Vnrf24 => {
                self.values[0x03] = cfg.sync_word.len().saturating_sub(2) as u8;
                self.values[0x05] = ((cfg.carrier_freq - 2400e6) / 1e6).round() as u8;
                let dr = &mut self.values[0x06];
                *dr &= !0b0010_1000;
                if cfg.bit_rate == 250e3 {
                    *dr |= 0b0010_0000;
                } else if cfg.bit_rate == 2e6 {
                    *dr |= 0b0000_1000;
                }
                for i in 0..5 {
                    self.values[0x0A + i] = cfg.sync_word.get(i).copied().unwrap_or(0);
                }
                self.values[0x1D] = bw_index;
            }
        }
    }

    /// Reads the mapped fields back as a partial config.
    pub fn decode(&self, profile: &FrontendProfile) -> Result<PartialModemConfig, HalError> {
        let bw_index = match profile.kind {
            FrontendKind::Vc1101 => self.values[0x10],
            FrontendKind::Vnrf24 => self.values[0x1D],
        } as usize;
        let bw = *profile
            .filter_widths
            .get(bw_index)
            .ok_or_else(|| HalError::Unsupported(format!("filter index {bw_index}")))?;
        let (carrier, rate, sync) = match profile.kind {
            FrontendKind::Vc1101 => {
                let len = self.values[0x04] as usize;
                if !(1..=4).contains(&len) {
                    return Err(HalError::Unsupported(format!("sync length {len}")));
                }
                (
                    self.get_u32(0x0C) as f64,
                    self.get_u32(0x11) as f64 / 100.0,
                    self.values[0x05..0x05 + len].to_vec(),
                )
            }
            FrontendKind::Vnrf24 => {
                let aw = self.values[0x03] as usize + 2;
                if !(3..=5).contains(&aw) {
                    return Err(HalError::Unsupported(format!("address width {aw}")));
                }
                let dr = self.values[0x06];
                let rate = if dr & 0b0010_0000 != 0 {
                    250e3
                } else if dr & 0b0000_1000 != 0 {
                    2e6
                } else {
                    1e6
                };
                (2400e6 + self.values[0x05] as f64 * 1e6, rate, self.values[0x0A..0x0A + aw].to_vec())
            }
        };
        Ok(PartialModemConfig {
            carrier_freq: Some(carrier),
            bit_rate: Some(rate),
            rx_bandwidth: Some(bw),
            sync_word: Some(sync),
            ..Default::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_mapped_fields() {
        for p in [FrontendProfile::vc1101(), FrontendProfile::vnrf24()] {
            let cfg = ModemConfig::default_for(&p);
            let mut r = RegisterFile::for_kind(p.kind);
            r.encode(&cfg, &p);
            let back = r.decode(&p).unwrap();
            assert_eq!(back.carrier_freq, Some(cfg.carrier_freq));
            assert_eq!(back.bit_rate, Some(cfg.bit_rate));
            assert_eq!(back.rx_bandwidth, Some(cfg.rx_bandwidth));
            assert_eq!(back.sync_word.as_ref(), Some(&cfg.sync_word));
        }
    }

    #[test]
    fn out_of_range_address() {
        let r = RegisterFile::for_kind(FrontendKind::Vc1101);
        assert_eq!(r.read(0xFF), Err(HalError::RegisterOutOfRange(0xFF)));
        assert!(r.read(0x2F).is_ok());
    }
}
