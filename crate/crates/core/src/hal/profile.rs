use serde::{Deserialize, Serialize};

/// Per-retune costs, µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    /// PLL hop to a new frequency.
    pub t_hop: u64,
    /// Frequency synthesizer calibration, skipped when cached.
    pub t_cal: u64,
    /// Register traffic from the driver.
    pub t_driver: u64,
    /// Settling time before an RSSI reading is stable.
    pub t_rssi: u64,
}

impl TimingModel {
    /// Cost of a cached retune followed by one RSSI reading.
    pub fn t_tune(&self) -> u64 {
        self.t_hop + self.t_driver + self.t_rssi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontendKind {
    /// Sub-GHz OOK transceiver.
    Vc1101,
    /// 2.4 GHz transceiver with a handful of fixed bitrates.
    Vnrf24,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontendProfile {
    pub name: String,
    pub kind: FrontendKind,
    /// Inclusive tuning range, Hz.
    pub band: (f64, f64),
    /// Receive filter ladder, widest first.
    pub filter_widths: Vec<f64>,
    pub min_bitrate: f64,
    pub max_bitrate: f64,
    /// Only these bitrates are accepted when non-empty.
    pub discrete_bitrates: Vec<f64>,
    pub fifo_bytes: usize,
    pub sync_len: (usize, usize),
    pub tx_power: (f64, f64),
    /// Carrier must be a multiple of this (1 Hz for free tuning).
    pub channel_step_hz: f64,
    pub timing: TimingModel,
}

impl FrontendProfile {
    pub fn vc1101() -> Self {
        Self {
            name: "VC1101".into(),
            kind: FrontendKind::Vc1101,
            band: (300e6, 928e6),
            filter_widths: [812, 650, 541, 464, 406, 325, 270, 232, 203, 162, 135, 116, 102, 81, 68, 58]
                .iter()
                .map(|&k| k as f64 * 1e3)
                .collect(),
            min_bitrate: 600.0,
            max_bitrate: 500_000.0,
            discrete_bitrates: Vec::new(),
            fifo_bytes: 64,
            sync_len: (1, 4),
            tx_power: (-30.0, 12.0),
            channel_step_hz: 1.0,
            timing: TimingModel { t_hop: 75, t_cal: 712, t_driver: 320, t_rssi: 600 },
        }
    }

    pub fn vnrf24() -> Self {
        Self {
            name: "VNRF24".into(),
            kind: FrontendKind::Vnrf24,
            band: (2400e6, 2525e6),
            filter_widths: vec![2e6, 1e6],
            min_bitrate: 250_000.0,
            max_bitrate: 2_000_000.0,
            discrete_bitrates: vec![250_000.0, 1_000_000.0, 2_000_000.0],
            fifo_bytes: 32,
            sync_len: (3, 5),
            tx_power: (-18.0, 0.0),
            channel_step_hz: 1e6,
            timing: TimingModel { t_hop: 130, t_cal: 0, t_driver: 100, t_rssi: 170 },
        }
    }

    pub fn widest_filter(&self) -> f64 {
        self.filter_widths[0]
    }

    pub fn narrowest_filter(&self) -> f64 {
        *self.filter_widths.last().expect("non-empty ladder")
    }

    /// Ladder entry closest to `bw`.
    pub fn nearest_filter(&self, bw: f64) -> f64 {
        self.filter_widths
            .iter()
            .copied()
            .min_by(|a, b| (a - bw).abs().total_cmp(&(b - bw).abs()))
            .expect("non-empty ladder")
    }

    /// Largest payload a single frame may carry.
    pub fn max_packet_len(&self) -> usize {
        match self.kind {
            FrontendKind::Vc1101 => self.fifo_bytes,
            FrontendKind::Vnrf24 => 32,
        }
    }

    pub fn in_band(&self, hz: f64) -> bool {
        hz >= self.band.0 && hz <= self.band.1
    }

    pub fn supports_bitrate(&self, rate: f64) -> bool {
        if self.discrete_bitrates.is_empty() {
            rate >= self.min_bitrate && rate <= self.max_bitrate
        } else {
            self.discrete_bitrates.contains(&rate)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_invariants() {
        for p in [FrontendProfile::vc1101(), FrontendProfile::vnrf24()] {
            assert!(p.filter_widths.windows(2).all(|w| w[0] > w[1]), "{}", p.name);
        }
        let cc = FrontendProfile::vc1101();
        assert_eq!(cc.widest_filter(), 812e3);
        assert_eq!(cc.narrowest_filter(), 58e3);
        assert_eq!(cc.fifo_bytes, 64);
        assert_eq!(cc.timing.t_tune(), 995);
        assert_eq!(cc.nearest_filter(51e3), 58e3);
        assert_eq!(cc.nearest_filter(101.5e3), 102e3);
        let nrf = FrontendProfile::vnrf24();
        assert!(nrf.supports_bitrate(2e6));
        assert!(!nrf.supports_bitrate(5e3));
        assert!(!nrf.supports_bitrate(500e3));
    }
}
