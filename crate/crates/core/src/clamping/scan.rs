use serde::{Deserialize, Serialize};

use super::ClampError;
use crate::hal::{FrontendProfile, PartialModemConfig, RadioHal, RadioId};

/// Spacing between first-pass region centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RegionSpacing {
    /// `(1 - c)·B_max`: neighbouring filters overlap by a fraction `c`.
    #[default]
    Overlap,
    /// `(1 - c)/2·B_max`: twice as many regions.
    HalfStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanConfig {
    pub f_o: f64,
    pub f_end: f64,
    /// Region overlap ratio in (0, 1).
    pub c: f64,
    /// Widest receive filter, Hz.
    pub b_max: f64,
    /// Activity threshold above the noise floor, dB.
    pub min_rssi_delta: f64,
    pub spacing: RegionSpacing,
}

impl ScanConfig {
    pub fn new(f_o: f64, f_end: f64, b_max: f64) -> Self {
        Self { f_o, f_end, c: 0.25, b_max, min_rssi_delta: 10.0, spacing: RegionSpacing::default() }
    }

    pub fn step(&self) -> f64 {
        match self.spacing {
            RegionSpacing::Overlap => (1.0 - self.c) * self.b_max,
            RegionSpacing::HalfStep => (1.0 - self.c) / 2.0 * self.b_max,
        }
    }

    /// Smallest `N` such that region `N` reaches `f_end`.
    pub fn region_count(&self) -> usize {
        let span = self.f_end - self.f_o - self.b_max / 2.0;
        if span <= 0.0 {
            return 1;
        }
        (span / self.step() - 1e-9).ceil() as usize + 1
    }

    /// `f_i = f_o + i·step` for `i = 0..=N`.
    pub fn region_centers(&self) -> Vec<f64> {
        (0..self.region_count()).map(|i| self.f_o + i as f64 * self.step()).collect()
    }

    pub fn validate(&self) -> Result<(), ClampError> {
        let ok = self.f_o < self.f_end && self.c > 0.0 && self.c < 1.0 && self.b_max > 0.0;
        if ok { Ok(()) } else { Err(ClampError::Config(format!("{self:?}"))) }
    }
}

/// Retunes to `(hz, bw)` and reads one RSSI sample.
pub fn probe(hal: &mut RadioHal, radio: RadioId, hz: f64, bw: f64) -> Result<f64, ClampError> {
    let p = PartialModemConfig { carrier_freq: Some(hz.round()), rx_bandwidth: Some(bw), ..Default::default() };
    hal.set_modem_config(radio, &p)?;
    Ok(hal.sample_rssi(radio)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionHit {
    pub index: usize,
    pub center: f64,
    pub rssi: f64,
}

/// Strongest of `hits` (lowest frequency wins ties).
pub fn strongest(hits: &[RegionHit]) -> Option<RegionHit> {
    hits.iter().copied().reduce(|best, h| {
        if h.rssi > best.rssi || (h.rssi == best.rssi && h.center < best.center) { h } else { best }
    })
}

/// One full pass over every region at `B_max`.
pub fn region_scan(cfg: &ScanConfig, hal: &mut RadioHal, radio: RadioId) -> Result<RegionHit, ClampError> {
    cfg.validate()?;
    let threshold = hal.env().noise_floor_dbm() + cfg.min_rssi_delta;
    let mut hits = Vec::new();
    for (index, center) in cfg.region_centers().into_iter().enumerate() {
        hits.push(RegionHit { index, center, rssi: probe(hal, radio, center, cfg.b_max)? });
    }
    strongest(&hits).filter(|h| h.rssi > threshold).ok_or(ClampError::NoActivity)
}

/// Incremental trichotomic search: each level halves the filter (snapped to
/// the ladder) and probes three overlapping sub-regions around the current
/// center.
#[derive(Debug, Clone)]
pub struct Refiner {
    c: f64,
    threshold: f64,
    center: f64,
    bw: f64,
    level: Option<Level>,
    levels: usize,
}

#[derive(Debug, Clone)]
struct Level {
    bw: f64,
    candidates: Vec<f64>,
    readings: Vec<RegionHit>,
}

impl Refiner {
    pub fn new(center: f64, bw: f64, c: f64, threshold: f64) -> Self {
        Self { c, threshold, center, bw, level: None, levels: 0 }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn bandwidth(&self) -> f64 {
        self.bw
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Next `(carrier, bandwidth)` to probe, `None` once the narrowest
    /// filter has been reached.
    pub fn next(&mut self, profile: &FrontendProfile) -> Option<(f64, f64)> {
        if self.level.is_none() {
            let bw = profile.nearest_filter(self.bw / 2.0);
            if bw >= self.bw {
                return None;
            }
            let d = (1.0 - self.c) * bw;
            let (lo, hi) = profile.band;
            let mut candidates = vec![self.center, (self.center - d).max(lo), (self.center + d).min(hi)];
            candidates.dedup();
            self.level = Some(Level { bw, candidates, readings: Vec::new() });
        }
        let l = self.level.as_ref().expect("level set above");
        Some((l.candidates[l.readings.len()], l.bw))
    }

    /// Feeds back the RSSI for the last [`Refiner::next`].
    pub fn record(&mut self, rssi: f64) -> Result<(), ClampError> {
        let l = self.level.as_mut().expect("record after next");
        let center = l.candidates[l.readings.len()];
        l.readings.push(RegionHit { index: l.readings.len(), center, rssi });
        if l.readings.len() < l.candidates.len() {
            return Ok(());
        }
        let l = self.level.take().expect("present");
        let best = strongest(&l.readings).expect("three readings");
        if best.rssi <= self.threshold {
            return Err(ClampError::SignalLost);
        }
        self.center = best.center;
        self.bw = l.bw;
        self.levels += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub freq_hat: f64,
    pub bandwidth: f64,
    pub tunings: usize,
}

/// Narrows a region found at `B_max` down to the narrowest filter.
pub fn trichotomic_refine(
    region: RegionHit,
    cfg: &ScanConfig,
    hal: &mut RadioHal,
    radio: RadioId,
) -> Result<Refinement, ClampError> {
    let profile = hal.radio(radio)?.profile().clone();
    let threshold = hal.env().noise_floor_dbm() + cfg.min_rssi_delta;
    let mut r = Refiner::new(region.center, cfg.b_max, cfg.c, threshold);
    let mut tunings = 0;
    while let Some((f, bw)) = r.next(&profile) {
        let rssi = probe(hal, radio, f, bw)?;
        tunings += 1;
        r.record(rssi)?;
    }
    Ok(Refinement { freq_hat: r.center(), bandwidth: r.bandwidth(), tunings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_layout() {
        let cfg = ScanConfig::new(432e6, 437e6, 812e3);
        let c = cfg.region_centers();
        assert_eq!(c.len(), 9);
        assert!((c[1] - 432.609e6).abs() < 1e-3);
        assert!(c[8] + 406e3 >= 437e6);
        assert!(c[7] + 406e3 < 437e6);

        let half = ScanConfig { spacing: RegionSpacing::HalfStep, ..cfg };
        let c = half.region_centers();
        assert_eq!(c.len(), 17);
        assert!((c[1] - 432.3045e6).abs() < 1e-3);
    }

    #[test]
    fn ladder_walk() {
        let p = FrontendProfile::vc1101();
        let mut r = Refiner::new(434e6, 812e3, 0.25, -90.0);
        let mut widths = Vec::new();
        while let Some((_, bw)) = r.next(&p) {
            widths.push(bw);
            r.record(-40.0).unwrap();
        }
        widths.dedup();
        assert_eq!(widths, [406e3, 203e3, 102e3, 58e3]);
        assert_eq!(r.levels(), 4);
    }
}
