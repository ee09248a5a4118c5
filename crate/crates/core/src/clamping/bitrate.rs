use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Which same-symbol runs feed the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunSymbols {
    Ones,
    Zeros,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSelection {
    pub symbols: RunSymbols,
    /// Skip the first and last run, which may be cut off by the capture window.
    pub interior_only: bool,
}

impl Default for RunSelection {
    fn default() -> Self {
        Self { symbols: RunSymbols::Both, interior_only: true }
    }
}

/// Histogram of run lengths: `|p| -> w`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunLengthSummary {
    pub runs: BTreeMap<usize, u64>,
}

impl RunLengthSummary {
    pub fn from_samples(samples: &[bool], sel: RunSelection) -> Self {
        let mut runs: Vec<(bool, usize)> = Vec::new();
        for &s in samples {
            match runs.last_mut() {
                Some((sym, n)) if *sym == s => *n += 1,
                _ => runs.push((s, 1)),
            }
        }
        let interior = if sel.interior_only {
            if runs.len() < 2 { &[][..] } else { &runs[1..runs.len() - 1] }
        } else {
            &runs[..]
        };
        let mut hist = BTreeMap::new();
        for &(sym, len) in interior {
            let keep = match sel.symbols {
                RunSymbols::Ones => sym,
                RunSymbols::Zeros => !sym,
                RunSymbols::Both => true,
            };
            if keep {
                *hist.entry(len).or_insert(0) += 1;
            }
        }
        Self { runs: hist }
    }

    /// `Σ w_i`
    pub fn total_weight(&self) -> u64 {
        self.runs.values().sum()
    }

    /// `Σ |p_i|·w_i`
    pub fn weighted_length(&self) -> u64 {
        self.runs.iter().map(|(&len, &w)| len as u64 * w).sum()
    }

    /// `r_o · Σw / Σ|p|w`, or `None` for an empty histogram.
    pub fn estimate(&self, r_o: f64) -> Option<f64> {
        let w = self.total_weight();
        (w > 0).then(|| r_o * w as f64 / self.weighted_length() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BitrateEstimatorConfig {
    /// Oversampling rate, bits/s.
    pub r_o: f64,
    /// Interior runs needed before an estimate is trusted.
    pub min_preamble_symbols: usize,
    /// Capture size in bytes.
    pub max_buffer: usize,
}

impl Default for BitrateEstimatorConfig {
    fn default() -> Self {
        Self { r_o: 30e3, min_preamble_symbols: 6, max_buffer: 32 }
    }
}

impl BitrateEstimatorConfig {
    pub fn samples(&self) -> usize {
        self.max_buffer * 8
    }

    /// Virtual time spent capturing, µs.
    pub fn capture_us(&self) -> f64 {
        self.samples() as f64 * 1e6 / self.r_o
    }
}

/// Estimate over interior runs of both symbols. `None` when fewer than
/// `min_runs` runs were seen or runs average under two samples (the source
/// is too fast for `r_o` to resolve).
pub fn estimate_bitrate(samples: &[bool], r_o: f64, min_runs: usize) -> Option<f64> {
    let s = RunLengthSummary::from_samples(samples, RunSelection::default());
    let w = s.total_weight();
    if w < min_runs.max(1) as u64 || s.weighted_length() < 2 * w {
        return None;
    }
    s.estimate(r_o)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().filter(|c| *c != '|').map(|c| c == '1').collect()
    }

    #[test]
    fn worked_example_over_ones() {
        let p = bits("1|00|111|000|11|000|111");
        let s = RunLengthSummary::from_samples(&p, RunSelection { symbols: RunSymbols::Ones, interior_only: false });
        assert_eq!(s.runs, BTreeMap::from([(1, 1), (2, 1), (3, 2)]));
        assert_eq!((s.total_weight(), s.weighted_length()), (4, 9));
        assert_eq!(s.estimate(9.0), Some(4.0));
        let all = RunLengthSummary::from_samples(&p, RunSelection::default());
        assert_eq!((all.total_weight(), all.weighted_length()), (5, 13));
    }

    #[test]
    fn integer_oversampling_is_exact() {
        let p: Vec<bool> = (0..256).map(|i| (i / 6) % 2 == 0).collect();
        assert_eq!(estimate_bitrate(&p, 30e3, 6), Some(5e3));
    }

    #[test]
    fn too_few_runs_defers() {
        assert_eq!(estimate_bitrate(&bits("1110001110"), 30e3, 6), None);
        assert_eq!(estimate_bitrate(&[false; 64], 30e3, 6), None);
        let fast: Vec<bool> = (0..64).map(|i| i % 2 == 0).collect();
        assert_eq!(estimate_bitrate(&fast, 30e3, 6), None);
        let too_fast: Vec<bool> = (0..64).map(|i| i % 3 == 0).collect();
        assert_eq!(estimate_bitrate(&too_fast, 30e3, 6), None);
    }

    #[test]
    fn runtime_bound() {
        let c = BitrateEstimatorConfig::default();
        assert!((c.capture_us() - 8533.33).abs() < 0.01);
    }
}
