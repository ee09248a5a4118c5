//! Run-length histogram reference for the bitrate estimate.

use std::collections::HashMap;

/// Lengths of maximal same-symbol runs, found from the change points.
pub fn run_lengths(samples: &[bool]) -> Vec<usize> {
    let mut cuts = vec![0];
    cuts.extend((1..samples.len()).filter(|&i| samples[i] != samples[i - 1]));
    cuts.push(samples.len());
    cuts.windows(2).map(|w| w[1] - w[0]).filter(|&l| l > 0).collect()
}

pub fn oracle_estimate(samples: &[bool], r_o: f64, min_runs: usize) -> Option<f64> {
    let runs = run_lengths(samples);
    if runs.len() < 3 {
        return None;
    }
    let mut hist: HashMap<usize, u64> = HashMap::new();
    for &l in &runs[1..runs.len() - 1] {
        *hist.entry(l).or_default() += 1;
    }
    let w: u64 = hist.values().sum();
    let lw: u64 = hist.iter().map(|(l, c)| *l as u64 * c).sum();
    if w < min_runs.max(1) as u64 || lw < 2 * w {
        return None;
    }
    Some(r_o * w as f64 / lw as f64)
}

/// Ideal alternating preamble at `rate`, sampled at `r_o` starting `phase`
/// symbols in, using exact integer arithmetic on milli-bps.
pub fn resampled_preamble(rate: f64, r_o: f64, phase_num: u64, phase_den: u64, n: usize) -> Vec<bool> {
    let r = (rate * 1000.0).round() as u128;
    let ro = (r_o * 1000.0).round() as u128;
    let (pn, pd) = (phase_num as u128, phase_den as u128);
    (0..n as u128)
        .map(|k| {
            let bit = (k * r * pd + pn * ro) / (ro * pd);
            bit.is_multiple_of(2)
        })
        .collect()
}
