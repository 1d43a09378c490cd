#![allow(dead_code)]

use modem_core::channel::{ChannelRealization, Tap};
use modem_core::numerics::RngStream;
use modem_core::qam::QamConstellation;
use modem_core::waveforms::WaveformConfig;
use num_complex::Complex64;

pub fn random_payload(cfg: &WaveformConfig, rng: &mut RngStream) -> Vec<u32> {
    (0..cfg.payload_len()).map(|_| rng.below(cfg.order)).collect()
}

/// Error RMS over received RMS, computed directly.
pub fn evm_oracle(cfg: &WaveformConfig, data: &[u32], soft: &[Complex64]) -> f64 {
    let reference = QamConstellation::new(cfg.order).unwrap().map(data).unwrap();
    let err: f64 = reference.iter().zip(soft).map(|(a, b)| (a - b).norm_sqr()).sum();
    let pow: f64 = soft.iter().map(|v| v.norm_sqr()).sum();
    (err / pow).sqrt()
}

pub fn tap(gain: Complex64, doppler: f64, delay: f64) -> Tap {
    Tap { gain, doppler, delay }
}

/// Random taps with Doppler shifts on bin centres within `max_bins`.
pub fn on_bin_doppler(cfg: &WaveformConfig, max_bins: i64, taps: usize, rng: &mut RngStream) -> ChannelRealization {
    let df = cfg.bin_spacing();
    let v = (0..taps)
        .map(|_| {
            let d = rng.below((2 * max_bins + 1) as u32) as i64 - max_bins;
            tap(rng.complex_gaussian() / (taps as f64).sqrt(), d as f64 * df, 0.0)
        })
        .collect();
    ChannelRealization::new(v).unwrap()
}

/// Random taps at integer sample delays up to `max_samples`.
pub fn integer_delay(cfg: &WaveformConfig, max_samples: u32, taps: usize, rng: &mut RngStream) -> ChannelRealization {
    let ts = cfg.sample_period();
    let v = (0..taps)
        .map(|_| {
            let d = rng.below(max_samples + 1);
            tap(rng.complex_gaussian() / (taps as f64).sqrt(), 0.0, d as f64 * ts)
        })
        .collect();
    ChannelRealization::new(v).unwrap()
}
