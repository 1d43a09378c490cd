mod common;

use std::f64::consts::PI;

use common::*;
use modem_core::channel::{add_awgn, apply_channel, ChannelRealization, NoiseSpec};
use modem_core::error::Error;
use modem_core::estimation::*;
use modem_core::numerics::rng_stream;
use modem_core::waveforms::*;
use num_complex::Complex64;

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn tone_cfg() -> (WaveformConfig, PilotPlan) {
    let mut cfg = WaveformConfig::new(Scheme::FdmFdcp, 1024, 8, 4.5e6);
    cfg.pilot_budget = 17;
    let plan = PilotPlan::default_for(&cfg);
    assert_eq!(plan, PilotPlan::Tone { half_width: 8 });
    (cfg, plan)
}

#[test]
fn flat_tap_gives_constant_estimate() {
    let g = Complex64::from_polar(0.5, PI / 4.0);
    let h = ChannelRealization::new(vec![tap(g, 0.0, 0.0)]).unwrap();
    for scheme in Scheme::ALL {
        let cfg = WaveformConfig::new(scheme, 256, 8, 1e6);
        let est = estimate_perfect(&cfg, &h, 0.0).unwrap();
        for v in est.values() {
            assert!((v - g).norm() < 1e-10);
        }
    }
}

#[test]
fn doppler_estimate_matches_closed_form() {
    let mut rng = rng_stream(40, 0);
    for scheme in [Scheme::FdmFdcp, Scheme::ScTde] {
        let cfg = WaveformConfig::new(scheme, 512, 8, 1.92e6);
        let h = on_bin_doppler(&cfg, 8, 5, &mut rng);
        let t0 = 3.7e-4;
        let est = estimate_perfect(&cfg, &h, t0).unwrap();
        let start = t0 + cfg.leading_samples() as f64 * cfg.sample_period();
        let expect: Vec<Complex64> = (0..cfg.grid_len())
            .map(|n| h.doppler_response(start + n as f64 * cfg.grid_spacing()))
            .collect();
        assert!(rel_err(est.values(), &expect) < 1e-9, "{scheme}");
    }
}

#[test]
fn estimate_is_linear() {
    let mut rng = rng_stream(41, 0);
    let k = Complex64::new(-0.3, 1.7);
    for scheme in Scheme::ALL {
        let cfg = WaveformConfig::new(scheme, 256, 8, 1e6);
        let h = ChannelRealization::new(vec![
            tap(rng.complex_gaussian(), 310.0, 0.0),
            tap(rng.complex_gaussian(), -120.0, 2.4e-6),
        ])
        .unwrap();
        let a = estimate_perfect(&cfg, &h, 0.0).unwrap();
        let b = estimate_perfect(&cfg, &h.scaled(k), 0.0).unwrap();
        let scaled: Vec<_> = a.values().iter().map(|v| v * k).collect();
        assert!(rel_err(b.values(), &scaled) < 1e-10);
    }
}

#[test]
fn inband_tone_matches_perfect() {
    let (cfg, plan) = tone_cfg();
    let mut rng = rng_stream(42, 0);
    for _ in 0..10 {
        let h = on_bin_doppler(&cfg, 4, 6, &mut rng);
        let data = random_payload(&cfg, &mut rng);
        let tx = modulate(&cfg, &data, &plan).unwrap();
        let rx = apply_channel(&h, &tx.baseband, 0.0).unwrap();
        let inband = estimate_inband(&cfg, &plan, &rx, 0.0).unwrap();
        let perfect = estimate_perfect(&cfg, &h, 0.0).unwrap();
        assert!(rel_err(inband.values(), perfect.values()) < 1e-6);
        let out = demodulate_with(&cfg, &plan, &rx, &inband).unwrap();
        assert_eq!(out.symbols, data);
    }
}

#[test]
fn inband_tone_under_noise() {
    let (cfg, plan) = tone_cfg();
    let mut rng = rng_stream(43, 0);
    let trials = 50;
    let mut mse = 0.0;
    for _ in 0..trials {
        let h = on_bin_doppler(&cfg, 4, 6, &mut rng);
        let data = random_payload(&cfg, &mut rng);
        let tx = modulate(&cfg, &data, &plan).unwrap();
        let rx = apply_channel(&h, &tx.baseband, 0.0).unwrap();
        let rx = add_awgn(&rx, NoiseSpec { snr_db: 20.0 }, &mut rng).unwrap();
        let inband = estimate_inband(&cfg, &plan, &rx, 0.0).unwrap();
        let perfect = estimate_perfect(&cfg, &h, 0.0).unwrap();
        mse += rel_err(inband.values(), perfect.values()).powi(2);
    }
    let db = 10.0 * (mse / trials as f64).log10();
    assert!(db < -20.0, "{db} dB");
}

#[test]
fn zero_channel_has_no_pilot_energy() {
    let (cfg, plan) = tone_cfg();
    let h = ChannelRealization::new(vec![tap(Complex64::new(0.0, 0.0), 0.0, 0.0)]).unwrap();
    let data = vec![0; cfg.payload_len()];
    let tx = modulate(&cfg, &data, &plan).unwrap();
    let rx = apply_channel(&h, &tx.baseband, 0.0).unwrap();
    assert!(matches!(estimate_inband(&cfg, &plan, &rx, 0.0), Err(Error::NoPilotEnergy)));
}

#[test]
fn narrow_guard_is_reported() {
    let (cfg, plan) = tone_cfg();
    let df = cfg.bin_spacing();
    let one = Complex64::new(1.0, 0.0);
    let h = ChannelRealization::new(vec![tap(one, 0.0, 0.0), tap(one, 5.0 * df, 0.0), tap(one, -5.0 * df, 0.0)])
        .unwrap();
    let mut rng = rng_stream(44, 0);
    let data = random_payload(&cfg, &mut rng);
    let tx = modulate(&cfg, &data, &plan).unwrap();
    let rx = apply_channel(&h, &tx.baseband, 0.0).unwrap();
    assert!(matches!(
        estimate_inband(&cfg, &plan, &rx, 0.0),
        Err(Error::GuardTooNarrow { .. })
    ));
}

#[test]
fn comb_pilots_track_smooth_channels() {
    let mut rng = rng_stream(45, 0);
    for scheme in [Scheme::ScTde, Scheme::OfdmFde] {
        let mut cfg = WaveformConfig::new(scheme, 1024, 8, 4.5e6);
        cfg.pilot_budget = 64;
        let plan = PilotPlan::default_for(&cfg);
        for _ in 0..5 {
            let h = if scheme == Scheme::ScTde {
                on_bin_doppler(&cfg, 2, 4, &mut rng)
            } else {
                integer_delay(&cfg, 4, 4, &mut rng)
            };
            let data = random_payload(&cfg, &mut rng);
            let tx = modulate(&cfg, &data, &plan).unwrap();
            let rx = apply_channel(&h, &tx.baseband, 0.0).unwrap();
            let est = estimate_inband(&cfg, &plan, &rx, 0.0).unwrap();
            let out = demodulate_with(&cfg, &plan, &rx, &est).unwrap();
            assert_eq!(out.symbols, data, "{scheme}");
        }
    }
}

#[test]
fn preamble_matches_perfect() {
    let cfg = WaveformConfig::new(Scheme::ScFde, 512, 8, 1.92e6);
    let plan = PilotPlan::default_for(&cfg);
    assert_eq!(plan, PilotPlan::Preamble);
    let mut rng = rng_stream(46, 0);
    let h = integer_delay(&cfg, 8, 5, &mut rng);
    let rx = apply_channel(&h, &pilot_block(&cfg, &plan).unwrap(), 0.0).unwrap();
    let a = estimate_from_preamble(&cfg, &rx, 0.0).unwrap();
    let b = estimate_perfect(&cfg, &h, 0.0).unwrap();
    assert!(rel_err(a.values(), b.values()) < 1e-12);
}

#[test]
fn inband_requires_pilots() {
    let cfg = WaveformConfig::new(Scheme::OfdmFde, 256, 8, 1e6);
    let plan = PilotPlan::default_for(&cfg);
    let tx = modulate(&cfg, &vec![1; cfg.payload_len()], &plan).unwrap();
    assert!(estimate_inband(&cfg, &plan, &tx.baseband, 0.0).is_err());
}

#[test]
fn scheme_mismatch_is_rejected() {
    let cfg = WaveformConfig::new(Scheme::OfdmFde, 256, 8, 1e6);
    let other = WaveformConfig::new(Scheme::ScFde, 256, 8, 1e6);
    let tx = modulate(&cfg, &vec![1; cfg.payload_len()], &PilotPlan::default_for(&cfg)).unwrap();
    let est = ChannelEstimate::ones(&other).unwrap();
    assert!(matches!(demodulate(&cfg, &tx.baseband, &est), Err(Error::SchemeMismatch { .. })));
}

#[test]
fn zero_forcing_consistency() {
    let mut rng = rng_stream(47, 0);
    for scheme in Scheme::ALL {
        let cfg = WaveformConfig::new(scheme, 256, 8, 1.92e6);
        let plan = PilotPlan::default_for(&cfg);
        let h = if scheme.equalizes_in_time() {
            on_bin_doppler(&cfg, 8, 4, &mut rng)
        } else {
            integer_delay(&cfg, 8, 4, &mut rng)
        };
        let est = estimate_perfect(&cfg, &h, 0.0).unwrap();
        for _ in 0..100 {
            let data = random_payload(&cfg, &mut rng);
            let tx = modulate(&cfg, &data, &plan).unwrap();
            let rx = apply_channel(&h, &tx.baseband, 0.0).unwrap();
            assert_eq!(demodulate(&cfg, &rx, &est).unwrap().symbols, data);
        }
    }
}
