mod common;

use std::path::Path;
use std::process::Command;

use modem_core::estimation::ChannelEstimate;
use modem_core::harness::{self, ExperimentSpec, RunOptions, CSV_HEADER};
use modem_core::metrics::{evm, papr, MetricAccumulator, theoretical_mqam_ser};
use modem_core::numerics::{rng_stream, ComplexSequence};
use modem_core::qam::QamConstellation;
use modem_core::waveforms::{modulate, PilotPlan, Scheme, WaveformConfig};
use num_complex::Complex64;

fn tiny_toml(extra: &str) -> String {
    format!(
        r#"
kind = "doppler_sweep"
schemes = ["FDM-FDCP", "SC-TDE", "OFDM-FDE", "SC-FDE"]
realizations = 3
master_seed = 11
{extra}
[grid]
n = [128]
sample_rate_hz = [1e6]
doppler_hz = [20.0, 40.0]
delay_ns = [30.0]
"#
    )
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn csv_header_matches_schema() {
    let mut buf = Vec::new();
    harness::write_csv(&mut buf, &[]).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER.join(","));

    let spec = ExperimentSpec::from_toml(&tiny_toml("")).unwrap();
    let rows = harness::run(&spec).unwrap();
    assert_eq!(rows.len(), 8);
    let mut buf = Vec::new();
    harness::write_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn estimate_sidecar_format() {
    let cfg = WaveformConfig::new(Scheme::OfdmFde, 64, 4, 1e6);
    let est = ChannelEstimate::ones(&cfg).unwrap();
    let mut buf = Vec::new();
    est.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bin,re,im");
    assert_eq!(lines.len(), cfg.grid_len() + 1);
    assert_eq!(lines[1], "0,1,0");
}

#[test]
fn checkpoint_resume_reproduces_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let spec = ExperimentSpec::from_toml(&tiny_toml("")).unwrap();
    let opts = RunOptions {
        workers: Some(2),
        checkpoint: Some(path.clone()),
        progress: false,
    };
    let first = harness::run_with(&spec, &opts).unwrap();
    let full = std::fs::read_to_string(&path).unwrap();

    // Drop the last grid point and a stray partial row, then resume.
    let kept: Vec<&str> = full.lines().filter(|l| !l.contains(",40.0,")).collect();
    assert!(kept.len() < full.lines().count());
    std::fs::write(&path, kept[..kept.len() - 1].join("\n") + "\n").unwrap();
    let resumed = harness::run_with(&spec, &opts).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), full);
    assert_eq!(first.len(), resumed.len());
    assert_eq!(harness::read_csv(&path).unwrap().len(), first.len());
}

#[test]
fn identity_channel_has_no_errors() {
    let dir = tempfile::tempdir().unwrap();
    let taps = dir.path().join("taps.txt");
    std::fs::write(&taps, "# single tap\n0 0\n").unwrap();
    let extra = format!("[channel]\ntap_file = {:?}\n", taps.display().to_string());
    let mut spec = ExperimentSpec::from_toml(&tiny_toml(&extra)).unwrap();
    spec.grid.doppler_hz = vec![0.0];
    for row in harness::run(&spec).unwrap() {
        assert_eq!(row.ser, 0.0, "{}", row.scheme);
        assert!(row.evm_mean < 1e-10, "{} {}", row.scheme, row.evm_mean);
        assert_eq!(row.ser_floor, 0.0);
    }
}

#[test]
fn config_round_trips_through_toml() {
    let spec = harness::rate_sweep(0.001, 4);
    let back = ExperimentSpec::from_toml(&spec.to_toml().unwrap()).unwrap();
    assert_eq!(back, spec);
    assert!(ExperimentSpec::from_toml(&tiny_toml("bogus = 1")).is_err());
    assert!(ExperimentSpec::from_toml(&tiny_toml("").replace("realizations = 3", "realizations = 0")).is_err());
}

#[test]
fn evm_of_20db_awgn() {
    let mut rng = rng_stream(40, 0);
    let q = QamConstellation::new(16).unwrap();
    let sent: Vec<u32> = (0..200_000).map(|_| rng.below(16)).collect();
    let reference = q.map(&sent).unwrap();
    let rx: Vec<Complex64> = reference.iter().map(|r| r + rng.complex_gaussian() * 0.1).collect();
    let e = evm(&reference, &rx).unwrap();
    assert!((e - 0.0995).abs() < 5e-4, "{e}");
}

#[test]
fn ser_matches_monte_carlo() {
    let mut rng = rng_stream(41, 0);
    let q = QamConstellation::new(16).unwrap();
    let snr_db: f64 = 15.0;
    let sigma = (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
    let n = 400_000;
    let mut errors = 0usize;
    for _ in 0..n {
        let s = rng.below(16);
        let p = q.map(&[s]).unwrap()[0];
        let y = p + Complex64::new(rng.standard_normal(), rng.standard_normal()) * sigma;
        errors += (q.demap_one(y) != s) as usize;
    }
    let p = theoretical_mqam_ser(snr_db, 16);
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    let mc = errors as f64 / n as f64;
    assert!((mc - p).abs() < 4.0 * sd, "mc {mc} theory {p}");
    assert!(theoretical_mqam_ser(20.0, 16) < 1e-4);
}

#[test]
fn ofdm_papr_p99_in_expected_range() {
    let cfg = WaveformConfig::new(Scheme::OfdmFde, 1024, 16, 4.5e6);
    let plan = PilotPlan::default_for(&cfg);
    let mut rng = rng_stream(42, 0);
    let mut acc = MetricAccumulator::default();
    for _ in 0..500 {
        let data = common::random_payload(&cfg, &mut rng);
        let tx = modulate(&cfg, &data, &plan).unwrap();
        let samples: &ComplexSequence = &tx.baseband;
        acc.papr.push(papr(samples.samples()).unwrap());
    }
    let p99 = acc.papr_percentile(99.0);
    assert!((8.0..=13.0).contains(&p99), "{p99}");
}

fn modem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modem"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let st = modem().arg("selftest").output().unwrap();
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stdout));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, tiny_toml("bogus = 1")).unwrap();
    assert_eq!(modem().arg("run").arg(&bad).output().unwrap().status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(modem().arg("run").arg(&missing).output().unwrap().status.code(), Some(2));
    let out = modem().args(["sweep", "doppler", "--scale", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let good = dir.path().join("good.toml");
    std::fs::write(&good, tiny_toml("")).unwrap();
    let csv = dir.path().join("res").join("good.csv");
    let out = modem().arg("run").arg(&good).arg("--out").arg(&csv).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(&csv), CSV_HEADER.join(","));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 9);
}
