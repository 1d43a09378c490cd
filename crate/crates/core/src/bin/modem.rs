use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use modem_core::channel::{apply_channel, ChannelRealization, Tap};
use modem_core::estimation::estimate_perfect;
use modem_core::harness::{self, ExperimentKind, ExperimentSpec, RunOptions, DEFAULT_SCALE};
use modem_core::metrics::theoretical_mqam_ser;
use modem_core::numerics::{fft_vec, ifft_vec, q_function, rng_stream};
use modem_core::waveforms::{demodulate, modulate, CpMode, PilotPlan, Scheme, WaveformConfig};
use modem_core::Error;
use num_complex::Complex64;

#[derive(Parser)]
#[command(name = "modem", version, about = "Doppler-robust waveform link simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Doppler,
    Delay,
    Rate,
    Blocklen,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment described by a TOML file.
    Run {
        config: PathBuf,
        /// CSV path; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run one of the canned parameter sweeps.
    Sweep {
        kind: SweepKind,
        /// Fraction of the full 100 000 realizations.
        #[arg(long, default_value_t = DEFAULT_SCALE)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// SER against SNR for one scheme.
    SerCurve {
        #[arg(long)]
        scheme: Scheme,
        #[arg(long, value_delimiter = ',')]
        doppler: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0)]
        snr_min: f64,
        #[arg(long, default_value_t = 30.0)]
        snr_max: f64,
        #[arg(long, default_value_t = 2.0)]
        snr_step: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        fs: Option<f64>,
        #[arg(long)]
        delay_ns: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SCALE)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check core invariants on tiny problems.
    Selftest,
}

enum Failure {
    Config(String),
    Invariant(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("selftest failed: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Run {
            config,
            out,
            workers,
        } => {
            let spec = ExperimentSpec::load(&config)?;
            let target = out.or_else(|| spec.output.clone());
            let opts = RunOptions {
                workers,
                checkpoint: target.clone(),
                progress: true,
            };
            let rows = harness::run_with(&spec, &opts)?;
            if target.is_none() {
                harness::write_csv(std::io::stdout().lock(), &rows)?;
            }
            Ok(())
        }
        Cmd::Sweep {
            kind,
            scale,
            seed,
            out,
            workers,
        } => {
            check_scale(scale)?;
            let kind = match kind {
                SweepKind::Doppler => ExperimentKind::DopplerSweep,
                SweepKind::Delay => ExperimentKind::DelaySweep,
                SweepKind::Rate => ExperimentKind::RateSweep,
                SweepKind::Blocklen => ExperimentKind::BlocklenSweep,
            };
            let spec = harness::preset(kind, scale, seed);
            write_to_dir(&spec, &out, workers)
        }
        Cmd::SerCurve {
            scheme,
            doppler,
            snr_min,
            snr_max,
            snr_step,
            n,
            fs,
            delay_ns,
            scale,
            seed,
            out,
            workers,
        } => {
            check_scale(scale)?;
            if !(snr_step > 0.0) || snr_max < snr_min {
                return Err(Failure::Config("need snr_step > 0 and snr_max >= snr_min".into()));
            }
            let mut spec = harness::awgn_ser_curve(vec![scheme], scale, seed);
            if let Some(d) = doppler {
                spec.grid.doppler_hz = d;
            }
            if let Some(n) = n {
                spec.grid.n = vec![n];
            }
            if let Some(fs) = fs {
                spec.grid.sample_rate_hz = vec![fs];
            }
            if let Some(t) = delay_ns {
                spec.grid.delay_ns = vec![t];
            }
            let steps = ((snr_max - snr_min) / snr_step + 1e-9).floor() as usize;
            spec.grid.snr_db = (0..=steps).map(|k| snr_min + k as f64 * snr_step).collect();
            let dir = out.join(scheme.to_string());
            write_to_dir(&spec, &dir, workers)
        }
        Cmd::Selftest => selftest(),
    }
}

fn check_scale(scale: f64) -> Result<(), Failure> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Failure::Config(format!("scale must be positive, got {scale}")))
    }
}

fn write_to_dir(spec: &ExperimentSpec, dir: &std::path::Path, workers: Option<usize>) -> Result<(), Failure> {
    spec.validate()?;
    let path = dir.join(format!("{}.csv", spec.kind.file_stem()));
    let opts = RunOptions {
        workers,
        checkpoint: Some(path.clone()),
        progress: true,
    };
    let rows = harness::run_with(spec, &opts)?;
    std::fs::write(dir.join(format!("{}.toml", spec.kind.file_stem())), spec.to_toml()?)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    eprintln!("{} rows -> {}", rows.len(), path.display());
    Ok(())
}

fn check(name: &str, ok: bool) -> Result<(), Failure> {
    println!("{} {name}", if ok { "ok  " } else { "FAIL" });
    if ok {
        Ok(())
    } else {
        Err(Failure::Invariant(name.to_string()))
    }
}

fn selftest() -> Result<(), Failure> {
    let mut rng = rng_stream(7, 0);

    let x: Vec<Complex64> = (0..256).map(|_| rng.complex_gaussian()).collect();
    let back = ifft_vec(&fft_vec(&x));
    let err = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    check("dft round trip", err < 1e-12)?;

    check("q(0) = 1/2", (q_function(0.0) - 0.5).abs() < 1e-15)?;
    check(
        "16-QAM SER decreasing",
        theoretical_mqam_ser(10.0, 16) > theoretical_mqam_ser(20.0, 16),
    )?;

    for scheme in Scheme::ALL {
        for mode in [CpMode::Cyclic, CpMode::ZeroPadded] {
            let mut cfg = WaveformConfig::new(scheme, 128, 4, 1e6);
            cfg.cp_mode = mode;
            let plan = PilotPlan::default_for(&cfg);
            let data: Vec<u32> = (0..cfg.payload_len()).map(|_| rng.below(cfg.order)).collect();
            let tx = modulate(&cfg, &data, &plan)?;
            let est = modem_core::estimation::ChannelEstimate::ones(&cfg)?;
            let out = demodulate(&cfg, &tx.baseband, &est)?;
            check(&format!("{scheme} {mode:?} loopback"), out.symbols == data)?;

            let ch = if scheme.equalizes_in_time() {
                ChannelRealization::new(vec![
                    Tap { gain: Complex64::new(0.8, 0.1), doppler: 2.0 * cfg.bin_spacing(), delay: 0.0 },
                    Tap { gain: Complex64::new(-0.2, 0.4), doppler: -cfg.bin_spacing(), delay: 0.0 },
                ])?
            } else {
                let t = cfg.sample_period();
                ChannelRealization::new(vec![
                    Tap { gain: Complex64::new(0.8, 0.1), doppler: 0.0, delay: 0.0 },
                    Tap { gain: Complex64::new(-0.2, 0.4), doppler: 0.0, delay: 3.0 * t },
                ])?
            };
            let rx = apply_channel(&ch, &tx.baseband, 0.0)?;
            let est = estimate_perfect(&cfg, &ch, 0.0)?;
            let out = demodulate(&cfg, &rx, &est)?;
            check(&format!("{scheme} {mode:?} perfect equalization"), out.symbols == data)?;
        }
    }

    let mut spec = harness::delay_sweep(1e-5, 3);
    spec.realizations = 4;
    spec.grid.n = vec![128];
    spec.grid.delay_ns = vec![50.0];
    let one = harness::run_with(&spec, &RunOptions { workers: Some(1), ..Default::default() })?;
    let many = harness::run_with(&spec, &RunOptions { workers: Some(4), ..Default::default() })?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    harness::write_csv(&mut a, &one)?;
    harness::write_csv(&mut b, &many)?;
    check("worker count does not change results", a == b)?;
    Ok(())
}
