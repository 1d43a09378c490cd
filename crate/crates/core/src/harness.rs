//! Monte-Carlo experiment runner.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    apply_channel_with, build_channel, ChannelModelSpec, ChannelOptions, ChannelRealization,
    DelayMode, DelayProfile, DopplerConvention, EdgePolicy, TDL_A,
};
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_from_preamble, estimate_inband_with, estimate_perfect_with, ChannelEstimate,
    InbandOptions,
};
use crate::metrics::{
    count_symbol_errors, evm_with, papr, EvmNormalization, MetricAccumulator, Observation,
};
use crate::numerics::{energy, RngStream};
use crate::qam::QamConstellation;
use crate::waveforms::{
    demodulate_with, modulate, pilot_block, CpMode, CpRule, Oversample, PilotPlan, Scheme,
    WaveformConfig,
};

/// Realizations per grid point at scale 1.
pub const FULL_REALIZATIONS: f64 = 100_000.0;
/// Default `--scale`.
pub const DEFAULT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    AwgnSer,
    DopplerSweep,
    DelaySweep,
    RateSweep,
    BlocklenSweep,
}

impl ExperimentKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            ExperimentKind::AwgnSer => "awgn_ser",
            ExperimentKind::DopplerSweep => "doppler_sweep",
            ExperimentKind::DelaySweep => "delay_sweep",
            ExperimentKind::RateSweep => "rate_sweep",
            ExperimentKind::BlocklenSweep => "blocklen_sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    #[default]
    Perfect,
    Inband,
}

fn default_order() -> u32 {
    16
}

fn default_rolloff() -> f64 {
    0.1
}

fn default_pilot_power() -> f64 {
    1.0
}

/// Waveform settings shared by every scheme; `n` and the sample rate come
/// from the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformTemplate {
    /// Fixed guard length; derived from the channel when absent.
    #[serde(default)]
    pub cp_len: Option<usize>,
    #[serde(default)]
    pub cp_rule: CpRule,
    #[serde(default)]
    pub cp_mode: CpMode,
    /// Pilot entries per block; a per-scheme default when absent.
    #[serde(default)]
    pub pilot_budget: Option<usize>,
    #[serde(default = "default_pilot_power")]
    pub pilot_power: f64,
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default = "default_rolloff")]
    pub rolloff: f64,
    #[serde(default)]
    pub oversample: Oversample,
}

impl Default for WaveformTemplate {
    fn default() -> Self {
        Self {
            cp_len: None,
            cp_rule: CpRule::default(),
            cp_mode: CpMode::default(),
            pilot_budget: None,
            pilot_power: default_pilot_power(),
            order: default_order(),
            rolloff: default_rolloff(),
            oversample: Oversample::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSettings {
    /// `delay_ns power_db` list replacing TDL-A.
    #[serde(default)]
    pub tap_file: Option<PathBuf>,
    #[serde(default)]
    pub convention: DopplerConvention,
    #[serde(default)]
    pub delay_mode: DelayMode,
    #[serde(default)]
    pub edge: EdgePolicy,
}

fn default_snr() -> Vec<f64> {
    vec![f64::INFINITY]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: Vec<usize>,
    pub sample_rate_hz: Vec<f64>,
    pub doppler_hz: Vec<f64>,
    pub delay_ns: Vec<f64>,
    #[serde(default = "default_snr")]
    pub snr_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub schemes: Vec<Scheme>,
    pub realizations: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub estimator: EstimatorMode,
    #[serde(default)]
    pub evm_normalization: EvmNormalization,
    #[serde(default)]
    pub waveform: WaveformTemplate,
    #[serde(default)]
    pub channel: ChannelSettings,
    pub grid: Grid,
    /// Where `modem run` writes its CSV; stdout when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// One operating point of the channel/waveform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub sample_rate: f64,
    pub doppler: f64,
    pub delay_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub n: usize,
    pub fs_hz: f64,
    pub doppler_hz: f64,
    pub delay_ns: f64,
    pub snr_db: f64,
    pub realizations: u64,
    pub evm_mean: f64,
    pub ser: f64,
    pub ser_floor: f64,
    pub papr_p99_db: f64,
    pub clamp_count: u64,
    pub seed: u64,
    #[serde(skip)]
    pub wall_clock_s: f64,
}

impl ResultRow {
    fn sort_key(&self) -> impl Ord {
        (
            self.scheme,
            self.n,
            OrdF64(self.fs_hz),
            OrdF64(self.doppler_hz),
            OrdF64(self.delay_ns),
            OrdF64(self.snr_db),
        )
    }

    fn point_key(&self) -> PointKey {
        PointKey::new(
            &GridPoint {
                n: self.n,
                sample_rate: self.fs_hz,
                doppler: self.doppler_hz,
                delay_ns: self.delay_ns,
            },
            self.realizations,
            self.seed,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct PointKey(usize, u64, u64, u64, u64, u64);

impl PointKey {
    fn new(p: &GridPoint, realizations: u64, seed: u64) -> Self {
        PointKey(
            p.n,
            p.sample_rate.to_bits(),
            p.doppler.to_bits(),
            p.delay_ns.to_bits(),
            realizations,
            seed,
        )
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let g = &self.grid;
        let mut out = Vec::new();
        for &n in &g.n {
            for &sample_rate in &g.sample_rate_hz {
                for &doppler in &g.doppler_hz {
                    for &delay_ns in &g.delay_ns {
                        out.push(GridPoint {
                            n,
                            sample_rate,
                            doppler,
                            delay_ns,
                        });
                    }
                }
            }
        }
        out
    }

    fn profile(&self) -> Result<DelayProfile> {
        match &self.channel.tap_file {
            None => Ok(DelayProfile::TdlA),
            Some(p) => DelayProfile::load_tap_list(p).map_err(|e| Error::Config(e.to_string())),
        }
    }

    pub fn channel_spec(&self, p: &GridPoint) -> Result<ChannelModelSpec> {
        Ok(ChannelModelSpec {
            delay_spread: p.delay_ns * 1e-9,
            doppler_spread: p.doppler,
            profile: self.profile()?,
            convention: self.channel.convention,
        })
    }

    pub fn channel_options(&self, cfg: &WaveformConfig) -> ChannelOptions {
        ChannelOptions {
            delay_mode: self.channel.delay_mode,
            edge: self.channel.edge,
            delay_grid: Some(cfg.sample_period()),
        }
    }

    /// Waveform for one scheme at one grid point.
    pub fn waveform(&self, scheme: Scheme, p: &GridPoint) -> WaveformConfig {
        let t = &self.waveform;
        let mut cfg = match t.cp_len {
            Some(l) => WaveformConfig::new(scheme, p.n, l, p.sample_rate),
            None => WaveformConfig::for_channel(
                scheme,
                p.n,
                p.sample_rate,
                p.delay_ns * 1e-9,
                p.doppler,
                t.cp_rule,
            ),
        };
        cfg.cp_mode = t.cp_mode;
        cfg.order = t.order;
        cfg.rolloff = t.rolloff;
        cfg.oversample = t.oversample;
        cfg.pilot_power = t.pilot_power;
        cfg.pilot_budget = match (self.estimator, scheme) {
            (EstimatorMode::Perfect, _) | (_, Scheme::ScFde) => 0,
            (EstimatorMode::Inband, Scheme::FdmFdcp) => {
                t.pilot_budget.unwrap_or(4 * cfg.cp_len + 1)
            }
            (EstimatorMode::Inband, _) => t.pilot_budget.unwrap_or(cfg.n / 16),
        };
        cfg
    }

    /// Checks everything that can be checked before simulating.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.realizations == 0 {
            return bad("realizations must be at least 1");
        }
        if self.schemes.is_empty() {
            return bad("no schemes selected");
        }
        let g = &self.grid;
        if g.n.is_empty()
            || g.sample_rate_hz.is_empty()
            || g.doppler_hz.is_empty()
            || g.delay_ns.is_empty()
            || g.snr_db.is_empty()
        {
            return bad("every grid axis needs at least one value");
        }
        if g.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return bad("SNR values must be numbers or +inf");
        }
        let profile = self.profile()?;
        let max_norm_delay = match &profile {
            DelayProfile::TdlA => TDL_A.iter().map(|t| t.0).fold(0.0, f64::max),
            DelayProfile::Custom(_) => 0.0,
        };
        for p in self.points() {
            let ch = self.channel_spec(&p)?;
            ch.validate().map_err(|e| Error::Config(e.to_string()))?;
            for &scheme in &self.schemes {
                let cfg = self.waveform(scheme, &p);
                cfg.validate().map_err(|e| {
                    Error::Config(format!("{scheme} at N={} fs={}: {e}", p.n, p.sample_rate))
                })?;
                PilotPlan::default_for(&cfg).validate(&cfg)?;
                let longest = match &profile {
                    DelayProfile::TdlA => max_norm_delay * p.delay_ns * 1e-9,
                    DelayProfile::Custom(taps) => {
                        taps.iter().map(|t| t.0).fold(0.0, f64::max) * 1e-9
                    }
                };
                if longest >= cfg.block_duration() {
                    return Err(Error::Config(format!(
                        "delay {longest:e} s exceeds the {} s block at N={} fs={}",
                        cfg.block_duration(),
                        p.n,
                        p.sample_rate
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; rayon's default when absent.
    pub workers: Option<usize>,
    /// CSV updated after every grid point and reused on restart.
    pub checkpoint: Option<PathBuf>,
    pub progress: bool,
}

pub fn run(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    run_with(spec, &RunOptions::default())
}

pub fn run_with(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut rows = match &opts.checkpoint {
        Some(path) if path.exists() => read_csv(path)?,
        _ => Vec::new(),
    };
    let done: BTreeSet<PointKey> = rows.iter().map(|r| r.point_key()).collect();
    let expected_per_point = spec.schemes.len() * spec.grid.snr_db.len();

    let points = spec.points();
    for (idx, p) in points.iter().enumerate() {
        let key = PointKey::new(p, spec.realizations as u64, spec.master_seed);
        if done.contains(&key)
            && rows.iter().filter(|r| r.point_key() == key).count() == expected_per_point
        {
            continue;
        }
        rows.retain(|r| r.point_key() != key);
        let start = Instant::now();
        let fresh = pool.install(|| run_point(spec, p))?;
        let elapsed = start.elapsed().as_secs_f64();
        let fresh: Vec<ResultRow> = fresh
            .into_iter()
            .map(|mut r| {
                r.wall_clock_s = elapsed;
                r
            })
            .collect();
        if let Some(path) = &opts.checkpoint {
            append_csv(path, &fresh)?;
        }
        if opts.progress {
            eprintln!(
                "[{}/{}] N={} fs={} fD={} tau={}ns: {:.1}s",
                idx + 1,
                points.len(),
                p.n,
                p.sample_rate,
                p.doppler,
                p.delay_ns,
                elapsed
            );
        }
        rows.extend(fresh);
    }
    let keys: BTreeSet<PointKey> = points
        .iter()
        .map(|p| PointKey::new(p, spec.realizations as u64, spec.master_seed))
        .collect();
    rows.retain(|r| keys.contains(&r.point_key()) && spec.schemes.contains(&r.scheme));
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    if let Some(path) = &opts.checkpoint {
        write_csv_path(path, &rows)?;
    }
    Ok(rows)
}

const LANE_CHANNEL: u64 = 0;
const LANE_DATA: u64 = 1;
const LANE_NOISE: u64 = 2;
const LANE_PILOT_NOISE: u64 = 3;

fn lane(scheme: Scheme, purpose: u64) -> u64 {
    let s = Scheme::ALL.iter().position(|&x| x == scheme).unwrap() as u64;
    1 + 16 * s + purpose
}

/// Raw outcomes at one grid point, indexed `[realization][scheme][snr]`.
pub fn observations(spec: &ExperimentSpec, p: &GridPoint) -> Result<Vec<Vec<Vec<Observation>>>> {
    let ch_spec = spec.channel_spec(p)?;
    let snrs = &spec.grid.snr_db;
    (0..spec.realizations as u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::substream(spec.master_seed, i, LANE_CHANNEL);
            let channel = build_channel(&ch_spec, &mut stream)?;
            spec.schemes
                .iter()
                .map(|&s| realization(spec, &spec.waveform(s, p), &channel, i, snrs))
                .collect()
        })
        .collect()
}

fn run_point(spec: &ExperimentSpec, p: &GridPoint) -> Result<Vec<ResultRow>> {
    let snrs = &spec.grid.snr_db;
    let per_realization = observations(spec, p)?;
    let mut rows = Vec::new();
    for (si, &scheme) in spec.schemes.iter().enumerate() {
        let order = spec.waveform(scheme, p).order;
        for (ki, &snr) in snrs.iter().enumerate() {
            let mut acc = MetricAccumulator::default();
            for r in &per_realization {
                acc.push(r[si][ki], order);
            }
            rows.push(ResultRow {
                scheme,
                n: p.n,
                fs_hz: p.sample_rate,
                doppler_hz: p.doppler,
                delay_ns: p.delay_ns,
                snr_db: snr,
                realizations: acc.realizations,
                evm_mean: acc.evm_mean(),
                ser: acc.ser(),
                ser_floor: acc.ser_floor(),
                papr_p99_db: acc.papr_percentile(99.0),
                clamp_count: acc.clamped,
                seed: spec.master_seed,
                wall_clock_s: 0.0,
            });
        }
    }
    Ok(rows)
}

fn noise_variance(rx: &[Complex64], n: usize, snr_db: f64) -> f64 {
    energy(rx) / n as f64 / 10f64.powf(snr_db / 10.0)
}

fn with_noise(rx: &[Complex64], unit: &[Complex64], variance: f64) -> Vec<Complex64> {
    let s = variance.sqrt();
    rx.iter().zip(unit).map(|(a, w)| a + w * s).collect()
}

fn unit_noise(len: usize, stream: &mut RngStream) -> Vec<Complex64> {
    (0..len).map(|_| stream.complex_gaussian()).collect()
}

/// One channel realization of one scheme, evaluated at every SNR.
fn realization(
    spec: &ExperimentSpec,
    cfg: &WaveformConfig,
    channel: &ChannelRealization,
    index: u64,
    snrs: &[f64],
) -> Result<Vec<Observation>> {
    let seed = spec.master_seed;
    let scheme = cfg.scheme;
    let plan = PilotPlan::default_for(cfg);
    let opts = spec.channel_options(cfg);
    let qam = QamConstellation::new(cfg.order)?;

    let mut data_stream = RngStream::substream(seed, index, lane(scheme, LANE_DATA));
    let data: Vec<u32> = (0..cfg.payload_len())
        .map(|_| data_stream.below(cfg.order))
        .collect();
    let reference = qam.map(&data)?;
    let tx = modulate(cfg, &data, &plan)?;
    let papr_db = papr(tx.baseband.samples())?;
    let rx = apply_channel_with(channel, &tx.baseband, 0.0, opts)?;
    let mut noise_stream = RngStream::substream(seed, index, lane(scheme, LANE_NOISE));
    let noise = unit_noise(rx.len(), &mut noise_stream);

    let perfect = match spec.estimator {
        EstimatorMode::Perfect => Some(estimate_perfect_with(cfg, channel, 0.0, opts)?),
        EstimatorMode::Inband => None,
    };
    let preamble = match (&perfect, &plan) {
        (None, PilotPlan::None | PilotPlan::Preamble) => {
            let t_pre = -(cfg.ext_len() as f64) * cfg.tx_spacing();
            let pb = pilot_block(cfg, &plan)?;
            let prx = apply_channel_with(channel, &pb, t_pre, opts)?;
            let mut s = RngStream::substream(seed, index, lane(scheme, LANE_PILOT_NOISE));
            Some((prx, unit_noise(pb.len(), &mut s), t_pre))
        }
        _ => None,
    };

    snrs.iter()
        .map(|&snr| {
            let noisy = if snr.is_infinite() {
                rx.clone()
            } else {
                let v = noise_variance(rx.samples(), cfg.n, snr);
                rx.with_samples(with_noise(rx.samples(), &noise, v))?
            };
            let est: ChannelEstimate = match (&perfect, &preamble) {
                (Some(e), _) => e.clone(),
                (None, Some((prx, w, t_pre))) => {
                    let p = if snr.is_infinite() {
                        prx.clone()
                    } else {
                        let v = noise_variance(prx.samples(), cfg.n, snr);
                        prx.with_samples(with_noise(prx.samples(), w, v))?
                    };
                    estimate_from_preamble(cfg, &p, *t_pre)?
                }
                (None, None) => estimate_inband_with(
                    cfg,
                    &plan,
                    &noisy,
                    0.0,
                    InbandOptions {
                        leakage_threshold_db: None,
                    },
                )?,
            };
            let out = demodulate_with(cfg, &plan, &noisy, &est)?;
            Ok(Observation {
                evm: evm_with(&reference, &out.soft, spec.evm_normalization)?,
                papr_db,
                n_symbols: data.len() as u64,
                n_errors: count_symbol_errors(&data, &out.symbols) as u64,
                clamped: out.clamped as u64,
            })
        })
        .collect()
}

pub fn write_csv<W: std::io::Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    if rows.is_empty() {
        out.write_record(CSV_HEADER)?;
    }
    out.flush()?;
    Ok(())
}

pub const CSV_HEADER: [&str; 13] = [
    "scheme",
    "N",
    "fs_hz",
    "doppler_hz",
    "delay_ns",
    "snr_db",
    "realizations",
    "evm_mean",
    "ser",
    "ser_floor",
    "papr_p99_db",
    "clamp_count",
    "seed",
];

pub fn write_csv_path(path: &Path, rows: &[ResultRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("csv.tmp");
    write_csv(File::create(&tmp)?, rows)?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

fn append_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    if fresh {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
    }
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_path(path)?;
    rd.deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

fn scaled_realizations(scale: f64) -> usize {
    ((FULL_REALIZATIONS * scale).round() as usize).max(1)
}

fn sweep(
    kind: ExperimentKind,
    grid: Grid,
    scale: f64,
    seed: u64,
) -> ExperimentSpec {
    ExperimentSpec {
        kind,
        schemes: Scheme::ALL.to_vec(),
        realizations: scaled_realizations(scale),
        master_seed: seed,
        estimator: EstimatorMode::Perfect,
        evm_normalization: EvmNormalization::Received,
        waveform: WaveformTemplate::default(),
        channel: ChannelSettings::default(),
        grid,
        output: None,
    }
}

/// Doppler spreads 50 Hz to 5 kHz at N = 1024, 4.5 MHz, 50 ns.
pub fn doppler_sweep(scale: f64, seed: u64) -> ExperimentSpec {
    let grid = Grid {
        n: vec![1024],
        sample_rate_hz: vec![4.5e6],
        doppler_hz: vec![
            50.0, 100.0, 200.0, 300.0, 500.0, 700.0, 1000.0, 2000.0, 3000.0, 5000.0,
        ],
        delay_ns: vec![50.0],
        snr_db: default_snr(),
    };
    sweep(ExperimentKind::DopplerSweep, grid, scale, seed)
}

/// Delay spreads 10 ns to 1 us at N = 1024, 4.5 MHz, 500 Hz.
pub fn delay_sweep(scale: f64, seed: u64) -> ExperimentSpec {
    let grid = Grid {
        n: vec![1024],
        sample_rate_hz: vec![4.5e6],
        doppler_hz: vec![500.0],
        delay_ns: vec![10.0, 20.0, 50.0, 100.0, 200.0, 300.0, 500.0, 700.0, 1000.0],
        snr_db: default_snr(),
    };
    sweep(ExperimentKind::DelaySweep, grid, scale, seed)
}

/// Sample rates 450 kHz to 45 MHz (five per decade) at N = 1024, 100 ns,
/// 500 Hz.
pub fn rate_sweep(scale: f64, seed: u64) -> ExperimentSpec {
    let rates = (0..=10)
        .map(|k| {
            let r = 450e3 * 10f64.powf(k as f64 / 5.0);
            (r / 1e3).round() * 1e3
        })
        .collect();
    let grid = Grid {
        n: vec![1024],
        sample_rate_hz: rates,
        doppler_hz: vec![500.0],
        delay_ns: vec![100.0],
        snr_db: default_snr(),
    };
    sweep(ExperimentKind::RateSweep, grid, scale, seed)
}

/// Block lengths 64 to 8192 at 4.5 MHz, 50 ns, 500 Hz.
pub fn blocklen_sweep(scale: f64, seed: u64) -> ExperimentSpec {
    let grid = Grid {
        n: (6..=13).map(|k| 1usize << k).collect(),
        sample_rate_hz: vec![4.5e6],
        doppler_hz: vec![500.0],
        delay_ns: vec![50.0],
        snr_db: default_snr(),
    };
    sweep(ExperimentKind::BlocklenSweep, grid, scale, seed)
}

/// SER against SNR at N = 2048, 1.92 MHz, 50 ns for several Doppler spreads.
pub fn awgn_ser_curve(schemes: Vec<Scheme>, scale: f64, seed: u64) -> ExperimentSpec {
    let grid = Grid {
        n: vec![2048],
        sample_rate_hz: vec![1.92e6],
        doppler_hz: vec![10.0, 50.0, 100.0, 200.0, 500.0, 1000.0],
        delay_ns: vec![50.0],
        snr_db: (0..=15).map(|k| 2.0 * k as f64).collect(),
    };
    let mut spec = sweep(ExperimentKind::AwgnSer, grid, scale, seed);
    spec.schemes = schemes;
    spec
}

pub fn preset(kind: ExperimentKind, scale: f64, seed: u64) -> ExperimentSpec {
    match kind {
        ExperimentKind::DopplerSweep => doppler_sweep(scale, seed),
        ExperimentKind::DelaySweep => delay_sweep(scale, seed),
        ExperimentKind::RateSweep => rate_sweep(scale, seed),
        ExperimentKind::BlocklenSweep => blocklen_sweep(scale, seed),
        ExperimentKind::AwgnSer => awgn_ser_curve(Scheme::ALL.to_vec(), scale, seed),
    }
}
