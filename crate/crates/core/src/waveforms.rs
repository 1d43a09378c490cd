//! The four modulation/detection chains.
//!
//! Every scheme works on an `N`-point block. The time-equalized schemes
//! (FDM-FDCP, SC-TDE) reserve `L` guard bins on each side of the spectrum and
//! equalize on an `M = N - 2L` point time grid; the frequency-equalized
//! baselines (OFDM-FDE, SC-FDE) reserve `L` guard samples in time and
//! equalize on a `K = N - L` point frequency grid.
//!
//! Pulse shaping extends the block to `ceil(N * up / down)` samples with a
//! root-raised-cosine weight applied across the extension: in time for the
//! time-equalized family, in frequency for the baselines. Because the squared
//! weights tile to one, the receiver's matched weighting and alias fold undo
//! the shaping exactly.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{equalize_values, ChannelEstimate};
use crate::numerics::{
    fft_unitary, fftshift, ifft_unitary, ifftshift, rrc_unchecked, ComplexSequence, Domain,
};
use crate::qam::QamConstellation;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "FDM-FDCP")]
    FdmFdcp,
    #[serde(rename = "SC-TDE")]
    ScTde,
    #[serde(rename = "OFDM-FDE")]
    OfdmFde,
    #[serde(rename = "SC-FDE")]
    ScFde,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::FdmFdcp, Scheme::ScTde, Scheme::OfdmFde, Scheme::ScFde];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::FdmFdcp => "FDM-FDCP",
            Scheme::ScTde => "SC-TDE",
            Scheme::OfdmFde => "OFDM-FDE",
            Scheme::ScFde => "SC-FDE",
        }
    }

    pub fn equalizes_in_time(self) -> bool {
        matches!(self, Scheme::FdmFdcp | Scheme::ScTde)
    }

    /// Domain the QAM symbols are placed in.
    pub fn data_domain(self) -> Domain {
        match self {
            Scheme::FdmFdcp | Scheme::OfdmFde => Domain::Frequency,
            Scheme::ScTde | Scheme::ScFde => Domain::Time,
        }
    }

    /// Domain the one-tap equalizer runs in.
    pub fn equalization_domain(self) -> Domain {
        if self.equalizes_in_time() {
            Domain::Time
        } else {
            Domain::Frequency
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "fdmfdcp" | "fdm" => Ok(Scheme::FdmFdcp),
            "sctde" => Ok(Scheme::ScTde),
            "ofdmfde" | "ofdm" => Ok(Scheme::OfdmFde),
            "scfde" => Ok(Scheme::ScFde),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpMode {
    #[default]
    Cyclic,
    ZeroPadded,
}

/// Rational oversampling ratio `up / down`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Oversample {
    pub up: usize,
    pub down: usize,
}

impl Default for Oversample {
    fn default() -> Self {
        Self { up: 5, down: 4 }
    }
}

impl Oversample {
    pub fn ratio(&self) -> f64 {
        self.up as f64 / self.down as f64
    }
}

/// Whether the guard-length floor of 8 is a lower or an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpRule {
    #[default]
    Max,
    Min,
}

impl CpRule {
    fn apply(self, required: usize) -> usize {
        match self {
            CpRule::Max => required.max(8),
            CpRule::Min => required.min(8),
        }
    }
}

/// Time-domain prefix covering five delay spreads.
pub fn time_cp_len(delay_spread: f64, sample_rate: f64, rule: CpRule) -> usize {
    rule.apply((5.0 * delay_spread * sample_rate - 1e-9).ceil().max(0.0) as usize)
}

/// Per-side frequency guard covering twice the Doppler spread in bins.
pub fn frequency_cp_len(n: usize, sample_rate: f64, doppler_spread: f64, rule: CpRule) -> usize {
    rule.apply((2.0 * n as f64 * doppler_spread / sample_rate - 1e-9).ceil().max(0.0) as usize)
}

fn default_rolloff() -> f64 {
    0.1
}

fn default_order() -> u32 {
    16
}

fn default_pilot_power() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    pub scheme: Scheme,
    /// Block length including guards.
    pub n: usize,
    /// Guard length; per side for the time-equalized schemes.
    pub cp_len: usize,
    #[serde(default)]
    pub pilot_budget: usize,
    pub sample_rate: f64,
    #[serde(default = "default_rolloff")]
    pub rolloff: f64,
    #[serde(default)]
    pub cp_mode: CpMode,
    #[serde(default)]
    pub oversample: Oversample,
    #[serde(default = "default_order")]
    pub order: u32,
    /// Per-pilot power relative to a data symbol.
    #[serde(default = "default_pilot_power")]
    pub pilot_power: f64,
}

impl WaveformConfig {
    pub fn new(scheme: Scheme, n: usize, cp_len: usize, sample_rate: f64) -> Self {
        Self {
            scheme,
            n,
            cp_len,
            pilot_budget: 0,
            sample_rate,
            rolloff: default_rolloff(),
            cp_mode: CpMode::default(),
            oversample: Oversample::default(),
            order: default_order(),
            pilot_power: default_pilot_power(),
        }
    }

    /// Config whose guard follows the default length rule for the channel.
    pub fn for_channel(
        scheme: Scheme,
        n: usize,
        sample_rate: f64,
        delay_spread: f64,
        doppler_spread: f64,
        rule: CpRule,
    ) -> Self {
        let cp = if scheme.equalizes_in_time() {
            frequency_cp_len(n, sample_rate, doppler_spread, rule)
        } else {
            time_cp_len(delay_spread, sample_rate, rule)
        };
        Self::new(scheme, n, cp, sample_rate)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 {
            return bad("block length must be positive".into());
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return bad(format!("sample rate must be positive, got {}", self.sample_rate));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return bad(format!("rolloff must lie in [0, 1], got {}", self.rolloff));
        }
        if self.oversample.up == 0 || self.oversample.down == 0 {
            return bad("oversampling ratio must be positive".into());
        }
        if (self.ext_len() as f64) < (1.0 + self.rolloff) * self.n as f64 {
            return bad(format!(
                "oversampling {}/{} too small for rolloff {}",
                self.oversample.up, self.oversample.down, self.rolloff
            ));
        }
        QamConstellation::new(self.order).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.pilot_power > 0.0 && self.pilot_power.is_finite()) {
            return bad(format!("pilot power must be positive, got {}", self.pilot_power));
        }
        if self.guard_total() + self.pilot_budget >= self.n {
            return bad(format!(
                "guards ({}) and pilots ({}) leave no payload in a block of {}",
                self.guard_total(),
                self.pilot_budget,
                self.n
            ));
        }
        if self.scheme == Scheme::FdmFdcp && self.pilot_budget > 0 && self.pilot_budget % 2 == 0 {
            return bad("FDM-FDCP pilot budget must be odd (tone plus symmetric guard)".into());
        }
        if self.scheme == Scheme::ScFde && self.pilot_budget > 0 {
            return bad("SC-FDE uses a preamble block; pilot budget must be 0".into());
        }
        Ok(())
    }

    /// `L` for the baselines, `2L` for the time-equalized schemes.
    pub fn guard_total(&self) -> usize {
        if self.scheme.equalizes_in_time() {
            2 * self.cp_len
        } else {
            self.cp_len
        }
    }

    /// Length of the equalization grid.
    pub fn grid_len(&self) -> usize {
        self.n - self.guard_total()
    }

    pub fn payload_len(&self) -> usize {
        self.grid_len() - self.pilot_budget
    }

    /// Number of transmitted samples per block.
    pub fn ext_len(&self) -> usize {
        (self.n * self.oversample.up).div_ceil(self.oversample.down)
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn bin_spacing(&self) -> f64 {
        self.sample_rate / self.n as f64
    }

    pub fn block_duration(&self) -> f64 {
        self.n as f64 / self.sample_rate
    }

    /// Spacing of the transmitted samples.
    pub fn tx_spacing(&self) -> f64 {
        if self.scheme.equalizes_in_time() {
            self.sample_period()
        } else {
            self.block_duration() / self.ext_len() as f64
        }
    }

    /// Samples transmitted ahead of the first block sample.
    pub fn leading_samples(&self) -> usize {
        if self.scheme.equalizes_in_time() {
            self.ext_len() / 2 - self.n / 2
        } else {
            0
        }
    }

    /// Spacing of the equalization grid.
    pub fn grid_spacing(&self) -> f64 {
        if self.scheme.equalizes_in_time() {
            self.block_duration() / self.grid_len() as f64
        } else {
            self.sample_rate / self.grid_len() as f64
        }
    }

    fn cp_energy_factor(&self) -> f64 {
        match self.cp_mode {
            CpMode::ZeroPadded => 1.0,
            CpMode::Cyclic => self.n as f64 / self.grid_len() as f64,
        }
    }

    /// Expected energy of one grid before scaling.
    fn nominal_energy(&self, plan: &PilotPlan) -> f64 {
        let pilots: f64 = plan.layout(self).iter().map(|(_, v)| v.norm_sqr()).sum();
        (self.payload_len() as f64 + pilots) * self.cp_energy_factor()
    }

    /// Fixed transmit gain that gives unit expected output power.
    pub fn tx_scale(&self, plan: &PilotPlan) -> f64 {
        (self.ext_len() as f64 / self.nominal_energy(plan)).sqrt()
    }
}

/// Where pilots sit on the data grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PilotPlan {
    None,
    /// Single tone at the centre bin with `half_width` empty bins each side.
    Tone { half_width: usize },
    /// Unit pilots at the listed grid positions.
    Comb { positions: Vec<usize> },
    /// Pilots travel in a separate block.
    Preamble,
}

impl PilotPlan {
    pub fn default_for(cfg: &WaveformConfig) -> Self {
        let p = cfg.pilot_budget;
        match cfg.scheme {
            Scheme::ScFde => PilotPlan::Preamble,
            _ if p == 0 => PilotPlan::None,
            Scheme::FdmFdcp => PilotPlan::Tone {
                half_width: (p - 1) / 2,
            },
            Scheme::ScTde | Scheme::OfdmFde => {
                let g = cfg.grid_len();
                PilotPlan::Comb {
                    positions: (0..p).map(|i| i * g / p).collect(),
                }
            }
        }
    }

    pub fn count(&self) -> usize {
        match self {
            PilotPlan::None | PilotPlan::Preamble => 0,
            PilotPlan::Tone { half_width } => 2 * half_width + 1,
            PilotPlan::Comb { positions } => positions.len(),
        }
    }

    pub fn validate(&self, cfg: &WaveformConfig) -> Result<()> {
        if self.count() != cfg.pilot_budget {
            return Err(Error::Config(format!(
                "pilot plan uses {} grid entries, budget is {}",
                self.count(),
                cfg.pilot_budget
            )));
        }
        let g = cfg.grid_len();
        match self {
            PilotPlan::Tone { .. } if cfg.scheme != Scheme::FdmFdcp => {
                Err(Error::Config("tone pilots require FDM-FDCP".into()))
            }
            PilotPlan::Tone { half_width } if 2 * half_width + 1 > g => {
                Err(Error::Config("pilot tone guard exceeds the grid".into()))
            }
            PilotPlan::Comb { positions } => {
                if positions.windows(2).any(|w| w[0] >= w[1]) || positions.iter().any(|&p| p >= g) {
                    return Err(Error::Config(
                        "comb positions must be strictly increasing and inside the grid".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Grid positions and values of every reserved entry.
    pub fn layout(&self, cfg: &WaveformConfig) -> Vec<(usize, Complex64)> {
        let amp = cfg.pilot_power.sqrt();
        match self {
            PilotPlan::None | PilotPlan::Preamble => Vec::new(),
            PilotPlan::Tone { half_width } => {
                let c = cfg.grid_len() / 2;
                let tone = amp * (self.count() as f64).sqrt();
                (c - half_width..=c + half_width)
                    .map(|i| (i, if i == c { Complex64::new(tone, 0.0) } else { ZERO }))
                    .collect()
            }
            PilotPlan::Comb { positions } => positions
                .iter()
                .map(|&i| (i, Complex64::new(amp, 0.0)))
                .collect(),
        }
    }

    /// Grid positions carrying data.
    pub fn data_positions(&self, cfg: &WaveformConfig) -> Vec<usize> {
        let mut used = vec![false; cfg.grid_len()];
        for (i, _) in self.layout(cfg) {
            used[i] = true;
        }
        (0..cfg.grid_len()).filter(|&i| !used[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TxBlock {
    pub data_symbols: Vec<u32>,
    pub baseband: ComplexSequence,
    pub pilot_layout: Vec<(usize, Complex64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    pub symbols: Vec<u32>,
    pub soft: Vec<Complex64>,
    pub clamped: usize,
}

pub fn insert_fdcp(r: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    insert_prefix(r, l)
}

pub fn remove_fdcp(y: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    remove_prefix(y, l)
}

pub fn insert_tdcp(x: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    insert_prefix(x, l)
}

pub fn remove_tdcp(y: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    remove_prefix(y, l)
}

fn insert_prefix(r: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    if r.is_empty() {
        return Err(Error::EmptyInput);
    }
    if l >= r.len() {
        return Err(Error::InvalidParameter(format!(
            "prefix length {l} must be shorter than the block ({})",
            r.len()
        )));
    }
    let mut out = Vec::with_capacity(r.len() + l);
    out.extend_from_slice(&r[r.len() - l..]);
    out.extend_from_slice(r);
    Ok(out)
}

fn remove_prefix(y: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    if l >= y.len() {
        return Err(Error::InvalidParameter(format!(
            "prefix length {l} must be shorter than the block ({})",
            y.len()
        )));
    }
    Ok(y[l..].to_vec())
}

/// Surrounds `x` with `l` zeros on each side.
pub fn zero_pad_unfold(x: &[Complex64], l: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; x.len() + 2 * l];
    out[l..l + x.len()].copy_from_slice(x);
    out
}

/// Folds the two `l`-wide guards of `y` back onto the opposite band edges.
pub fn zero_pad_fold(y: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    if y.len() <= 2 * l {
        return Err(Error::InvalidParameter(format!(
            "block of {} cannot carry two guards of {l}",
            y.len()
        )));
    }
    let m = y.len() - 2 * l;
    let mut out = y[l..l + m].to_vec();
    for k in 0..l {
        out[k] += y[l + m + k];
        out[(m - l + k) % m] += y[k];
    }
    Ok(out)
}

/// Extends a centred block to `n_ext` points with root-raised-cosine weights.
pub fn rrc_extend(v: &[Complex64], n_ext: usize, rolloff: f64) -> Vec<Complex64> {
    let n = v.len();
    (0..n_ext)
        .map(|j| {
            let phi = j as i64 - (n_ext / 2) as i64;
            let k = (phi + (n / 2) as i64).rem_euclid(n as i64) as usize;
            v[k] * rrc_unchecked(rolloff, 1.0, phi as f64 / n as f64)
        })
        .collect()
}

/// Matched weighting followed by an alias fold back to `n` points.
pub fn rrc_fold(v: &[Complex64], n: usize, rolloff: f64) -> Vec<Complex64> {
    let n_ext = v.len();
    let mut out = vec![ZERO; n];
    for (j, x) in v.iter().enumerate() {
        let phi = j as i64 - (n_ext / 2) as i64;
        let k = (phi + (n / 2) as i64).rem_euclid(n as i64) as usize;
        out[k] += x * rrc_unchecked(rolloff, 1.0, phi as f64 / n as f64);
    }
    out
}

pub(crate) fn to_freq(v: &[Complex64]) -> Vec<Complex64> {
    fftshift(&fft_unitary(v))
}

pub(crate) fn to_time(v: &[Complex64]) -> Vec<Complex64> {
    ifft_unitary(&ifftshift(v))
}

/// Maps a data-domain grid onto the equalization grid.
pub fn data_to_eq(scheme: Scheme, grid: &[Complex64]) -> Vec<Complex64> {
    match scheme {
        Scheme::FdmFdcp => to_time(grid),
        Scheme::ScFde => to_freq(grid),
        Scheme::ScTde | Scheme::OfdmFde => grid.to_vec(),
    }
}

pub fn eq_to_data(scheme: Scheme, v: &[Complex64]) -> Vec<Complex64> {
    match scheme {
        Scheme::FdmFdcp => to_freq(v),
        Scheme::ScFde => to_time(v),
        Scheme::ScTde | Scheme::OfdmFde => v.to_vec(),
    }
}

/// Intermediate buffers of the transmit chain, exposed for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct TxStages {
    /// Grid moved into the domain where guards are added.
    pub active: Vec<Complex64>,
    /// `N`-point block with guards.
    pub framed: Vec<Complex64>,
    /// Block in the domain where shaping is applied.
    pub shaped_input: Vec<Complex64>,
    /// Extended block in the shaping domain.
    pub extended: Vec<Complex64>,
    pub baseband: Vec<Complex64>,
}

/// Runs the transmit chain on a data-domain grid.
pub fn transmit_stages(cfg: &WaveformConfig, grid: &[Complex64], scale: f64) -> TxStages {
    let l = cfg.cp_len;
    let n_ext = cfg.ext_len();
    let beta = cfg.rolloff;
    if cfg.scheme.equalizes_in_time() {
        let active = if cfg.scheme == Scheme::ScTde {
            to_freq(grid)
        } else {
            grid.to_vec()
        };
        let framed = match cfg.cp_mode {
            CpMode::ZeroPadded => zero_pad_unfold(&active, l),
            CpMode::Cyclic => {
                let m = active.len();
                let mut v = Vec::with_capacity(m + 2 * l);
                v.extend_from_slice(&active[m - l..]);
                v.extend_from_slice(&active);
                v.extend_from_slice(&active[..l]);
                v
            }
        };
        let shaped_input = to_time(&framed);
        let mut extended = rrc_extend(&shaped_input, n_ext, beta);
        extended.iter_mut().for_each(|v| *v *= scale);
        TxStages {
            active,
            framed,
            shaped_input,
            baseband: extended.clone(),
            extended,
        }
    } else {
        let active = if cfg.scheme == Scheme::OfdmFde {
            to_time(grid)
        } else {
            grid.to_vec()
        };
        let framed = match cfg.cp_mode {
            CpMode::ZeroPadded => {
                let mut v = active.clone();
                v.resize(active.len() + l, ZERO);
                v
            }
            CpMode::Cyclic => {
                let mut v = Vec::with_capacity(active.len() + l);
                v.extend_from_slice(&active[active.len() - l..]);
                v.extend_from_slice(&active);
                v
            }
        };
        let shaped_input = to_freq(&framed);
        let mut extended = rrc_extend(&shaped_input, n_ext, beta);
        extended.iter_mut().for_each(|v| *v *= scale);
        let baseband = to_time(&extended);
        TxStages {
            active,
            framed,
            shaped_input,
            extended,
            baseband,
        }
    }
}

/// Runs the receive chain up to (not including) equalization.
pub fn receive_grid(cfg: &WaveformConfig, rx: &[Complex64], scale: f64) -> Result<Vec<Complex64>> {
    if rx.len() != cfg.ext_len() {
        return Err(Error::LengthMismatch {
            expected: cfg.ext_len(),
            got: rx.len(),
        });
    }
    let l = cfg.cp_len;
    let n = cfg.n;
    let inv = 1.0 / scale;
    if cfg.scheme.equalizes_in_time() {
        let block = rrc_fold(rx, n, cfg.rolloff);
        let spectrum = to_freq(&block);
        let z = match cfg.cp_mode {
            CpMode::ZeroPadded => zero_pad_fold(&spectrum, l)?,
            CpMode::Cyclic => spectrum[l..n - l].to_vec(),
        };
        Ok(to_time(&z).into_iter().map(|v| v * inv).collect())
    } else {
        let spectrum = rrc_fold(&to_freq(rx), n, cfg.rolloff);
        let block = to_time(&spectrum);
        let k = n - l;
        let c = match cfg.cp_mode {
            CpMode::ZeroPadded => {
                let mut c = block[..k].to_vec();
                for i in 0..l {
                    c[i] += block[k + i];
                }
                c
            }
            CpMode::Cyclic => block[l..].to_vec(),
        };
        Ok(to_freq(&c).into_iter().map(|v| v * inv).collect())
    }
}

fn check_config(cfg: &WaveformConfig, plan: &PilotPlan) -> Result<()> {
    cfg.validate()?;
    plan.validate(cfg)
}

pub fn modulate(cfg: &WaveformConfig, data: &[u32], plan: &PilotPlan) -> Result<TxBlock> {
    check_config(cfg, plan)?;
    if data.len() != cfg.payload_len() {
        return Err(Error::LengthMismatch {
            expected: cfg.payload_len(),
            got: data.len(),
        });
    }
    let points = QamConstellation::new(cfg.order)?.map(data)?;
    let layout = plan.layout(cfg);
    let mut grid = vec![ZERO; cfg.grid_len()];
    for (&i, &p) in plan.data_positions(cfg).iter().zip(&points) {
        grid[i] = p;
    }
    for &(i, v) in &layout {
        grid[i] = v;
    }
    let stages = transmit_stages(cfg, &grid, cfg.tx_scale(plan));
    Ok(TxBlock {
        data_symbols: data.to_vec(),
        baseband: ComplexSequence::time(stages.baseband, cfg.tx_spacing())?,
        pilot_layout: layout,
    })
}

/// Known grid, in the equalization domain, of the full pilot block.
pub fn pilot_block_grid(cfg: &WaveformConfig, plan: &PilotPlan) -> Vec<Complex64> {
    let g = cfg.grid_len();
    let amp = (cfg.nominal_energy(plan) / cfg.cp_energy_factor() / g as f64).sqrt();
    if cfg.scheme.equalizes_in_time() {
        vec![Complex64::new(amp, 0.0); g]
    } else {
        let mut impulse = vec![ZERO; g];
        impulse[g / 2] = Complex64::new(amp * (g as f64).sqrt(), 0.0);
        to_freq(&impulse)
    }
}

/// Baseband of the full pilot block.
pub fn pilot_block(cfg: &WaveformConfig, plan: &PilotPlan) -> Result<ComplexSequence> {
    check_config(cfg, plan)?;
    let grid = eq_to_data(cfg.scheme, &pilot_block_grid(cfg, plan));
    let stages = transmit_stages(cfg, &grid, cfg.tx_scale(plan));
    ComplexSequence::time(stages.baseband, cfg.tx_spacing())
}

pub fn demodulate(
    cfg: &WaveformConfig,
    rx: &ComplexSequence,
    est: &ChannelEstimate,
) -> Result<Demodulated> {
    demodulate_with(cfg, &PilotPlan::default_for(cfg), rx, est)
}

pub fn demodulate_with(
    cfg: &WaveformConfig,
    plan: &PilotPlan,
    rx: &ComplexSequence,
    est: &ChannelEstimate,
) -> Result<Demodulated> {
    check_config(cfg, plan)?;
    if rx.domain() != Domain::Time {
        return Err(Error::DomainMismatch {
            expected: Domain::Time,
            got: rx.domain(),
        });
    }
    if est.scheme != cfg.scheme {
        return Err(Error::SchemeMismatch {
            estimate: est.scheme.to_string(),
            block: cfg.scheme.to_string(),
        });
    }
    let z = receive_grid(cfg, rx.samples(), cfg.tx_scale(plan))?;
    let (eq, clamped) = equalize_values(est, &z)?;
    let grid = eq_to_data(cfg.scheme, &eq);
    let soft: Vec<Complex64> = plan.data_positions(cfg).iter().map(|&i| grid[i]).collect();
    let symbols = QamConstellation::new(cfg.order)?.demap(&soft);
    Ok(Demodulated {
        symbols,
        soft,
        clamped,
    })
}

const IQ_MAGIC: [u8; 4] = *b"MDIQ";
const IQ_VERSION: u32 = 1;

/// Writes `x` as a header, the sample rate, and interleaved `f32` I/Q pairs,
/// all little-endian.
pub fn write_iq<W: Write>(mut w: W, x: &ComplexSequence) -> Result<()> {
    w.write_all(&IQ_MAGIC)?;
    w.write_all(&IQ_VERSION.to_le_bytes())?;
    w.write_all(&(1.0 / x.spacing()).to_le_bytes())?;
    for v in x.samples() {
        w.write_all(&(v.re as f32).to_le_bytes())?;
        w.write_all(&(v.im as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_iq<R: Read>(mut r: R) -> Result<ComplexSequence> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if head[..4] != IQ_MAGIC {
        return Err(Error::InvalidParameter("not an IQ file".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != IQ_VERSION {
        return Err(Error::InvalidParameter(format!("unsupported IQ version {version}")));
    }
    let fs = f64::from_le_bytes(head[8..16].try_into().unwrap());
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 8 != 0 {
        return Err(Error::InvalidParameter("truncated IQ payload".into()));
    }
    let samples = body
        .chunks_exact(8)
        .map(|c| {
            Complex64::new(
                f32::from_le_bytes(c[..4].try_into().unwrap()) as f64,
                f32::from_le_bytes(c[4..].try_into().unwrap()) as f64,
            )
        })
        .collect();
    ComplexSequence::time(samples, 1.0 / fs)
}
