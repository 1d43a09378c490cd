//! Time-varying multipath channels.
//!
//! A realization is a list of `(gain, doppler, delay)` components held fixed
//! over a block. Applying it to a sampled block sums, per component, the
//! input delayed by `delay` and modulated by `exp(j 2 pi doppler t)` where
//! `t` is absolute time, so a pilot block and a data block sent at different
//! epochs see one consistent channel.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fft_vec, ifft_in_place, ComplexSequence, Domain, RngStream};

/// Provenance of the embedded delay profile.
pub const TDL_A_TABLE_VERSION: &str = "3GPP TR 38.901 TDL-A, 22 taps, normalized delays";

/// `(normalized delay, power dB)` for the 22 TDL-A taps, in table order.
pub const TDL_A: [(f64, f64); 22] = [
    (0.0000, -13.4),
    (0.3819, 0.0),
    (0.4025, -2.2),
    (0.5868, -4.0),
    (0.4610, -6.0),
    (0.5375, -8.2),
    (0.6708, -9.9),
    (0.5750, -10.5),
    (0.7618, -7.5),
    (1.5375, -15.9),
    (1.8978, -6.6),
    (2.2242, -16.7),
    (2.1718, -12.4),
    (2.4942, -15.2),
    (2.5119, -10.8),
    (3.0582, -11.3),
    (4.0810, -12.7),
    (4.4579, -16.2),
    (4.7966, -18.3),
    (5.0066, -16.6),
    (5.3043, -19.9),
    (9.6586, -29.7),
];

/// How the Doppler spread figure is mapped onto the Jakes draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DopplerConvention {
    /// `doppler_spread` is the largest pairwise difference, so components are
    /// drawn with one-sided limit `doppler_spread / 2`.
    #[default]
    Pairwise,
    /// `doppler_spread` is the one-sided Jakes limit itself.
    OneSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayProfile {
    TdlA,
    /// Absolute `(delay_ns, power_db)` taps; not scaled by the delay spread.
    Custom(Vec<(f64, f64)>),
}

impl Default for DelayProfile {
    fn default() -> Self {
        DelayProfile::TdlA
    }
}

impl DelayProfile {
    /// Parses a plain-text tap list: one `delay_ns power_db` pair per line,
    /// separated by whitespace or a comma. `#` starts a comment.
    pub fn parse_tap_list(text: &str) -> Result<Self> {
        let mut taps = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::Config(format!(
                    "tap list line {}: expected `delay_ns power_db`",
                    lineno + 1
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Config(format!("tap list line {}: bad number {s:?}", lineno + 1)))
            };
            let delay = parse(fields[0])?;
            let power = parse(fields[1])?;
            if delay < 0.0 || !delay.is_finite() || !power.is_finite() {
                return Err(Error::Config(format!(
                    "tap list line {}: delay must be >= 0 and values finite",
                    lineno + 1
                )));
            }
            taps.push((delay, power));
        }
        if taps.is_empty() {
            return Err(Error::Config("tap list is empty".into()));
        }
        Ok(DelayProfile::Custom(taps))
    }

    pub fn load_tap_list(path: &Path) -> Result<Self> {
        Self::parse_tap_list(&std::fs::read_to_string(path)?)
    }
}

/// Delay and Doppler spread plus the profile they scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModelSpec {
    /// RMS delay spread in seconds; multiplies the normalized TDL-A delays.
    pub delay_spread: f64,
    /// Doppler spread in Hz, read per `convention`.
    pub doppler_spread: f64,
    #[serde(default)]
    pub profile: DelayProfile,
    #[serde(default)]
    pub convention: DopplerConvention,
}

impl ChannelModelSpec {
    pub fn tdl_a(delay_spread: f64, doppler_spread: f64) -> Self {
        Self {
            delay_spread,
            doppler_spread,
            profile: DelayProfile::TdlA,
            convention: DopplerConvention::Pairwise,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delay_spread >= 0.0 && self.delay_spread.is_finite()) {
            return Err(Error::InvalidParameter("delay spread must be >= 0".into()));
        }
        if !(self.doppler_spread >= 0.0 && self.doppler_spread.is_finite()) {
            return Err(Error::InvalidParameter("Doppler spread must be >= 0".into()));
        }
        Ok(())
    }

    /// One-sided limit handed to [`draw_jakes`].
    pub fn jakes_limit(&self) -> f64 {
        match self.convention {
            DopplerConvention::Pairwise => self.doppler_spread / 2.0,
            DopplerConvention::OneSided => self.doppler_spread,
        }
    }

    /// `(delay seconds, linear power)` before normalization.
    fn tap_grid(&self) -> Vec<(f64, f64)> {
        match &self.profile {
            DelayProfile::TdlA => TDL_A
                .iter()
                .map(|&(d, p)| (d * self.delay_spread, db_to_linear(p)))
                .collect(),
            DelayProfile::Custom(taps) => taps
                .iter()
                .map(|&(d_ns, p)| (d_ns * 1e-9, db_to_linear(p)))
                .collect(),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One multipath component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub gain: Complex64,
    pub doppler: f64,
    pub delay: f64,
}

/// A frozen channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<Tap>,
}

impl ChannelRealization {
    pub fn new(taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidParameter("a channel needs at least one tap".into()));
        }
        if taps
            .iter()
            .any(|t| !(t.delay >= 0.0) || !t.doppler.is_finite() || !t.gain.norm().is_finite())
        {
            return Err(Error::InvalidParameter("taps need finite gain/Doppler and delay >= 0".into()));
        }
        Ok(Self { taps })
    }

    /// Single unit tap with no delay or Doppler.
    pub fn identity() -> Self {
        Self {
            taps: vec![Tap {
                gain: Complex64::new(1.0, 0.0),
                doppler: 0.0,
                delay: 0.0,
            }],
        }
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn total_power(&self) -> f64 {
        self.taps.iter().map(|t| t.gain.norm_sqr()).sum()
    }

    /// Largest pairwise Doppler difference.
    pub fn doppler_spread(&self) -> f64 {
        let (lo, hi) = self
            .taps
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
                (lo.min(t.doppler), hi.max(t.doppler))
            });
        hi - lo
    }

    pub fn max_delay(&self) -> f64 {
        self.taps.iter().map(|t| t.delay).fold(0.0, f64::max)
    }

    /// Every gain multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            taps: self
                .taps
                .iter()
                .map(|t| Tap {
                    gain: t.gain * c,
                    ..*t
                })
                .collect(),
        }
    }

    /// Same gains and delays with every Doppler set to zero.
    pub fn without_doppler(&self) -> Self {
        Self {
            taps: self.taps.iter().map(|t| Tap { doppler: 0.0, ..*t }).collect(),
        }
    }

    /// Same gains and Dopplers with every delay set to zero.
    pub fn without_delay(&self) -> Self {
        Self {
            taps: self.taps.iter().map(|t| Tap { delay: 0.0, ..*t }).collect(),
        }
    }

    /// The sampled time-only response `sum_i a_i exp(j 2 pi f_i t)`.
    pub fn doppler_response(&self, t: f64) -> Complex64 {
        self.taps
            .iter()
            .map(|tap| tap.gain * Complex64::from_polar(1.0, 2.0 * PI * tap.doppler * t))
            .sum()
    }
}

/// Draws `count` Doppler shifts from the Jakes (arcsine) density with
/// one-sided limit `f_max`, by inverse CDF: `f = f_max cos(pi U)`.
pub fn draw_jakes(f_max: f64, count: usize, stream: &mut RngStream) -> Vec<f64> {
    (0..count)
        .map(|_| {
            let mut u = stream.uniform();
            while u == 0.0 {
                u = stream.uniform();
            }
            if f_max == 0.0 {
                0.0
            } else {
                f_max * (PI * u).cos()
            }
        })
        .collect()
}

/// Draws one realization: powers fixed by the profile (normalized to unit
/// sum), phases uniform on `[0, 2 pi)`, Dopplers i.i.d. Jakes.
pub fn build_channel(spec: &ChannelModelSpec, stream: &mut RngStream) -> Result<ChannelRealization> {
    spec.validate()?;
    let grid = spec.tap_grid();
    let total: f64 = grid.iter().map(|&(_, p)| p).sum();
    let dopplers = draw_jakes(spec.jakes_limit(), grid.len(), stream);
    let taps = grid
        .iter()
        .zip(dopplers)
        .map(|(&(delay, power), doppler)| {
            let phase = 2.0 * PI * stream.uniform();
            Tap {
                gain: Complex64::from_polar((power / total).sqrt(), phase),
                doppler,
                delay,
            }
        })
        .collect();
    ChannelRealization::new(taps)
}

/// [`build_channel`] for the TDL-A profile.
pub fn build_tdl_a(spec: &ChannelModelSpec, stream: &mut RngStream) -> Result<ChannelRealization> {
    let spec = ChannelModelSpec {
        profile: DelayProfile::TdlA,
        ..spec.clone()
    };
    build_channel(&spec, stream)
}

/// How per-tap delays are realized on the sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMode {
    /// Band-limited fractional delay: linear phase ramp across the block's DFT.
    #[default]
    Fractional,
    /// Round each delay to the nearest sample.
    NearestSample,
}

/// What lies outside the block when a delay pulls samples in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgePolicy {
    /// The block is one period of a periodic signal; delays rotate it.
    #[default]
    Periodic,
    /// The block is isolated: zero-padded to twice its length, delayed, and
    /// truncated back.
    ZeroExtended,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelOptions {
    #[serde(default)]
    pub delay_mode: DelayMode,
    #[serde(default)]
    pub edge: EdgePolicy,
    /// Grid that `NearestSample` rounds to; the signal's own spacing if unset.
    #[serde(default)]
    pub delay_grid: Option<f64>,
}

/// `y[n] = sum_i a_i exp(j 2 pi f_i (t0 + n T)) x(nT - tau_i)`.
pub fn apply_channel(
    h: &ChannelRealization,
    x: &ComplexSequence,
    t0: f64,
) -> Result<ComplexSequence> {
    apply_channel_with(h, x, t0, ChannelOptions::default())
}

pub fn apply_channel_with(
    h: &ChannelRealization,
    x: &ComplexSequence,
    t0: f64,
    opts: ChannelOptions,
) -> Result<ComplexSequence> {
    if x.domain() != Domain::Time {
        return Err(Error::DomainMismatch {
            expected: Domain::Time,
            got: x.domain(),
        });
    }
    let n = x.len();
    let ts = x.spacing();
    let block = n as f64 * ts;
    if h.max_delay() >= block {
        return Err(Error::DelayExceedsBlock {
            delay_s: h.max_delay(),
            block_s: block,
        });
    }

    let work_len = match opts.edge {
        EdgePolicy::Periodic => n,
        EdgePolicy::ZeroExtended => 2 * n,
    };
    let mut padded = x.samples().to_vec();
    padded.resize(work_len, Complex64::new(0.0, 0.0));
    let spectrum = fft_vec(&padded);

    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut delayed = vec![Complex64::new(0.0, 0.0); work_len];
    for tap in h.taps() {
        let delay_samples = match opts.delay_mode {
            DelayMode::Fractional => tap.delay / ts,
            DelayMode::NearestSample => {
                let grid = opts.delay_grid.unwrap_or(ts);
                let d = (tap.delay / grid).round() * grid / ts;
                if (d - d.round()).abs() < 1e-9 { d.round() } else { d }
            }
        };
        if delay_samples == 0.0 {
            delayed[..n].copy_from_slice(x.samples());
        } else if delay_samples.fract() == 0.0 {
            let d = delay_samples as usize;
            for (i, v) in delayed.iter_mut().enumerate().take(n) {
                *v = if i >= d {
                    padded[i - d]
                } else {
                    padded[(i + work_len - d) % work_len]
                };
            }
        } else {
            for (k, (dst, src)) in delayed.iter_mut().zip(&spectrum).enumerate() {
                let freq = signed_bin(k, work_len) as f64 / work_len as f64;
                *dst = *src * Complex64::from_polar(1.0, -2.0 * PI * freq * delay_samples);
            }
            ifft_in_place(&mut delayed);
        }
        let step = Complex64::from_polar(1.0, 2.0 * PI * tap.doppler * ts);
        let mut rot = tap.gain * Complex64::from_polar(1.0, 2.0 * PI * tap.doppler * t0);
        for (o, d) in out.iter_mut().zip(&delayed[..n]) {
            *o += rot * d;
            rot *= step;
        }
    }
    x.with_samples(out)
}

/// Signed frequency index of FFT bin `k`; the Nyquist bin maps to `-n/2`.
fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Signal-to-noise ratio at the receiver input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Signal sample power over noise sample power, dB. `+inf` disables noise.
    pub snr_db: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            snr_db: f64::INFINITY,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

/// Adds circular Gaussian noise at the given SNR relative to the block's
/// measured mean power.
pub fn add_awgn(
    x: &ComplexSequence,
    noise: NoiseSpec,
    stream: &mut RngStream,
) -> Result<ComplexSequence> {
    if noise.is_noiseless() {
        return Ok(x.clone());
    }
    if noise.snr_db.is_nan() || noise.snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter(format!("SNR {} dB", noise.snr_db)));
    }
    let power = x.mean_power();
    if power == 0.0 {
        return Err(Error::ZeroPower);
    }
    add_noise(x, power / db_to_linear(noise.snr_db), stream)
}

/// Adds circular Gaussian noise of the given per-sample variance.
pub fn add_noise(x: &ComplexSequence, variance: f64, stream: &mut RngStream) -> Result<ComplexSequence> {
    let sigma = variance.sqrt();
    let out = x
        .samples()
        .iter()
        .map(|v| v + stream.complex_gaussian() * sigma)
        .collect();
    x.with_samples(out)
}
