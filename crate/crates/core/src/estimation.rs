//! Channel estimation and one-tap equalization.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::channel::{apply_channel_with, ChannelOptions, ChannelRealization};
use crate::error::{Error, Result};
use crate::numerics::{fft_unitary, fftshift, ifft_unitary, ifftshift, ComplexSequence};
use crate::qam::QamConstellation;
use crate::waveforms::{
    pilot_block, pilot_block_grid, receive_grid, to_freq, to_time, PilotPlan, Scheme,
    WaveformConfig,
};

/// Unexplained guard energy, relative to the captured Doppler profile, above
/// which the pilot guard is judged too narrow.
pub const GUARD_LEAKAGE_THRESHOLD_DB: f64 = -10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InbandOptions {
    /// `None` disables the guard check.
    pub leakage_threshold_db: Option<f64>,
}

impl Default for InbandOptions {
    fn default() -> Self {
        Self {
            leakage_threshold_db: Some(GUARD_LEAKAGE_THRESHOLD_DB),
        }
    }
}

/// Effective channel on a scheme's equalization grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub scheme: Scheme,
    pub response: ComplexSequence,
    pub epoch: f64,
    pub floor_eps: f64,
}

impl ChannelEstimate {
    pub fn new(scheme: Scheme, response: ComplexSequence, epoch: f64) -> Self {
        let peak = response
            .samples()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        Self {
            scheme,
            response,
            epoch,
            floor_eps: (1e-12 * peak).max(f64::MIN_POSITIVE),
        }
    }

    /// The estimate of an ideal channel.
    pub fn ones(cfg: &WaveformConfig) -> Result<Self> {
        let g = cfg.grid_len();
        let response = grid_sequence(cfg, vec![Complex64::new(1.0, 0.0); g])?;
        Ok(Self::new(cfg.scheme, response, 0.0))
    }

    pub fn values(&self) -> &[Complex64] {
        self.response.samples()
    }

    /// Writes `bin,re,im` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["bin", "re", "im"])?;
        for (i, v) in self.values().iter().enumerate() {
            out.write_record([i.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn grid_sequence(cfg: &WaveformConfig, v: Vec<Complex64>) -> Result<ComplexSequence> {
    ComplexSequence::new(v, cfg.scheme.equalization_domain(), cfg.grid_spacing())
}

/// Element-wise division with small entries raised to `floor_eps`.
pub fn equalize(est: &ChannelEstimate, z: &ComplexSequence) -> Result<(ComplexSequence, usize)> {
    if z.domain() != est.response.domain() {
        return Err(Error::DomainMismatch {
            expected: est.response.domain(),
            got: z.domain(),
        });
    }
    let (v, clamped) = equalize_values(est, z.samples())?;
    Ok((z.with_samples(v)?, clamped))
}

pub(crate) fn equalize_values(
    est: &ChannelEstimate,
    z: &[Complex64],
) -> Result<(Vec<Complex64>, usize)> {
    if z.len() != est.values().len() {
        return Err(Error::LengthMismatch {
            expected: est.values().len(),
            got: z.len(),
        });
    }
    let mut clamped = 0;
    let out = z
        .iter()
        .zip(est.values())
        .map(|(&y, &h)| {
            let mag = h.norm();
            if mag < est.floor_eps {
                clamped += 1;
                let dir = if mag > 0.0 { h / mag } else { Complex64::new(1.0, 0.0) };
                y / (dir * est.floor_eps)
            } else {
                y / h
            }
        })
        .collect();
    Ok((out, clamped))
}

fn divide_by_pilot(
    cfg: &WaveformConfig,
    plan: &PilotPlan,
    rx: &[Complex64],
    t0: f64,
) -> Result<ChannelEstimate> {
    let z = receive_grid(cfg, rx, cfg.tx_scale(plan))?;
    let known = pilot_block_grid(cfg, plan);
    let h = z.iter().zip(&known).map(|(a, b)| a / b).collect();
    Ok(ChannelEstimate::new(cfg.scheme, grid_sequence(cfg, h)?, t0))
}

/// Sends the full pilot block through the noiseless channel and divides.
pub fn estimate_perfect(
    cfg: &WaveformConfig,
    channel: &ChannelRealization,
    t0: f64,
) -> Result<ChannelEstimate> {
    estimate_perfect_with(cfg, channel, t0, ChannelOptions::default())
}

pub fn estimate_perfect_with(
    cfg: &WaveformConfig,
    channel: &ChannelRealization,
    t0: f64,
    opts: ChannelOptions,
) -> Result<ChannelEstimate> {
    let plan = PilotPlan::default_for(cfg);
    let tx = pilot_block(cfg, &plan)?;
    let rx = apply_channel_with(channel, &tx, t0, opts)?;
    divide_by_pilot(cfg, &plan, rx.samples(), t0)
}

/// Estimate from a received preamble (full pilot block).
pub fn estimate_from_preamble(
    cfg: &WaveformConfig,
    rx: &ComplexSequence,
    t0: f64,
) -> Result<ChannelEstimate> {
    let plan = PilotPlan::default_for(cfg);
    divide_by_pilot(cfg, &plan, rx.samples(), t0)
}

/// Estimate from the pilots embedded in a received data block.
pub fn estimate_inband(
    cfg: &WaveformConfig,
    plan: &PilotPlan,
    rx: &ComplexSequence,
    t0: f64,
) -> Result<ChannelEstimate> {
    estimate_inband_with(cfg, plan, rx, t0, InbandOptions::default())
}

pub fn estimate_inband_with(
    cfg: &WaveformConfig,
    plan: &PilotPlan,
    rx: &ComplexSequence,
    t0: f64,
    opts: InbandOptions,
) -> Result<ChannelEstimate> {
    plan.validate(cfg)?;
    let z = receive_grid(cfg, rx.samples(), cfg.tx_scale(plan))?;
    let g = z.len();
    let layout = plan.layout(cfg);
    let h = match plan {
        PilotPlan::Tone { half_width } => {
            let c = g / 2;
            let tone = layout.iter().find(|(i, _)| *i == c).map(|(_, v)| *v).unwrap();
            let spectrum = fftshift(&fft_unitary(&z));
            let reach = half_width / 2;
            let mut profile = vec![Complex64::new(0.0, 0.0); g];
            for k in c - reach..=c + reach {
                profile[k] = spectrum[k] / tone;
            }
            let total: f64 = profile.iter().map(|v| v.norm_sqr()).sum();
            if total <= 0.0 || !total.is_finite() {
                return Err(Error::NoPilotEnergy);
            }
            let s = (g as f64).sqrt();
            let h: Vec<Complex64> = ifft_unitary(&ifftshift(&profile))
                .into_iter()
                .map(|v| v * s)
                .collect();
            if let Some(limit) = opts.leakage_threshold_db {
                let leakage_db = guard_leakage_db(cfg, plan, &z, &h, &spectrum, *half_width, reach, tone, total)?;
                if leakage_db > limit {
                    return Err(Error::GuardTooNarrow { leakage_db });
                }
            }
            h
        }
        PilotPlan::Comb { .. } => {
            let points: Vec<(usize, Complex64)> =
                layout.iter().map(|&(i, p)| (i, z[i] / p)).collect();
            if points.iter().all(|(_, v)| v.norm_sqr() == 0.0) {
                return Err(Error::NoPilotEnergy);
            }
            interpolate_circular(&points, g)
        }
        PilotPlan::None | PilotPlan::Preamble => {
            return Err(Error::Config(
                "pilot plan carries no in-band pilots".into(),
            ))
        }
    };
    Ok(ChannelEstimate::new(cfg.scheme, grid_sequence(cfg, h)?, t0))
}

/// Energy in the guard ring that neither the captured profile nor the
/// (decided) data explains, relative to the profile energy.
#[allow(clippy::too_many_arguments)]
fn guard_leakage_db(
    cfg: &WaveformConfig,
    plan: &PilotPlan,
    z: &[Complex64],
    h: &[Complex64],
    spectrum: &[Complex64],
    half_width: usize,
    reach: usize,
    tone: Complex64,
    total: f64,
) -> Result<f64> {
    let g = z.len();
    let c = g / 2;
    if half_width == reach {
        return Ok(f64::NEG_INFINITY);
    }
    let qam = QamConstellation::new(cfg.order)?;
    let eq: Vec<Complex64> = z
        .iter()
        .zip(h)
        .map(|(a, b)| if b.norm_sqr() > 0.0 { a / b } else { Complex64::new(0.0, 0.0) })
        .collect();
    let grid = to_freq(&eq);
    let mut decided = vec![Complex64::new(0.0, 0.0); g];
    for i in plan.data_positions(cfg) {
        decided[i] = qam.points()[qam.demap_one(grid[i]) as usize];
    }
    let predicted: Vec<Complex64> = to_time(&decided).iter().zip(h).map(|(a, b)| a * b).collect();
    let predicted = to_freq(&predicted);
    let ring: f64 = (reach + 1..=half_width)
        .flat_map(|d| [c - d, c + d])
        .map(|k| (spectrum[k] - predicted[k]).norm_sqr())
        .sum::<f64>()
        / tone.norm_sqr();
    Ok(10.0 * (ring / total).log10())
}

/// Linear interpolation between samples on a circular grid of length `g`.
fn interpolate_circular(points: &[(usize, Complex64)], g: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); g];
    if points.len() == 1 {
        out.iter_mut().for_each(|v| *v = points[0].1);
        return out;
    }
    for (j, &(a, va)) in points.iter().enumerate() {
        let (b, vb) = points[(j + 1) % points.len()];
        let span = (b + g - a) % g;
        let span = if span == 0 { g } else { span };
        for step in 0..span {
            let w = step as f64 / span as f64;
            out[(a + step) % g] = va * (1.0 - w) + vb * w;
        }
    }
    out
}

/// Whether an estimate lives in the domain its scheme equalizes in.
pub fn check_domain(est: &ChannelEstimate) -> Result<()> {
    let expected = est.scheme.equalization_domain();
    if est.response.domain() != expected {
        return Err(Error::DomainMismatch {
            expected,
            got: est.response.domain(),
        });
    }
    Ok(())
}
