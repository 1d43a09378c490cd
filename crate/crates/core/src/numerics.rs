//! Numerical kernels shared by every other module.
//!
//! DFT convention, fixed crate-wide: the forward transform is unscaled and
//! the inverse carries the `1/N`, so `idft(dft(x)) == x`. Arbitrary lengths
//! are supported (rustfft falls back to Rader/Bluestein for awkward sizes).

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which axis a sequence lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Time,
    Frequency,
}

impl Domain {
    pub fn dual(self) -> Self {
        match self {
            Domain::Time => Domain::Frequency,
            Domain::Frequency => Domain::Time,
        }
    }
}

/// A finite block of complex samples tagged with its domain and sample spacing
/// (seconds for time, Hz for frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    samples: Vec<Complex64>,
    domain: Domain,
    spacing: f64,
}

impl ComplexSequence {
    pub fn new(samples: Vec<Complex64>, domain: Domain, spacing: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self {
            samples,
            domain,
            spacing,
        })
    }

    pub fn time(samples: Vec<Complex64>, sample_period: f64) -> Result<Self> {
        Self::new(samples, Domain::Time, sample_period)
    }

    pub fn frequency(samples: Vec<Complex64>, bin_spacing: f64) -> Result<Self> {
        Self::new(samples, Domain::Frequency, bin_spacing)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean `|x|^2` over the block.
    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    /// Same domain and spacing, new samples.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, self.domain, self.spacing)
    }
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// In-place unscaled forward DFT.
pub fn fft_in_place(x: &mut [Complex64]) {
    if x.len() > 1 {
        plan(x.len(), false).process(x);
    }
}

/// In-place inverse DFT including the `1/N` factor.
pub fn ifft_in_place(x: &mut [Complex64]) {
    let n = x.len();
    if n > 1 {
        plan(n, true).process(x);
    }
    if n > 0 {
        let scale = 1.0 / n as f64;
        x.iter_mut().for_each(|v| *v *= scale);
    }
}

pub fn fft_vec(x: &[Complex64]) -> Vec<Complex64> {
    let mut v = x.to_vec();
    fft_in_place(&mut v);
    v
}

pub fn ifft_vec(x: &[Complex64]) -> Vec<Complex64> {
    let mut v = x.to_vec();
    ifft_in_place(&mut v);
    v
}

/// Unitary forward DFT (`1/sqrt(N)` on both directions); used internally where
/// per-sample power must be preserved across domains.
pub(crate) fn fft_unitary(x: &[Complex64]) -> Vec<Complex64> {
    let mut v = fft_vec(x);
    let s = 1.0 / (x.len() as f64).sqrt();
    v.iter_mut().for_each(|c| *c *= s);
    v
}

pub(crate) fn ifft_unitary(x: &[Complex64]) -> Vec<Complex64> {
    let mut v = ifft_vec(x);
    let s = (x.len() as f64).sqrt();
    v.iter_mut().for_each(|c| *c *= s);
    v
}

/// FFT index (DC at 0) for a centered bin index (DC at `n / 2`).
#[inline]
pub(crate) fn fft_index(centered: usize, n: usize) -> usize {
    (centered + n - n / 2) % n
}

/// Reorders an FFT-ordered vector so DC sits at index `n / 2`.
pub(crate) fn fftshift(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n).map(|c| x[fft_index(c, n)]).collect()
}

/// Inverse of [`fftshift`].
pub(crate) fn ifftshift(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (c, v) in x.iter().enumerate() {
        out[fft_index(c, n)] = *v;
    }
    out
}

/// Forward DFT of a time sequence. Output spacing is `1 / (N * spacing)`.
pub fn dft(x: &ComplexSequence) -> Result<ComplexSequence> {
    let n = x.len();
    ComplexSequence::new(
        fft_vec(x.samples()),
        x.domain().dual(),
        1.0 / (n as f64 * x.spacing()),
    )
}

/// Inverse DFT, scaled by `1/N`.
pub fn idft(x: &ComplexSequence) -> Result<ComplexSequence> {
    let n = x.len();
    ComplexSequence::new(
        ifft_vec(x.samples()),
        x.domain().dual(),
        1.0 / (n as f64 * x.spacing()),
    )
}

/// Root-raised-cosine response parameters.
///
/// `period` is the symbol period `T` of the response (seconds when the
/// variable is frequency, Hz^-1 when it is time). `length` is the number of
/// input samples each polyphase branch spans when the response is discretized
/// as a resampling filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrcSpec {
    pub rolloff: f64,
    pub period: f64,
    pub length: usize,
}

impl RrcSpec {
    pub fn new(rolloff: f64, period: f64, length: usize) -> Result<Self> {
        let spec = Self {
            rolloff,
            period,
            length,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::InvalidParameter(format!(
                "rolloff must lie in [0, 1], got {}",
                self.rolloff
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "period must be positive, got {}",
                self.period
            )));
        }
        Ok(())
    }

    /// `(1 + beta) / (2T)`: beyond this the response is exactly zero.
    pub fn support(&self) -> f64 {
        (1.0 + self.rolloff) / (2.0 * self.period)
    }

    /// Default filter length for a resampler interpolating by `up`.
    pub fn with_default_length(rolloff: f64, period: f64, up: usize) -> Result<Self> {
        Self::new(rolloff, period, 8 * up.max(1))
    }
}

/// The three-branch root-raised-cosine response `G(s)`.
pub fn rrc_value(spec: &RrcSpec, s: f64) -> Result<f64> {
    spec.validate()?;
    Ok(rrc_unchecked(spec.rolloff, spec.period, s))
}

pub(crate) fn rrc_unchecked(beta: f64, t: f64, s: f64) -> f64 {
    let a = s.abs();
    let lo = (1.0 - beta) / (2.0 * t);
    let hi = (1.0 + beta) / (2.0 * t);
    if a < lo || (a == lo && beta > 0.0) {
        t.sqrt()
    } else if beta == 0.0 {
        if a == lo { (t / 2.0).sqrt() } else { 0.0 }
    } else if a <= hi {
        let arg = PI * t / beta * (a - lo);
        (t / 2.0 * (1.0 + arg.cos())).max(0.0).sqrt()
    } else {
        0.0
    }
}

/// `G(s)` evaluated on an arbitrary grid of positions.
pub fn rrc_window(spec: &RrcSpec, grid: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok(grid
        .iter()
        .map(|&s| rrc_unchecked(spec.rolloff, spec.period, s))
        .collect())
}

/// Squared RRC normalized to unit passband (a raised cosine), so that
/// `sum_m nyquist_weight(s + m/T) == 1` for every `s`.
#[cfg(test)]
pub(crate) fn nyquist_weight(beta: f64, period: f64, s: f64) -> f64 {
    let g = rrc_unchecked(beta, period, s);
    g * g / period
}

/// Continuous-time impulse response whose spectrum is `G(f) / sqrt(T)`
/// (unit passband gain, unit area).
fn rrc_impulse(beta: f64, t_sym: f64, t: f64) -> f64 {
    let u = t / t_sym;
    let scale = 1.0 / t_sym;
    if u.abs() < 1e-12 {
        return scale * (1.0 - beta + 4.0 * beta / PI);
    }
    if beta > 0.0 && ((4.0 * beta * u).abs() - 1.0).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return scale * beta / 2f64.sqrt()
            * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * u * (1.0 - beta)).sin() + 4.0 * beta * u * (PI * u * (1.0 + beta)).cos();
    let den = PI * u * (1.0 - (4.0 * beta * u).powi(2));
    scale * num / den
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

const KAISER_BETA: f64 = 8.0;

fn kaiser(pos: f64, half_width: f64) -> f64 {
    let r = pos / half_width;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / bessel_i0(KAISER_BETA)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rational resampling by `up / down` through a polyphase bank built from a
/// Kaiser-windowed discretization of the RRC response.
///
/// The prototype is zero-phase: output sample `m` sits at input position
/// `m * down / up`, so no delay compensation is needed by the caller. Edge
/// samples see zero extension.
pub fn resample_rational(
    x: &ComplexSequence,
    up: usize,
    down: usize,
    filter: &RrcSpec,
) -> Result<ComplexSequence> {
    filter.validate()?;
    if up == 0 || down == 0 {
        return Err(Error::InvalidParameter("up and down must be >= 1".into()));
    }
    if gcd(up, down) != 1 {
        return Err(Error::InvalidParameter(format!(
            "up={up} and down={down} are not coprime"
        )));
    }
    if x.domain() != Domain::Time {
        return Err(Error::DomainMismatch {
            expected: Domain::Time,
            got: x.domain(),
        });
    }
    let taps = filter.length.max(2);
    if taps > x.len() {
        return Err(Error::InvalidParameter(format!(
            "filter spans {taps} input samples but signal has only {}",
            x.len()
        )));
    }
    let n_in = x.len();
    let n_out = (n_in * up).div_ceil(down);
    let t_in = x.spacing();
    let half = taps as f64 / 2.0;
    let half_i = taps as i64 / 2;

    // bank[phase][i] weights input sample base - half_i + 1 + i for an output
    // whose position is base + phase/up.
    let bank: Vec<Vec<f64>> = (0..up)
        .map(|phase| {
            let frac = phase as f64 / up as f64;
            (0..taps)
                .map(|i| {
                    let offset = frac - (i as i64 - half_i + 1) as f64;
                    t_in * rrc_impulse(filter.rolloff, filter.period, offset * t_in)
                        * kaiser(offset, half + 1.0)
                })
                .collect()
        })
        .collect();

    let xs = x.samples();
    let out: Vec<Complex64> = (0..n_out)
        .map(|m| {
            let pos = m * down;
            let base = (pos / up) as i64;
            let phase = pos % up;
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, w) in bank[phase].iter().enumerate() {
                let k = base - half_i + 1 + i as i64;
                if k >= 0 && (k as usize) < n_in {
                    acc += xs[k as usize] * *w;
                }
            }
            acc
        })
        .collect();
    ComplexSequence::time(out, t_in * down as f64 / up as f64)
}

/// Gaussian tail probability `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// A deterministic random stream keyed by `(master_seed, stream_index)`.
///
/// Built on ChaCha's native stream counter, so distinct indices are
/// independent keystreams and any index can be produced without generating
/// its predecessors.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha12Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_index);
        Self { inner }
    }

    /// Derives an independent child stream; used to split one realization's
    /// randomness into channel / payload / noise sub-streams.
    pub fn substream(master_seed: u64, stream_index: u64, lane: u64) -> Self {
        Self::new(
            master_seed ^ lane.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            stream_index,
        )
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Circular complex Gaussian with `E|z|^2 = 1`.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.standard_normal() * s, self.standard_normal() * s)
    }

    pub fn below(&mut self, n: u32) -> u32 {
        self.inner.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `rng_stream(seed, index)`.
pub fn rng_stream(master_seed: u64, stream_index: u64) -> RngStream {
    RngStream::new(master_seed, stream_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_seq(n: usize, seed: u64) -> Vec<Complex64> {
        let mut r = RngStream::new(seed, 0);
        (0..n).map(|_| r.complex_gaussian()).collect()
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        (num / energy(b)).sqrt()
    }

    #[test]
    fn impulse_transforms_to_constant() {
        let x = ComplexSequence::time(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)], 1.0).unwrap();
        let y = dft(&x).unwrap();
        assert_eq!(y.domain(), Domain::Frequency);
        for v in y.samples() {
            assert!((v - c(1., 0.)).norm() < 1e-15);
        }
    }

    #[test]
    fn ones_transform_to_scaled_impulse() {
        let x = ComplexSequence::time(vec![c(1., 0.); 4], 1.0).unwrap();
        let y = dft(&x).unwrap();
        let want = [c(4., 0.), c(0., 0.), c(0., 0.), c(0., 0.)];
        for (a, b) in y.samples().iter().zip(want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            ComplexSequence::time(vec![], 1.0),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn round_trip_1024() {
        let x = random_seq(1024, 3);
        let s = ComplexSequence::time(x.clone(), 1e-6).unwrap();
        let back = idft(&dft(&s).unwrap()).unwrap();
        assert!(rel_err(back.samples(), &x) < 1e-12);
        assert!((back.spacing() - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn parseval_holds_for_awkward_lengths() {
        for &n in &[7usize, 64, 1000, 2048] {
            let x = random_seq(n, n as u64);
            let lhs = energy(&x);
            let rhs = energy(&fft_vec(&x)) / n as f64;
            assert!((lhs - rhs).abs() / lhs < 1e-10, "n={n}");
        }
    }

    #[test]
    fn circular_shift_is_a_phase_ramp() {
        let n = 96;
        let shift = 5;
        let x = random_seq(n, 11);
        let shifted: Vec<_> = (0..n).map(|i| x[(i + n - shift) % n]).collect();
        let fx = fft_vec(&x);
        let fs = fft_vec(&shifted);
        let ramp: Vec<_> = (0..n)
            .map(|k| fx[k] * Complex64::from_polar(1.0, -2.0 * PI * (k * shift) as f64 / n as f64))
            .collect();
        assert!(rel_err(&fs, &ramp) < 1e-10);
    }

    #[test]
    fn fftshift_round_trip() {
        for n in [7usize, 8] {
            let x = random_seq(n, 1);
            assert_eq!(ifftshift(&fftshift(&x)), x);
            // DC lands at n/2
            assert_eq!(fftshift(&x)[n / 2], x[0]);
        }
    }

    #[test]
    fn rrc_branches() {
        let spec = RrcSpec::new(0.1, 2.0, 8).unwrap();
        assert_eq!(rrc_value(&spec, 0.0).unwrap(), 2f64.sqrt());
        assert_eq!(rrc_value(&spec, spec.support()).unwrap(), 0.0);
        let mid = rrc_value(&spec, 1.0 / (2.0 * 2.0)).unwrap();
        assert!((mid - (2.0f64 / 2.0).sqrt()).abs() < 1e-12);
        assert_eq!(rrc_value(&spec, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn rrc_rejects_bad_rolloff() {
        assert!(RrcSpec::new(1.5, 1.0, 8).is_err());
        let bad = RrcSpec { rolloff: -0.1, period: 1.0, length: 8 };
        assert!(rrc_value(&bad, 0.0).is_err());
    }

    #[test]
    fn rrc_window_is_even_and_bounded() {
        let spec = RrcSpec::new(0.25, 1.0, 8).unwrap();
        let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.005).collect();
        let w = rrc_window(&spec, &grid).unwrap();
        for i in 0..w.len() {
            assert!(w[i] >= 0.0);
            assert!((w[i] - w[w.len() - 1 - i]).abs() < 1e-14);
            if grid[i].abs() > spec.support() {
                assert_eq!(w[i], 0.0);
            }
        }
    }

    #[test]
    fn rrc_squared_is_nyquist() {
        for &beta in &[0.0, 0.1, 0.5, 1.0] {
            for i in 0..50 {
                let s = -0.5 + i as f64 * 0.0213;
                let total: f64 = (-3..=3).map(|m| nyquist_weight(beta, 1.0, s + m as f64)).sum();
                assert!((total - 1.0).abs() < 1e-12, "beta={beta} s={s}");
            }
        }
    }

    #[test]
    fn q_function_spot_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-12);
        assert!(q_function(40.0) < 1e-300);
        assert!(q_function(f64::NAN).is_nan());
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let mut a = rng_stream(42, 7);
        let mut b = rng_stream(42, 7);
        let mut c = rng_stream(42, 8);
        let da: Vec<f64> = (0..1000).map(|_| a.uniform()).collect();
        let db: Vec<f64> = (0..1000).map(|_| b.uniform()).collect();
        let dc: Vec<f64> = (0..1000).map(|_| c.uniform()).collect();
        assert_eq!(da, db);
        assert_ne!(da, dc);
    }

    #[test]
    fn uniform_mean_within_four_sigma() {
        let mut r = rng_stream(1, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| r.uniform()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.002);
    }

    #[test]
    fn resample_identity() {
        let x = random_seq(200, 4);
        let s = ComplexSequence::time(x.clone(), 1.0).unwrap();
        let spec = RrcSpec::with_default_length(0.1, 1.0, 1).unwrap();
        let y = resample_rational(&s, 1, 1, &spec).unwrap();
        assert_eq!(y.len(), 200);
        // a band-limiting filter is not an identity on white input, so only
        // check the degenerate path's length and spacing here; tone fidelity
        // is covered in the integration tests
        assert_eq!(y.spacing(), 1.0);
    }

    #[test]
    fn resample_length_and_spacing() {
        let s = ComplexSequence::time(random_seq(401, 2), 1e-6).unwrap();
        let spec = RrcSpec::with_default_length(0.1, 1e-6, 5).unwrap();
        let y = resample_rational(&s, 5, 4, &spec).unwrap();
        assert_eq!(y.len(), (401usize * 5).div_ceil(4));
        assert!((y.spacing() - 0.8e-6).abs() < 1e-18);
    }

    #[test]
    fn resample_errors() {
        let s = ComplexSequence::time(random_seq(10, 2), 1.0).unwrap();
        let spec = RrcSpec::with_default_length(0.1, 1.0, 5).unwrap();
        assert!(resample_rational(&s, 5, 4, &spec).is_err()); // filter too long
        let spec = RrcSpec::new(0.1, 1.0, 4).unwrap();
        assert!(resample_rational(&s, 4, 2, &spec).is_err()); // not coprime
    }
}
