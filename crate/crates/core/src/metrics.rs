//! Link metrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::q_function;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvmNormalization {
    /// Divide by the RMS of the received symbols.
    #[default]
    Received,
    /// Divide by the RMS of the reference symbols.
    Reference,
}

/// Error-vector magnitude, normalized by received RMS.
pub fn evm(reference: &[Complex64], received: &[Complex64]) -> Result<f64> {
    evm_with(reference, received, EvmNormalization::Received)
}

pub fn evm_with(
    reference: &[Complex64],
    received: &[Complex64],
    norm: EvmNormalization,
) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::EmptyInput);
    }
    if reference.len() != received.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            got: received.len(),
        });
    }
    let err: f64 = reference
        .iter()
        .zip(received)
        .map(|(a, b)| (b - a).norm_sqr())
        .sum();
    let base = match norm {
        EvmNormalization::Received => received,
        EvmNormalization::Reference => reference,
    };
    let power: f64 = base.iter().map(|v| v.norm_sqr()).sum();
    if power == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok((err / power).sqrt())
}

fn side(m: u32) -> f64 {
    (m as f64).sqrt()
}

/// SER floor implied by a Gaussian error of the given EVM.
pub fn ser_floor_from_evm(evm: f64, m: u32) -> f64 {
    let s = side(m);
    if evm <= 0.0 {
        return 0.0;
    }
    let arg = (3.0 / ((m as f64 - 1.0) * evm * evm)).sqrt();
    2.0 * (s - 1.0) / s * q_function(arg)
}

/// Per-axis error probability of square M-QAM at `Es/N0 = snr`.
fn axis_error(snr: f64, m: u32) -> f64 {
    let s = side(m);
    2.0 * (s - 1.0) / s * q_function((3.0 * snr / (m as f64 - 1.0)).sqrt())
}

/// Exact symbol error rate of Gray square M-QAM in AWGN, `snr_db` = Es/N0.
pub fn theoretical_mqam_ser(snr_db: f64, m: u32) -> f64 {
    let p = axis_error(10f64.powf(snr_db / 10.0), m);
    1.0 - (1.0 - p) * (1.0 - p)
}

/// SNR (dB) at which [`theoretical_mqam_ser`] equals `target`.
pub fn snr_for_ser(target: f64, m: u32) -> f64 {
    let (mut lo, mut hi) = (-20.0, 80.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theoretical_mqam_ser(mid, m) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Peak-to-average power ratio in dB.
pub fn papr(x: &[Complex64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let peak = x.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let mean = x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
    if mean == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(10.0 * (peak / mean).log10())
}

pub fn count_symbol_errors(sent: &[u32], decided: &[u32]) -> usize {
    sent.iter().zip(decided).filter(|(a, b)| a != b).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub evm: f64,
    pub ser: f64,
    pub ser_floor: f64,
    pub papr_db: f64,
    pub n_symbols: u64,
    pub n_errors: u64,
}

/// Per-realization outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub evm: f64,
    pub papr_db: f64,
    pub n_symbols: u64,
    pub n_errors: u64,
    pub clamped: u64,
}

/// Running totals over realizations; `merge` is associative.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricAccumulator {
    pub realizations: u64,
    pub evm_sum: f64,
    pub floor_sum: f64,
    pub n_symbols: u64,
    pub n_errors: u64,
    pub clamped: u64,
    pub papr: Vec<f64>,
}

impl MetricAccumulator {
    pub fn push(&mut self, obs: Observation, order: u32) {
        self.realizations += 1;
        self.evm_sum += obs.evm;
        self.floor_sum += ser_floor_from_evm(obs.evm, order);
        self.n_symbols += obs.n_symbols;
        self.n_errors += obs.n_errors;
        self.clamped += obs.clamped;
        self.papr.push(obs.papr_db);
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.realizations += other.realizations;
        self.evm_sum += other.evm_sum;
        self.floor_sum += other.floor_sum;
        self.n_symbols += other.n_symbols;
        self.n_errors += other.n_errors;
        self.clamped += other.clamped;
        self.papr.extend(other.papr);
        self
    }

    pub fn evm_mean(&self) -> f64 {
        self.evm_sum / self.realizations.max(1) as f64
    }

    pub fn ser(&self) -> f64 {
        if self.n_symbols == 0 {
            0.0
        } else {
            self.n_errors as f64 / self.n_symbols as f64
        }
    }

    pub fn ser_floor(&self) -> f64 {
        self.floor_sum / self.realizations.max(1) as f64
    }

    /// Nearest-rank percentile of the recorded PAPR values.
    pub fn papr_percentile(&self, pct: f64) -> f64 {
        if self.papr.is_empty() {
            return f64::NAN;
        }
        let mut v = self.papr.clone();
        v.sort_by(f64::total_cmp);
        let rank = ((pct / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
        v[rank.min(v.len()) - 1]
    }

    pub fn record(&self) -> MetricRecord {
        MetricRecord {
            evm: self.evm_mean(),
            ser: self.ser(),
            ser_floor: self.ser_floor(),
            papr_db: self.papr_percentile(99.0),
            n_symbols: self.n_symbols,
            n_errors: self.n_errors,
        }
    }
}
