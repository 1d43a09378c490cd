use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input sequence")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("domain mismatch: expected {expected:?}, got {got:?}")]
    DomainMismatch {
        expected: crate::numerics::Domain,
        got: crate::numerics::Domain,
    },

    #[error("symbol {symbol} out of range for {order}-QAM")]
    SymbolOutOfRange { symbol: u32, order: u32 },

    #[error("signal has zero power")]
    ZeroPower,

    #[error("no pilot energy")]
    NoPilotEnergy,

    #[error("pilot guard too narrow: {leakage_db:.1} dB of pilot energy leaks past the guard")]
    GuardTooNarrow { leakage_db: f64 },

    #[error("tap delay {delay_s:e} s exceeds block duration {block_s:e} s")]
    DelayExceedsBlock { delay_s: f64, block_s: f64 },

    #[error("scheme mismatch: estimate for {estimate}, block for {block}")]
    SchemeMismatch { estimate: String, block: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
