pub mod channel;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod qam;
pub mod waveforms;

pub use error::{Error, Result};
