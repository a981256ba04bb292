//! Rate-optimal channel-shortening receivers for linear Gaussian channels.
//!
//! ```
//! use chanshort::channels::{parse_channel, ChannelSource, SAMPLE_3X4};
//! use chanshort::rates::rate_report;
//! use chanshort::shortening::design_banded;
//! use chanshort::BandSpec;
//!
//! let ch = parse_channel(SAMPLE_3X4, 1.0, ChannelSource::Explicit)?;
//! let design = design_banded(&ch, BandSpec(1))?;
//! assert!(design.lambda_min < 0.0);
//!
//! let report = rate_report(&ch, 1)?;
//! assert!((report.gmi_logdet - report.gmi_chain).abs() < 1e-9);
//! assert!(report.i_mmse < report.gmi_logdet && report.gmi_logdet < report.i_full);
//! # Ok::<(), chanshort::Error>(())
//! ```

pub mod asymptotics;
pub mod channels;
pub mod error;
pub mod harness;
pub mod matcore;
pub mod rates;
pub mod shortening;

pub use channels::{Channel, ChannelSource};
pub use error::{Error, Result};
pub use matcore::{BandSpec, ComplexMatrix};
pub use shortening::BlockSpec;
