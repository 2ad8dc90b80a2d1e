//! Device-independent randomness amplification from weak (Santha–Vazirani and
//! measurement-dependent-locality) sources.
//!
//! The crate covers the whole pipeline: source models, two-qubit Bell
//! functionals and their quantum maxima, finite-size entropy rates, two-source
//! extraction, and a protocol simulator with completeness bookkeeping.

pub mod bits;
pub mod cli;
pub mod config;
pub mod error;
pub mod extractor;
pub mod protocol;
pub mod quantum;
pub mod rates;
pub mod rng;
pub mod sources;

pub use bits::BitString;
pub use error::{Error, Result};
pub use protocol::{run, DeviceModel, ExtractorConfig, ProtocolOutcome};
pub use rates::{eta_opt, EatParams, RateResult};
pub use sources::{MdlParams, SourceKind, SourceModel, SvParams};
