//! Tunneling-delay model for attoclock experiments: barrier geometry under a
//! static field, ionization and barrier delay components, and a pipeline that
//! extracts the empirical barrier delay from calibrated delay-vs-field data
//! and compares it against the model across effective charges.
//!
//! All internal computation uses Hartree atomic units; conversion to
//! attoseconds and intensity in W/cm^2 happens at the boundaries.

pub mod analysis;
pub mod cli;
pub mod dataio;
pub mod error;
pub mod fitting;
pub mod grid;
pub mod model;
pub mod plot;
pub mod units;

pub(crate) mod numfmt;

pub use error::{Error, Result};
pub use model::AtomicSystem;
