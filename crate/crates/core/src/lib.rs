//! Phase-sparse models of digital modulations, compressive sampling and
//! symbol recovery by l1 minimization.

pub mod constellations;
pub mod decode;
pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;
pub mod sampling;
pub mod scenario;
pub mod solver;

pub use error::{Error, Result};
