//! Exciton transport through pigment-protein networks under a secular
//! Lindblad description, with Liouville-space efficiency, transfer time and
//! susceptibility analysis.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod lindblad;
pub mod liouville;
pub mod model;
pub mod registry;
pub mod spectral;

pub use error::{Error, Result};
