//! Spectral sets and tiles in the p-adic field `Q_p`.

pub mod cyclic_group;
pub mod construct;
pub mod cyclotomic;
pub mod error;
pub mod measures;
pub mod padic;
pub mod set_model;

pub use error::{Error, Result};
