//! Joint transceiver and reflection-coefficient design for full-duplex
//! multi-cell networks assisted by a reconfigurable intelligent surface.

pub mod bcd;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod network;
pub mod phase;
pub mod validation;
pub mod wmmse;

pub use error::{Error, Result};
