pub mod devices;
pub mod dualrail;
pub mod error;
pub mod exact;
pub mod fock;
pub mod report;
pub mod stabilizer;
pub mod zx;

pub use error::{Error, Result};
