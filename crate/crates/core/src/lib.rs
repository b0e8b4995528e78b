pub mod capacity;
pub mod error;
pub mod experiments;
pub mod format;
pub mod lp;
pub mod network;
pub mod theory;
pub mod worst_case;

pub use error::{Error, Result};
