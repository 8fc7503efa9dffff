pub mod builders;
pub mod duality;
pub mod dynamics;
pub mod error;
pub mod laxops;
pub mod matengine;
pub mod sampling;
pub mod scattering;
pub mod types;

pub use error::{Error, Result};
pub use types::*;
