//! Orbit-separation growth for finite dynamical systems and their induced
//! hyperspace and measure systems.

pub mod error;
pub mod growth;
pub mod hyperspace;
pub mod measures;
pub mod separation;
pub mod space;
pub mod subshift;
pub mod system;
pub mod zoo;

pub use error::{Error, Result};
pub use space::{parse_ratio, FiniteMetricSpace, Ratio};
pub use system::{FiniteDynamics, System};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
