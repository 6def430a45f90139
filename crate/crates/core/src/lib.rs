//! Generalized robustness of quantum states and the subchannel
//! discrimination tasks whose advantage ratio it quantifies.

pub mod discrimination;
pub mod error;
pub mod free_sets;
pub mod linalg;
pub mod report;
pub mod robustness;
pub mod sampling;
pub mod sdp;
pub mod synthesis;
pub mod tolerances;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
