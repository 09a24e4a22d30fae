pub mod error;
pub mod exec;
pub mod geometry;
pub mod scene;
pub mod seed;

pub use error::{Error, GeometryError, Result};
pub use exec::Exec;
pub mod eval;
pub mod interp;
pub mod mask;
pub mod metrics;
pub mod synth;
