pub mod assembly;
pub mod bench;
pub mod dynamics;
pub mod error;
pub mod mass;
pub mod material;
pub mod mesh;
pub mod projection;
pub mod stabilization;

pub use error::{Error, Result};
