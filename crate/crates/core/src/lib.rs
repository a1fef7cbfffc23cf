pub mod asymptotics;
pub mod entropic;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod measure;
pub mod oracle;
pub mod powercell;
pub mod problem;
pub mod scenario;
pub mod sdot;
pub mod specialfn;

pub use error::{Error, Result};
