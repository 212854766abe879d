pub mod branched;
pub mod branched_rde;
pub mod calculus;
pub mod error;
pub mod experiment;
pub mod geometric;
pub mod jet;
pub mod ode;
pub mod path;
pub mod residual;
pub mod signature;
pub mod tensor;
pub mod trees;

pub use error::{Error, Result};
