pub mod bits;
pub mod circuit;
pub mod complexity;
pub mod enumeration;
pub mod error;
pub mod experiments;
pub mod predictor;
pub mod prior;

pub use bits::{BitString, Pattern};
pub use circuit::{Circuit, NodeRef};
pub use error::{Error, Result};
