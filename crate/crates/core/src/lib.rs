pub mod error;
pub mod series;

pub use error::{Error, Result};
pub mod partition;
pub mod autodiff;
pub mod meta;
pub mod data;
pub mod experiment;
