pub mod analysis;
pub mod campaign;
pub mod domain;
pub mod error;
pub mod fields;
pub mod matineq;
pub mod quad;
pub mod solver;
pub mod symmat;
pub mod transform;

pub use error::{Error, Result};
