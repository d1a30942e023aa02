pub mod arith;
pub mod classify;
pub mod discriminant;
pub mod enumeration;
pub mod error;
pub mod genus;
pub mod isometry;
pub mod lattice;
pub mod matrix;
pub mod ns;

pub use error::{LatticeError, Result};
pub use matrix::IntMatrix;
