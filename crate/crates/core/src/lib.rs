//! Computational tools for lines, logarithmic spirals and the iterated
//! exponential `exp(exp(p + t(i + α)))`.

pub mod cantor;
pub mod density;
pub mod distribution;
pub mod error;
pub mod precision;
pub mod spiral;

pub use error::{Error, Result};
