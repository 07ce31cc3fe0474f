//! Filtered Boolean powers of finite algebras over Cantor space.

pub mod algebra;
pub mod automorphism;
pub mod cantor;
pub mod error;
pub mod factor;
pub mod fraisse;
pub mod free;
pub mod json;
pub mod power;
pub mod random;

pub use error::{Error, Result};
