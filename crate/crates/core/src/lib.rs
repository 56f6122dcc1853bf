//! Variational denoising and inpainting of SPD tensor fields with a
//! log-Euclidean double-integral regularizer.

pub mod analysis;
pub mod error;
pub mod field;
pub mod optim;
pub mod spd;
pub mod synth;

pub use error::{Error, Result};
