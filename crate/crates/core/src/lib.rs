//! Exact-arithmetic neural network inference and verification.

pub mod fixtures;
pub mod matrix;
pub mod property;
pub mod scalar;
pub mod verify;
pub mod model_io;
pub mod network;
