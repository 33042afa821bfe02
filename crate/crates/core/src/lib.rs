pub mod bench;
pub mod cli;
pub mod data;
pub mod density;
pub mod error;
pub mod inference;
pub mod kernels;
pub mod metrics;
pub mod sampling;
pub mod training;
