//! Distance-correlation analysis of Elman RNN hidden layers.
//!
//! The crate generates or loads univariate series, trains a many-to-one
//! Elman network on sliding windows, records every hidden state and measures
//! how much each layer still "knows" about the network input with the
//! sample distance correlation.

pub mod analysis;
pub mod error;
pub mod estat;
pub mod pipeline;
pub mod rng;
pub mod rnn;
pub mod tsgen;

pub use error::{Error, Result};
