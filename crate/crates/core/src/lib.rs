// `!(x > 0.0)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptation;
pub mod channel;
pub mod error;
pub mod harness;
pub mod jammer;
pub mod receiver;
pub mod waveform;

pub use error::{Error, Result};
