//! Coded MIMO-OFDM link-level simulator comparing open-loop transmit
//! diversity schemes for four transmit antennas: cyclic delay diversity,
//! Alamouti with CDD, quasi-orthogonal STBC and minimum-decoding-complexity
//! QO-STBC, plus an incremental-diversity HARQ built on the MDC code.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cdd;
pub mod channel;
pub mod detect;
pub mod error;
pub mod harq;
pub mod numerics;
pub mod selftest;
pub mod sim;
pub mod stbc;
pub mod turbo;

pub use error::{Error, Result};
