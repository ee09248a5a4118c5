//! Virtual RF dongle: simulated channel, multi-radio proxy, module pipeline,
//! automatic signal clamping, attack modules and the host RPC protocol.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod builder;
pub mod checksum;
pub mod clamping;
pub mod env;
pub mod hal;
pub mod modules;
pub mod pipeline;
pub mod rpc;
pub(crate) mod hexbytes;
