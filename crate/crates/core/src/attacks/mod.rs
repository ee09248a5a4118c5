//! Multi-radio attack demonstrations built purely on the module API.

mod mousejack;
mod rolljam;

pub use mousejack::{validate_capture, MouseJack, PrefixStats, VendorRule, VendorTable};
pub use rolljam::{RollJam, RollJamConfig};
