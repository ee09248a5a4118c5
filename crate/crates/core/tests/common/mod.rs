#![allow(dead_code)]

pub mod engine_oracle;
pub mod fixtures;
pub mod runs_oracle;
pub mod wire;
