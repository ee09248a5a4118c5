//! Data-path modules: per-radio command surface, packet filter, rewrite
//! engine and repeater.

pub mod filter;
pub mod packet_mod;
pub mod radio;
pub mod repeater;

pub use filter::{filter_accepts, FilterRule, PacketFilter};
pub use packet_mod::{apply_all, CompiledMod, ModError, Op, PacketModEngine, PacketModification};
pub use radio::{modem_config_fields, RadioModule};
pub use repeater::{repeat_packet, Repeater};
