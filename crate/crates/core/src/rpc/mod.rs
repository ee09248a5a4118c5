//! Host protocol: topic-addressed frames over any ordered byte stream.

mod frame;
mod session;
mod topic;

pub use frame::{canonical_json, decode, encode, encode_frame, Frame, FrameDecoder, FrameError, HEADER_LEN, MAGIC, MAX_FRAME};
pub use session::{serve, serve_tcp, PumpStats, ServeOptions, Session, WRITER_BACKLOG};
pub use topic::{Direction, Topic, ROOT};
